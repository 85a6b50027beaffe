#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "space.hpp"

namespace varrisk {

/// Risk functional rho on scenario scalars: monotone, convex, and equal to
/// the constant on deterministic positions. Larger values mean larger
/// risk; positions are read as losses.
///
/// Catalog:
///   expectation          E[X]
///   entropic(beta)       (1/beta) log E[exp(beta X)]
///   expected_shortfall   min_t { t + E[(X-t)_+] / (1-level) }
///   mean_semideviation   E[X] + c E[(X - E[X])_+]
class SimpleRiskMeasure {
public:
    enum class Kind { expectation, entropic, expected_shortfall, mean_semideviation, custom };

    static SimpleRiskMeasure expectation() { return SimpleRiskMeasure(Kind::expectation, "expectation"); }

    static SimpleRiskMeasure entropic(double beta) {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw validation_error("entropic.beta: must be finite and > 0");
        SimpleRiskMeasure r(Kind::entropic, "entropic");
        r.param_ = beta;
        return r;
    }

    static SimpleRiskMeasure expected_shortfall(double level) {
        if (!(level >= 0.0 && level < 1.0))
            throw validation_error("expected_shortfall.level: must lie in [0, 1)");
        SimpleRiskMeasure r(Kind::expected_shortfall, "expected_shortfall");
        r.param_ = level;
        return r;
    }

    static SimpleRiskMeasure mean_semideviation(double c) {
        if (!(c >= 0.0 && c <= 1.0))
            throw validation_error("mean_semideviation.c: must lie in [0, 1]");
        SimpleRiskMeasure r(Kind::mean_semideviation, "mean_semideviation");
        r.param_ = c;
        return r;
    }

    static SimpleRiskMeasure custom(
        std::function<double(const RandomVariable&, const FiniteSpace&)> eval,
        std::string label = "custom") {
        if (!eval) throw validation_error("custom simple measure: evaluator must be callable");
        SimpleRiskMeasure r(Kind::custom, std::move(label));
        r.eval_ = std::move(eval);
        return r;
    }

    Kind kind() const { return kind_; }
    double param() const { return param_; }
    const std::string& label() const { return label_; }

    double operator()(const RandomVariable& X, const FiniteSpace& sp) const {
        if (kind_ == Kind::custom) return eval_(X, sp);
        // Deterministic positions evaluate to themselves exactly for every
        // catalog member; short-circuiting removes the summation rounding.
        if (std::all_of(X.values.begin(), X.values.end(),
                        [&](double v) { return v == X.values[0]; }))
            return X.values[0];
        switch (kind_) {
            case Kind::expectation:
                return mean(X, sp);
            case Kind::entropic: {
                const double beta = param_;
                double m = -kInf;
                for (double x : X.values) m = std::max(m, beta * x);
                double acc = 0.0;
                for (std::size_t i = 0; i < X.size(); ++i)
                    acc += sp.probs[i] * std::exp(beta * X.values[i] - m);
                return (m + std::log(acc)) / beta;
            }
            case Kind::expected_shortfall: {
                double best = kInf;
                for (double t : X.values) best = std::min(best, es_objective(X, sp, t));
                return best;
            }
            case Kind::mean_semideviation: {
                const double m = mean(X, sp);
                double dev = 0.0;
                for (std::size_t i = 0; i < X.size(); ++i)
                    dev += sp.probs[i] * std::max(X.values[i] - m, 0.0);
                return m + param_ * dev;
            }
            default:
                return 0.0;  // unreachable
        }
    }

    /// Left endpoint of the argmin interval of the shortfall objective.
    double es_threshold(const RandomVariable& X, const FiniteSpace& sp) const {
        if (kind_ != Kind::expected_shortfall)
            throw unsupported_kind("es_threshold: only defined for expected_shortfall");
        double best = kInf, arg = X.values[0];
        std::vector<double> sorted(X.values);
        std::sort(sorted.begin(), sorted.end());
        for (double t : sorted) {
            const double v = es_objective(X, sp, t);
            if (v < best) {
                best = v;
                arg = t;
            }
        }
        return arg;
    }

private:
    SimpleRiskMeasure(Kind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

    static double mean(const RandomVariable& X, const FiniteSpace& sp) {
        double acc = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i) acc += sp.probs[i] * X.values[i];
        return acc;
    }

    double es_objective(const RandomVariable& X, const FiniteSpace& sp, double t) const {
        double tail = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i)
            tail += sp.probs[i] * std::max(X.values[i] - t, 0.0);
        return t + tail / (1.0 - param_);
    }

    Kind kind_;
    double param_ = 0.0;
    std::function<double(const RandomVariable&, const FiniteSpace&)> eval_;
    std::string label_;
};

inline double eval_simple(const SimpleRiskMeasure& rho_s, const RandomVariable& X,
                          const FiniteSpace& sp) {
    if (X.size() != sp.size())
        throw length_mismatch("eval_simple: variable length must match the space");
    return rho_s(X, sp);
}

/// Sampled verification of monotonicity, convexity, and constancy (the
/// latter on the integer grid -10..10).
inline AxiomReport check_simple_axioms(const SimpleRiskMeasure& rho_s, const FiniteSpace& sp,
                                       long trials, std::uint64_t seed, double tol = 1e-9) {
    if (trials < 1) throw invalid_config("check_simple_axioms: trials must be >= 1");
    AxiomReport report;
    report.subject = rho_s.label();

    const std::size_t n = sp.size();
    const double scale = 10.0;
    std::vector<std::optional<Witness>> mono(trials), convex(trials);

    run_trials(trials, false, [&](long t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        {
            std::vector<double> xv = rng.normal_vector(n, scale);
            std::vector<double> yv(n);
            for (std::size_t i = 0; i < n; ++i) yv[i] = xv[i] - std::abs(rng.normal(scale));
            const RandomVariable X(xv), Y(yv);
            const double rx = eval_simple(rho_s, X, sp), ry = eval_simple(rho_s, Y, sp);
            if (!(rx >= ry - tol)) {
                Witness w;
                w.description = "X >= Y pointwise but rho(X) < rho(Y)";
                w.values.push_back(witness_vector("X", xv));
                w.values.push_back(witness_vector("Y", yv));
                w.values.push_back(witness_scalar("rho_X", rx));
                w.values.push_back(witness_scalar("rho_Y", ry));
                mono[t] = std::move(w);
            }
        }
        {
            std::vector<double> xv = rng.normal_vector(n, scale);
            std::vector<double> yv = rng.normal_vector(n, scale);
            const double lam = rng.uniform();
            std::vector<double> mixv(n);
            for (std::size_t i = 0; i < n; ++i) mixv[i] = lam * xv[i] + (1.0 - lam) * yv[i];
            const double lhs = eval_simple(rho_s, RandomVariable(mixv), sp);
            const double rhs = lam * eval_simple(rho_s, RandomVariable(xv), sp) +
                               (1.0 - lam) * eval_simple(rho_s, RandomVariable(yv), sp);
            if (!(lhs <= rhs + tol)) {
                Witness w;
                w.description = "rho(lam X + (1-lam) Y) exceeds the chord";
                w.values.push_back(witness_vector("X", xv));
                w.values.push_back(witness_vector("Y", yv));
                w.values.push_back(witness_scalar("lambda", lam));
                w.values.push_back(witness_scalar("rho_mix", lhs));
                w.values.push_back(witness_scalar("chord", rhs));
                convex[t] = std::move(w);
            }
        }
    });

    auto first_failure = [](std::vector<std::optional<Witness>>& slots) -> std::optional<Witness> {
        for (auto& s : slots)
            if (s) return std::move(s);
        return std::nullopt;
    };

    AxiomCheck b1{"monotonicity", true, trials, std::nullopt};
    if (auto w = first_failure(mono)) {
        b1.passed = false;
        b1.witness = std::move(w);
    }
    AxiomCheck b2{"convexity", true, trials, std::nullopt};
    if (auto w = first_failure(convex)) {
        b2.passed = false;
        b2.witness = std::move(w);
    }

    AxiomCheck b3{"constancy", true, 21, std::nullopt};
    for (int a = -10; a <= 10; ++a) {
        const double va = eval_simple(rho_s, RandomVariable::constant(n, a), sp);
        if (!(std::abs(va - a) <= tol)) {
            Witness w;
            w.description = "rho of the constant differs from the constant";
            w.values.push_back(witness_scalar("a", a));
            w.values.push_back(witness_scalar("rho_a", va));
            b3.passed = false;
            b3.witness = std::move(w);
            break;
        }
    }

    report.checks = {std::move(b1), std::move(b2), std::move(b3)};
    return report;
}

/// Convex conjugate rho*(Yhat) = sup_X { E[Yhat X] - rho(X) } in closed
/// form for the catalog; +inf outside the dual feasible set.
///
///   expectation          0 iff Yhat == 1
///   expected_shortfall   0 iff Yhat >= 0, E[Yhat] = 1, Yhat <= 1/(1-level)
///   entropic             (1/beta) E[Yhat log Yhat] iff Yhat >= 0, E[Yhat] = 1
///   mean_semideviation   0 iff Yhat = 1 + c (h - E[h]) for some h in [0,1]^n
class ConjugateDescriptor {
public:
    ConjugateDescriptor(SimpleRiskMeasure::Kind kind, double param) : kind_(kind), param_(param) {}

    SimpleRiskMeasure::Kind kind() const { return kind_; }
    double param() const { return param_; }

    double value(const RandomVariable& Yhat, const FiniteSpace& sp, double feas_tol = 1e-9) const {
        if (Yhat.size() != sp.size())
            throw length_mismatch("conjugate value: density length must match the space");
        switch (kind_) {
            case SimpleRiskMeasure::Kind::expectation: {
                for (double y : Yhat.values)
                    if (std::abs(y - 1.0) > feas_tol) return kInf;
                return 0.0;
            }
            case SimpleRiskMeasure::Kind::expected_shortfall: {
                const double cap = 1.0 / (1.0 - param_);
                if (!is_density(Yhat, sp, feas_tol)) return kInf;
                for (double y : Yhat.values)
                    if (y > cap + feas_tol) return kInf;
                return 0.0;
            }
            case SimpleRiskMeasure::Kind::entropic: {
                if (!is_density(Yhat, sp, feas_tol)) return kInf;
                double acc = 0.0;
                for (std::size_t i = 0; i < Yhat.size(); ++i) {
                    const double y = std::max(Yhat[i], 0.0);
                    if (y > 0.0) acc += sp.probs[i] * y * std::log(y);
                }
                return acc / param_;
            }
            case SimpleRiskMeasure::Kind::mean_semideviation: {
                if (param_ == 0.0) {
                    for (double y : Yhat.values)
                        if (std::abs(y - 1.0) > feas_tol) return kInf;
                    return 0.0;
                }
                double mean = 0.0;
                for (std::size_t i = 0; i < Yhat.size(); ++i) mean += sp.probs[i] * Yhat[i];
                if (std::abs(mean - 1.0) > feas_tol) return kInf;
                double lo = kInf, hi = -kInf;
                for (double y : Yhat.values) {
                    const double delta = (y - 1.0) / param_;
                    lo = std::min(lo, delta);
                    hi = std::max(hi, delta);
                }
                return (hi - lo <= 1.0 + feas_tol) ? 0.0 : kInf;
            }
            default:
                return kInf;  // unreachable
        }
    }

private:
    static bool is_density(const RandomVariable& Yhat, const FiniteSpace& sp, double tol) {
        double mean = 0.0;
        for (std::size_t i = 0; i < Yhat.size(); ++i) {
            if (Yhat[i] < -tol) return false;
            mean += sp.probs[i] * Yhat[i];
        }
        return std::abs(mean - 1.0) <= tol;
    }

    SimpleRiskMeasure::Kind kind_;
    double param_;
};

inline ConjugateDescriptor analytic_conjugate(const SimpleRiskMeasure& rho_s) {
    if (rho_s.kind() == SimpleRiskMeasure::Kind::custom)
        throw unsupported_kind("analytic_conjugate: no closed form for custom measures");
    return ConjugateDescriptor(rho_s.kind(), rho_s.param());
}

/// A maximizing density in rho(X) = sup { E[Yhat X] - rho*(Yhat) }: an
/// element of the subdifferential of rho at X.
inline RandomVariable conjugate_maximizer(const SimpleRiskMeasure& rho_s, const RandomVariable& X,
                                          const FiniteSpace& sp) {
    const std::size_t n = X.size();
    if (n != sp.size())
        throw length_mismatch("conjugate_maximizer: variable length must match the space");
    switch (rho_s.kind()) {
        case SimpleRiskMeasure::Kind::expectation:
            return RandomVariable::constant(n, 1.0);
        case SimpleRiskMeasure::Kind::entropic: {
            const double beta = rho_s.param();
            double m = -kInf;
            for (double x : X.values) m = std::max(m, beta * x);
            std::vector<double> g(n);
            double norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                g[i] = std::exp(beta * X.values[i] - m);
                norm += sp.probs[i] * g[i];
            }
            for (auto& v : g) v /= norm;
            return RandomVariable(std::move(g));
        }
        case SimpleRiskMeasure::Kind::expected_shortfall: {
            const double level = rho_s.param();
            const double cap = 1.0 / (1.0 - level);
            const double t = rho_s.es_threshold(X, sp);
            double p_above = 0.0, p_at = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (X.values[i] > t) p_above += sp.probs[i];
                if (X.values[i] == t) p_at += sp.probs[i];
            }
            const double kappa = ((1.0 - level) - p_above) / ((1.0 - level) * p_at);
            std::vector<double> g(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (X.values[i] > t)
                    g[i] = cap;
                else if (X.values[i] == t)
                    g[i] = kappa;
            }
            return RandomVariable(std::move(g));
        }
        case SimpleRiskMeasure::Kind::mean_semideviation: {
            const double c = rho_s.param();
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i) m += sp.probs[i] * X.values[i];
            double hbar = 0.0;
            std::vector<double> h(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                h[i] = X.values[i] > m ? 1.0 : 0.0;
                hbar += sp.probs[i] * h[i];
            }
            std::vector<double> g(n);
            for (std::size_t i = 0; i < n; ++i) g[i] = 1.0 + c * (h[i] - hbar);
            return RandomVariable(std::move(g));
        }
        default:
            throw unsupported_kind("conjugate_maximizer: no subdifferential oracle for custom measures");
    }
}

/// The four catalog measures with the parameters used across the test
/// matrix: entropic(1), expected_shortfall(0.5), mean_semideviation(0.5).
inline std::vector<SimpleRiskMeasure> catalog_simple() {
    return {SimpleRiskMeasure::expectation(), SimpleRiskMeasure::entropic(1.0),
            SimpleRiskMeasure::expected_shortfall(0.5), SimpleRiskMeasure::mean_semideviation(0.5)};
}

}  // namespace varrisk
