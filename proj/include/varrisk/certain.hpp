#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "space.hpp"

namespace varrisk {

/// Aggregator phi : E -> R collapsing a joint position to a scalar.
///
/// Catalog members are monotone w.r.t. the positive orthant, convex and
/// onto R:
///   weighted_sum   phi(x) = <w, x>,                     w >= 0, w != 0
///   max_component  phi(x) = max_j x_j
///   shortfall      phi(x) = <w, x> + beta sum_j (x_j - k)_+
/// Custom evaluators are accepted but flagged unverified; all axiom checks
/// are sampling-based and report counterexamples, not proofs.
class CertainFunction {
public:
    enum class Kind { weighted_sum, max_component, shortfall, custom };

    static CertainFunction weighted_sum(std::vector<double> w) {
        validate_weights(w);
        CertainFunction phi;
        phi.kind_ = Kind::weighted_sum;
        phi.w_ = std::move(w);
        phi.label_ = "weighted_sum";
        return phi;
    }

    static CertainFunction max_component() {
        CertainFunction phi;
        phi.kind_ = Kind::max_component;
        phi.label_ = "max_component";
        return phi;
    }

    static CertainFunction shortfall(std::vector<double> w, double beta, double k) {
        validate_weights(w);
        if (!(beta >= 0.0) || !std::isfinite(beta))
            throw validation_error("shortfall.beta: must be >= 0");
        if (!std::isfinite(k)) throw validation_error("shortfall.k: must be finite");
        CertainFunction phi;
        phi.kind_ = Kind::shortfall;
        phi.w_ = std::move(w);
        phi.beta_ = beta;
        phi.k_ = k;
        phi.label_ = "shortfall";
        return phi;
    }

    static CertainFunction custom(std::function<double(std::span<const double>)> eval,
                                  std::string label = "custom") {
        if (!eval) throw validation_error("custom certain function: evaluator must be callable");
        CertainFunction phi;
        phi.kind_ = Kind::custom;
        phi.eval_ = std::move(eval);
        phi.label_ = std::move(label);
        return phi;
    }

    Kind kind() const { return kind_; }
    bool verified() const { return kind_ != Kind::custom; }
    const std::vector<double>& weights() const { return w_; }
    double beta() const { return beta_; }
    double threshold() const { return k_; }
    const std::string& label() const { return label_; }

    double operator()(std::span<const double> x) const {
        switch (kind_) {
            case Kind::weighted_sum:
                return detail::dot(w_, x);
            case Kind::max_component: {
                double m = x[0];
                for (double v : x) m = std::max(m, v);
                return m;
            }
            case Kind::shortfall: {
                double s = detail::dot(w_, x);
                for (double v : x) s += beta_ * std::max(v - k_, 0.0);
                return s;
            }
            case Kind::custom:
                return eval_(x);
        }
        return 0.0;  // unreachable
    }

private:
    static void validate_weights(const std::vector<double>& w) {
        if (w.empty()) throw validation_error("aggregator weights: must not be empty");
        double sum = 0.0;
        for (double v : w) {
            if (!std::isfinite(v) || v < 0.0)
                throw validation_error("aggregator weights: must be finite and >= 0");
            sum += v;
        }
        if (sum == 0.0) throw validation_error("aggregator weights: must not all be zero");
    }

    Kind kind_ = Kind::max_component;
    std::vector<double> w_;
    double beta_ = 0.0;
    double k_ = 0.0;
    std::function<double(std::span<const double>)> eval_;
    std::string label_;
};

inline double eval_certain(const CertainFunction& phi, std::span<const double> x) {
    if (x.empty()) throw dimension_mismatch("eval_certain: empty input");
    if ((phi.kind() == CertainFunction::Kind::weighted_sum ||
         phi.kind() == CertainFunction::Kind::shortfall) &&
        phi.weights().size() != x.size())
        throw dimension_mismatch("eval_certain: input dimension must match the weights");
    return phi(x);
}

/// Pointwise lift: X(omega_i) = phi(f(omega_i)).
inline RandomVariable apply_pointwise(const CertainFunction& phi, const RandomEconomy& f) {
    std::vector<double> out(f.atoms);
    for (std::size_t i = 0; i < f.atoms; ++i) out[i] = eval_certain(phi, f.row(i));
    return RandomVariable(std::move(out));
}

/// Scalar transfer along the reference direction: T(a) = phi(a z).
inline double transfer(const CertainFunction& phi, double a, const ConeOrder& order) {
    std::vector<double> x(order.z);
    for (auto& v : x) v *= a;
    return eval_certain(phi, x);
}

/// Inverse of the transfer by bracketing and bisection to absolute
/// tolerance `tol`. Requires T strictly increasing along z; a flat segment
/// around the solution raises not_invertible, a failed bracket search
/// raises bracketing_failure.
inline double invert_transfer(const CertainFunction& phi, double v, const ConeOrder& order,
                              double tol = 1e-10) {
    const auto T = [&](double a) { return transfer(phi, a, order); };

    double hi = 1.0;
    int it = 0;
    while (T(hi) < v) {
        hi *= 2.0;
        if (++it > 200)
            throw bracketing_failure("invert_transfer: no upper bracket within 200 doublings");
    }
    double lo = -1.0;
    it = 0;
    while (T(lo) > v) {
        lo *= 2.0;
        if (++it > 200)
            throw bracketing_failure("invert_transfer: no lower bracket within 200 doublings");
    }
    for (it = 0; it < 200 && (hi - lo) > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (T(mid) < v)
            lo = mid;
        else
            hi = mid;
    }
    const double a = 0.5 * (lo + hi);

    // A flat segment at the value v makes the inverse ambiguous: the
    // bisection lands on the segment's edge, so probe both sides for the
    // transfer continuing at v.
    const double delta = std::max(1e-5, 1e-5 * std::abs(a));
    const double eps = 1e-10 * std::max(1.0, std::abs(v));
    if (T(a + delta) <= v + eps || T(a - delta) >= v - eps)
        throw not_invertible("invert_transfer: transfer is flat around the requested value");
    return a;
}

/// Dominating-scalar envelope Z of an economy: on atoms with
/// phi(f(omega)) >= 0 the least a with f(omega) <=_K a z, elsewhere the
/// greatest a with a z <=_K f(omega). With Hz > 0 both optima are the
/// extreme ratios (Hf)_r / (Hz)_r, so per atom
///   phi(f) >= 0  =>  0 <= phi(f(omega)) <= T(Z(omega)),
///   phi(f) <  0  =>  T(Z(omega)) <= phi(f(omega)) < 0.
inline RandomVariable scalar_envelope(const RandomEconomy& f, const CertainFunction& phi,
                                      const ConeOrder& order) {
    if (f.dims != order.dim)
        throw dimension_mismatch("scalar_envelope: economy dims must match the cone");
    const std::size_t m = order.rows();
    if (m == 0) throw unbounded_envelope("scalar_envelope: cone has no halfspaces");
    std::vector<double> out(f.atoms);
    for (std::size_t i = 0; i < f.atoms; ++i) {
        const auto x = f.row(i);
        double lo = kInf, hi = -kInf;
        for (std::size_t r = 0; r < m; ++r) {
            const auto h = order.row(r);
            const double ratio = detail::dot(h, x) / detail::dot(h, order.z);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw unbounded_envelope("scalar_envelope: optimizing scalar set is unbounded");
        out[i] = (eval_certain(phi, x) >= 0.0) ? hi : lo;
    }
    return RandomVariable(std::move(out));
}

/// ||phi(f)||_p <= ||T(Z)||_p with Z = scalar_envelope(f), up to `slack`.
inline bool check_lemma_bound(const CertainFunction& phi, const RandomEconomy& f,
                              const Exponent& exp, const FiniteSpace& sp, const ConeOrder& order,
                              double slack = 1e-9) {
    const RandomVariable lifted = apply_pointwise(phi, f);
    const RandomVariable Z = scalar_envelope(f, phi, order);
    std::vector<double> tz(Z.size());
    for (std::size_t i = 0; i < Z.size(); ++i) tz[i] = transfer(phi, Z[i], order);
    const double lhs = lp_norm(lifted, exp.range_order, sp);
    const double rhs = lp_norm(RandomVariable(std::move(tz)), exp.range_order, sp);
    return lhs <= rhs + slack;
}

namespace detail {

inline std::vector<double> axpy(double a, std::span<const double> x, double b,
                                std::span<const double> y) {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = a * x[j] + b * y[j];
    return out;
}

/// Surjectivity probe along z: escalate M until T(M) >= target and
/// T(-M) <= -target. Returns the failing side's best value on failure.
inline std::optional<Witness> probe_surjectivity(const std::function<double(double)>& T,
                                                 double target) {
    double up = -kInf, down = kInf;
    for (double M = 1.0; M <= 0x1p80; M *= 2.0) {
        up = std::max(up, T(M));
        down = std::min(down, T(-M));
        if (up >= target && down <= -target) return std::nullopt;
    }
    Witness w;
    w.description = "range probe along z did not reach +/-" + std::to_string(target);
    w.values.push_back(witness_scalar("highest_value_reached", up));
    w.values.push_back(witness_scalar("lowest_value_reached", down));
    return w;
}

}  // namespace detail

/// Sampled verification of the aggregator axioms: monotonicity w.r.t. the
/// cone order, convexity, and surjectivity along the z ray. Trials run in
/// parallel with per-trial seeds; reports are schedule-independent.
inline AxiomReport check_certain_axioms(const CertainFunction& phi, const ConeOrder& order,
                                        long trials, std::uint64_t seed, double tol = 1e-9) {
    if (trials < 1) throw invalid_config("check_certain_axioms: trials must be >= 1");
    AxiomReport report;
    report.subject = phi.label();

    const std::size_t d = order.dim;
    const double scale = 10.0;

    std::vector<std::optional<Witness>> mono(trials), convex(trials);
    run_trials(trials, false, [&](long t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        {
            const std::vector<double> x = rng.normal_vector(d, scale);
            const std::vector<double> k = sample_cone_element(order, rng, scale);
            std::vector<double> y(d);
            for (std::size_t j = 0; j < d; ++j) y[j] = x[j] + k[j];
            const double fx = eval_certain(phi, x), fy = eval_certain(phi, y);
            if (!(fy >= fx - tol)) {
                Witness w;
                w.description = "x <=_K y but phi(x) > phi(y)";
                w.values.push_back(witness_vector("x", x));
                w.values.push_back(witness_vector("y", y));
                w.values.push_back(witness_scalar("phi_x", fx));
                w.values.push_back(witness_scalar("phi_y", fy));
                mono[t] = std::move(w);
            }
        }
        {
            const std::vector<double> x = rng.normal_vector(d, scale);
            const std::vector<double> y = rng.normal_vector(d, scale);
            const double lam = rng.uniform();
            const std::vector<double> mix = detail::axpy(lam, x, 1.0 - lam, y);
            const double lhs = eval_certain(phi, mix);
            const double rhs = lam * eval_certain(phi, x) + (1.0 - lam) * eval_certain(phi, y);
            if (!(lhs <= rhs + tol)) {
                Witness w;
                w.description = "phi(lam x + (1-lam) y) exceeds the chord";
                w.values.push_back(witness_vector("x", x));
                w.values.push_back(witness_vector("y", y));
                w.values.push_back(witness_scalar("lambda", lam));
                w.values.push_back(witness_scalar("phi_mix", lhs));
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

    AxiomCheck a1{"monotonicity", true, trials, std::nullopt};
    if (auto w = first_failure(mono)) {
        a1.passed = false;
        a1.witness = std::move(w);
    }
    AxiomCheck a2{"convexity", true, trials, std::nullopt};
    if (auto w = first_failure(convex)) {
        a2.passed = false;
        a2.witness = std::move(w);
    }
    AxiomCheck a3{"surjectivity", true, 1, std::nullopt};
    if (auto w = detail::probe_surjectivity([&](double a) { return transfer(phi, a, order); }, 1e6)) {
        a3.passed = false;
        a3.witness = std::move(w);
    }

    report.checks = {std::move(a1), std::move(a2), std::move(a3)};
    return report;
}

/// The three catalog aggregators in dimension d, with unit weights.
inline std::vector<CertainFunction> catalog_certain(std::size_t d) {
    return {CertainFunction::weighted_sum(std::vector<double>(d, 1.0)),
            CertainFunction::max_component(),
            CertainFunction::shortfall(std::vector<double>(d, 1.0), 1.0, 0.0)};
}

}  // namespace varrisk
