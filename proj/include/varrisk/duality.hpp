#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "certain.hpp"
#include "errors.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "simple_risk.hpp"
#include "space.hpp"
#include "systemic.hpp"

namespace varrisk {

/// A point of the simple acceptance set: capital c covering position X.
struct SimpleAcceptancePoint {
    double c = 0.0;
    RandomVariable X;
};

/// A point of the certain acceptance set: scalar cover Y dominating the
/// aggregated economy pointwise.
struct CertainAcceptancePoint {
    RandomVariable Y;
    RandomEconomy f;
};

inline bool acceptance_contains_simple(const SimpleAcceptancePoint& pt,
                                       const SimpleRiskMeasure& rho_s, const FiniteSpace& sp,
                                       double tol = 1e-12) {
    return eval_simple(rho_s, pt.X, sp) <= pt.c + tol;
}

inline bool acceptance_contains_certain(const CertainAcceptancePoint& pt,
                                        const CertainFunction& phi, const FiniteSpace& sp,
                                        double tol = 1e-12) {
    if (pt.Y.size() != pt.f.atoms || pt.f.atoms != sp.size())
        throw dimension_mismatch("acceptance_contains_certain: shapes must agree with the space");
    for (std::size_t i = 0; i < pt.f.atoms; ++i)
        if (!(eval_certain(phi, pt.f.row(i)) <= pt.Y[i] + tol)) return false;
    return true;
}

/// Sampled structure checks on both acceptance sets: convexity, closedness
/// under lowering the position coordinate (f-monotonicity), and under
/// raising the cover coordinate (b-monotonicity).
inline AxiomReport check_acceptance_properties(const CertainFunction& phi,
                                               const SimpleRiskMeasure& rho_s,
                                               const FiniteSpace& sp, const ConeOrder& order,
                                               long trials, std::uint64_t seed, double tol = 1e-9) {
    if (trials < 1) throw invalid_config("check_acceptance_properties: trials must be >= 1");
    AxiomReport report;
    report.subject = rho_s.label() + " / " + phi.label();

    const std::size_t n = sp.size();
    const std::size_t d = order.dim;
    const double scale = 10.0;

    enum { kSimpleConvex, kSimpleF, kSimpleB, kCertainConvex, kCertainF, kCertainB, kChecks };
    std::vector<std::vector<std::optional<Witness>>> fails(
        kChecks, std::vector<std::optional<Witness>>(trials));

    auto sample_simple_member = [&](Rng& rng) {
        RandomVariable X(rng.normal_vector(n, scale));
        const double slack = rng.uniform() < 0.5 ? 0.0 : std::abs(rng.normal(scale));
        return SimpleAcceptancePoint{eval_simple(rho_s, X, sp) + slack, std::move(X)};
    };
    auto sample_certain_member = [&](Rng& rng) {
        RandomEconomy g(n, d, rng.normal_vector(n * d, scale));
        RandomVariable Y = apply_pointwise(phi, g);
        for (std::size_t i = 0; i < n; ++i)
            if (rng.uniform() < 0.5) Y[i] += std::abs(rng.normal(scale));
        return CertainAcceptancePoint{std::move(Y), std::move(g)};
    };

    run_trials(trials, false, [&](long t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));

        {  // simple set: convex mixtures stay acceptable
            const auto p1 = sample_simple_member(rng);
            const auto p2 = sample_simple_member(rng);
            const double lam = rng.uniform();
            std::vector<double> mix(n);
            for (std::size_t i = 0; i < n; ++i)
                mix[i] = lam * p1.X[i] + (1.0 - lam) * p2.X[i];
            const double c_mix = lam * p1.c + (1.0 - lam) * p2.c;
            const double r = eval_simple(rho_s, RandomVariable(mix), sp);
            if (!(r <= c_mix + tol)) {
                Witness w;
                w.description = "mixture of acceptable (c, X) pairs left the simple acceptance set";
                w.values.push_back(witness_vector("X1", p1.X.values));
                w.values.push_back(witness_scalar("c1", p1.c));
                w.values.push_back(witness_vector("X2", p2.X.values));
                w.values.push_back(witness_scalar("c2", p2.c));
                w.values.push_back(witness_scalar("lambda", lam));
                w.values.push_back(witness_scalar("rho_mix", r));
                fails[kSimpleConvex][t] = std::move(w);
            }
        }
        {  // simple set: f-monotonicity (lower the position)
            const auto p = sample_simple_member(rng);
            std::vector<double> lower(n);
            for (std::size_t i = 0; i < n; ++i) lower[i] = p.X[i] - std::abs(rng.normal(scale));
            const double r = eval_simple(rho_s, RandomVariable(lower), sp);
            if (!(r <= p.c + tol)) {
                Witness w;
                w.description = "lowering the position broke simple acceptance";
                w.values.push_back(witness_vector("X", p.X.values));
                w.values.push_back(witness_vector("X_lower", lower));
                w.values.push_back(witness_scalar("c", p.c));
                fails[kSimpleF][t] = std::move(w);
            }
        }
        {  // simple set: b-monotonicity (raise the capital, incl. the reflexive raise)
            const auto p = sample_simple_member(rng);
            const double raise = rng.uniform() < 0.5 ? 0.0 : std::abs(rng.normal(scale));
            if (!acceptance_contains_simple({p.c + raise, p.X}, rho_s, sp)) {
                Witness w;
                w.description = "raising the capital broke simple acceptance";
                w.values.push_back(witness_vector("X", p.X.values));
                w.values.push_back(witness_scalar("c", p.c));
                w.values.push_back(witness_scalar("raise", raise));
                fails[kSimpleB][t] = std::move(w);
            }
        }
        {  // certain set: convex mixtures stay acceptable
            const auto p1 = sample_certain_member(rng);
            const auto p2 = sample_certain_member(rng);
            const double lam = rng.uniform();
            RandomEconomy g(n, d);
            for (std::size_t i = 0; i < n * d; ++i)
                g.data[i] = lam * p1.f.data[i] + (1.0 - lam) * p2.f.data[i];
            bool ok = true;
            std::size_t bad = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double cover = lam * p1.Y[i] + (1.0 - lam) * p2.Y[i];
                if (!(eval_certain(phi, g.row(i)) <= cover + tol)) {
                    ok = false;
                    bad = i;
                    break;
                }
            }
            if (!ok) {
                Witness w;
                w.description = "mixture of acceptable (Y, f) pairs left the certain acceptance set";
                w.values.push_back(witness_matrix("f1", n, d, p1.f.data));
                w.values.push_back(witness_vector("Y1", p1.Y.values));
                w.values.push_back(witness_matrix("f2", n, d, p2.f.data));
                w.values.push_back(witness_vector("Y2", p2.Y.values));
                w.values.push_back(witness_scalar("lambda", lam));
                w.values.push_back(witness_scalar("violating_atom", static_cast<double>(bad)));
                fails[kCertainConvex][t] = std::move(w);
            }
        }
        {  // certain set: f-monotonicity (lower the economy in the cone order)
            const auto p = sample_certain_member(rng);
            RandomEconomy lower = p.f;
            for (std::size_t i = 0; i < n; ++i) {
                const std::vector<double> k = sample_cone_element(order, rng, scale);
                for (std::size_t j = 0; j < d; ++j) lower(i, j) -= k[j];
            }
            if (!acceptance_contains_certain({p.Y, lower}, phi, sp, tol)) {
                Witness w;
                w.description = "lowering the economy in the cone order broke certain acceptance";
                w.values.push_back(witness_matrix("f", n, d, p.f.data));
                w.values.push_back(witness_matrix("f_lower", n, d, lower.data));
                w.values.push_back(witness_vector("Y", p.Y.values));
                fails[kCertainF][t] = std::move(w);
            }
        }
        {  // certain set: b-monotonicity (raise the cover)
            const auto p = sample_certain_member(rng);
            RandomVariable raised = p.Y;
            for (std::size_t i = 0; i < n; ++i)
                if (rng.uniform() < 0.5) raised[i] += std::abs(rng.normal(scale));
            if (!acceptance_contains_certain({raised, p.f}, phi, sp)) {
                Witness w;
                w.description = "raising the cover broke certain acceptance";
                w.values.push_back(witness_matrix("f", n, d, p.f.data));
                w.values.push_back(witness_vector("Y", p.Y.values));
                w.values.push_back(witness_vector("Y_raised", raised.values));
                fails[kCertainB][t] = std::move(w);
            }
        }
    });

    const char* ids[kChecks] = {"simple_set_convexity",  "simple_set_f_monotonicity",
                                "simple_set_b_monotonicity", "certain_set_convexity",
                                "certain_set_f_monotonicity", "certain_set_b_monotonicity"};
    for (int c = 0; c < kChecks; ++c) {
        AxiomCheck check{ids[c], true, trials, std::nullopt};
        for (auto& s : fails[c])
            if (s) {
                check.passed = false;
                check.witness = std::move(s);
                break;
            }
        report.checks.push_back(std::move(check));
    }
    return report;
}

/// Composition value through the acceptance sets: the least capital c such
/// that (c, X) is simply acceptable and (X, f) certainly acceptable. The
/// infimum is attained at X* = phi(f), c* = rho_s(X*); the routine asserts
/// feasibility of that pair and, over `verify_samples` rejection-sampled
/// feasible points, that none undercuts c* by more than 1e-9.
inline double primal_value(const RandomEconomy& f, const CertainFunction& phi,
                           const SimpleRiskMeasure& rho_s, const FiniteSpace& sp,
                           long verify_samples = 64, std::uint64_t seed = 0x5eed) {
    const RandomVariable X_star = apply_pointwise(phi, f);
    const double c_star = eval_simple(rho_s, X_star, sp);

    if (!acceptance_contains_simple({c_star, X_star}, rho_s, sp))
        throw internal_check_failure("primal_value: (c*, X*) must be simply acceptable");
    if (!acceptance_contains_certain({X_star, f}, phi, sp))
        throw internal_check_failure("primal_value: (X*, f) must be certainly acceptable");

    Rng rng(seed);
    const std::size_t n = sp.size();
    for (long s = 0; s < verify_samples; ++s) {
        std::vector<double> xv(n);
        for (std::size_t i = 0; i < n; ++i) xv[i] = X_star[i] + std::abs(rng.normal(5.0));
        const RandomVariable X(xv);
        const double c = eval_simple(rho_s, X, sp) + std::abs(rng.normal(5.0));
        if (c < c_star - 1e-9)
            throw internal_check_failure("primal_value: feasible sample undercut the infimum");
    }
    return c_star;
}

/// Dual element: a density-like Yhat on scenario scalars, a matrix fhat
/// pairing with economies, and the penalty value attached to the pair.
struct DualPair {
    RandomVariable Yhat;
    RandomEconomy fhat;
    double alpha_value = kInf;
};

/// Sampled penalty evaluation. The pool holds boundary members of both
/// acceptance sets; the penalty objective is separable across the two
/// sets, so each candidate pair scans the pool once.
struct PenaltyPool {
    std::vector<std::pair<double, RandomVariable>> simple_pts;    // (c, X) acceptable
    std::vector<std::pair<RandomVariable, RandomEconomy>> certain_pts;  // (Y, g) acceptable
};

struct PenaltySample {
    double value = -kInf;
    bool unbounded = false;  // sampled value crossed the divergence threshold
};

/// Boundary members of both sets: `budget` random points each, escalating
/// ray probes (so genuinely divergent penalties cross the unbounded
/// threshold at any budget), and the canonical anchors
/// (rho_s(phi(f)), phi(f)) and (phi(f), f) of every anchor economy.
/// Anchors make the sampled penalty a certified lower bound at the anchor:
/// <fhat, f> - alpha_sampled <= rho(f) for every anchored f.
inline PenaltyPool make_penalty_pool(const CertainFunction& phi, const SimpleRiskMeasure& rho_s,
                                     std::span<const RandomEconomy> anchors, long budget,
                                     const FiniteSpace& sp, std::size_t dims, std::uint64_t seed) {
    if (budget < 1) throw invalid_config("make_penalty_pool: budget must be >= 1");
    const std::size_t n = sp.size();
    PenaltyPool pool;
    pool.simple_pts.reserve(budget + 32 + anchors.size());
    pool.certain_pts.reserve(budget + 32 + anchors.size());

    Rng rng(seed);
    for (long s = 0; s < budget; ++s) {
        RandomVariable X(rng.normal_vector(n, 10.0));
        const double c = eval_simple(rho_s, X, sp);
        pool.simple_pts.emplace_back(c, std::move(X));

        RandomEconomy g(n, dims, rng.normal_vector(n * dims, 10.0));
        RandomVariable Y = apply_pointwise(phi, g);
        pool.certain_pts.emplace_back(std::move(Y), std::move(g));
    }
    for (double M = 1.0; M <= 1e7; M *= 10.0) {
        for (double sign : {1.0, -1.0}) {
            RandomVariable X = RandomVariable::constant(n, sign * M);
            pool.simple_pts.emplace_back(eval_simple(rho_s, X, sp), std::move(X));

            RandomEconomy g(n, dims, std::vector<double>(n * dims, sign * M));
            RandomVariable Y = apply_pointwise(phi, g);
            pool.certain_pts.emplace_back(std::move(Y), std::move(g));
        }
    }
    for (const auto& f : anchors) {
        RandomVariable X = apply_pointwise(phi, f);
        pool.simple_pts.emplace_back(eval_simple(rho_s, X, sp), X);
        pool.certain_pts.emplace_back(std::move(X), f);
    }
    return pool;
}

inline PenaltySample penalty_alpha_over_pool(const RandomVariable& Yhat, const RandomEconomy& fhat,
                                             const PenaltyPool& pool, const FiniteSpace& sp,
                                             double unbounded_threshold = 1e6) {
    double best_simple = -kInf;
    for (const auto& [c, X] : pool.simple_pts)
        best_simple = std::max(best_simple, -c + scalar_pairing(Yhat, X, sp));
    double best_certain = -kInf;
    for (const auto& [Y, g] : pool.certain_pts)
        best_certain = std::max(best_certain, -scalar_pairing(Yhat, Y, sp) + dual_pairing(fhat, g, sp));
    PenaltySample out;
    out.value = best_simple + best_certain;
    out.unbounded = out.value > unbounded_threshold;
    return out;
}

/// Lower bound on the penalty alpha(Yhat, fhat) by sampling boundary
/// members of both acceptance sets, with the anchor economies' canonical
/// points always included.
inline PenaltySample penalty_alpha_sampled(const RandomVariable& Yhat, const RandomEconomy& fhat,
                                           const CertainFunction& phi,
                                           const SimpleRiskMeasure& rho_s,
                                           std::span<const RandomEconomy> anchors, long budget,
                                           const FiniteSpace& sp, std::uint64_t seed,
                                           double unbounded_threshold = 1e6) {
    const PenaltyPool pool = make_penalty_pool(phi, rho_s, anchors, budget, sp, fhat.dims, seed);
    return penalty_alpha_over_pool(Yhat, fhat, pool, sp, unbounded_threshold);
}

/// Closed-form penalty for linear aggregators. The certain-set part of the
/// supremum vanishes exactly when fhat(omega) = Yhat(omega) w on every atom
/// and diverges otherwise; what remains is the simple measure's conjugate.
inline double penalty_alpha_exact(const RandomVariable& Yhat, const RandomEconomy& fhat,
                                  const CertainFunction& phi, const SimpleRiskMeasure& rho_s,
                                  const FiniteSpace& sp, double feas_tol = 1e-9) {
    if (phi.kind() != CertainFunction::Kind::weighted_sum)
        throw unsupported_instance("penalty_alpha_exact: requires a weighted_sum aggregator");
    if (rho_s.kind() != SimpleRiskMeasure::Kind::expectation &&
        rho_s.kind() != SimpleRiskMeasure::Kind::expected_shortfall &&
        rho_s.kind() != SimpleRiskMeasure::Kind::entropic)
        throw unsupported_instance(
            "penalty_alpha_exact: requires expectation, expected_shortfall, or entropic");
    if (fhat.atoms != sp.size() || Yhat.size() != sp.size() ||
        fhat.dims != phi.weights().size())
        throw dimension_mismatch("penalty_alpha_exact: shapes must agree");

    const auto& w = phi.weights();
    for (std::size_t i = 0; i < fhat.atoms; ++i)
        for (std::size_t j = 0; j < fhat.dims; ++j)
            if (std::abs(fhat(i, j) - Yhat[i] * w[j]) > feas_tol * std::max(1.0, std::abs(Yhat[i])))
                return kInf;
    return analytic_conjugate(rho_s).value(Yhat, sp, feas_tol);
}

/// The attaining dual pair for linear aggregators: Yhat* from the simple
/// measure's subdifferential at phi(f), fhat*(omega) = Yhat*(omega) w.
inline DualPair exact_maximizer(const RandomEconomy& f, const CertainFunction& phi,
                                const SimpleRiskMeasure& rho_s, const FiniteSpace& sp) {
    if (phi.kind() != CertainFunction::Kind::weighted_sum)
        throw unsupported_instance("exact_maximizer: requires a weighted_sum aggregator");
    const RandomVariable X = apply_pointwise(phi, f);
    RandomVariable Yhat = conjugate_maximizer(rho_s, X, sp);
    const auto& w = phi.weights();
    RandomEconomy fhat(f.atoms, f.dims);
    for (std::size_t i = 0; i < f.atoms; ++i)
        for (std::size_t j = 0; j < f.dims; ++j) fhat(i, j) = Yhat[i] * w[j];
    return DualPair{std::move(Yhat), std::move(fhat), kInf};
}

enum class DualMethod { exact, sampled };

struct DualityReport {
    double primal = 0.0;
    double dual = -kInf;
    double gap = kInf;  // primal - dual; >= -1e-8 always (weak duality)
    DualPair maximizer;
    std::string method;
    bool unbounded_candidates = false;
};

/// Best lower bound over the candidate pairs, checked against the primal.
///
/// sampled: every candidate's penalty is sampled over a shared pool with f
/// among the anchors, so each value is a certified lower bound on rho(f)
/// and weak duality must hold up to 1e-8 (violations throw — they signal
/// an implementation bug, never a model property).
///
/// exact: restricted to linear aggregators with expectation, shortfall, or
/// entropic measures; the constructed maximizer joins the candidates and
/// the gap is asserted to close within 1e-6.
inline DualityReport dual_value(const RandomEconomy& f, std::span<const DualPair> candidates,
                                const CertainFunction& phi, const SimpleRiskMeasure& rho_s,
                                const FiniteSpace& sp, DualMethod method, long budget = 10000,
                                std::uint64_t seed = 0x5eed) {
    if (candidates.empty() && method == DualMethod::sampled)
        throw invalid_config("dual_value: candidate list must not be empty");

    DualityReport report;
    report.primal = primal_value(f, phi, rho_s, sp);
    report.method = method == DualMethod::exact ? "exact" : "sampled";

    auto consider = [&](const RandomVariable& Yhat, const RandomEconomy& fhat, double alpha) {
        const double value = std::isinf(alpha) ? -kInf : dual_pairing(fhat, f, sp) - alpha;
        if (value > report.dual) {
            report.dual = value;
            report.maximizer = DualPair{Yhat, fhat, alpha};
        }
    };

    if (method == DualMethod::exact) {
        const DualPair star = exact_maximizer(f, phi, rho_s, sp);
        consider(star.Yhat, star.fhat, penalty_alpha_exact(star.Yhat, star.fhat, phi, rho_s, sp));
        for (const auto& cand : candidates)
            consider(cand.Yhat, cand.fhat, penalty_alpha_exact(cand.Yhat, cand.fhat, phi, rho_s, sp));
    } else {
        const std::vector<RandomEconomy> anchors{f};
        const PenaltyPool pool = make_penalty_pool(phi, rho_s, anchors, budget, sp, f.dims, seed);
        for (const auto& cand : candidates) {
            const PenaltySample alpha = penalty_alpha_over_pool(cand.Yhat, cand.fhat, pool, sp);
            report.unbounded_candidates = report.unbounded_candidates || alpha.unbounded;
            consider(cand.Yhat, cand.fhat, alpha.value);
        }
    }

    report.gap = report.primal - report.dual;
    if (report.gap < -1e-8)
        throw weak_duality_violation("dual_value: dual exceeded primal by " +
                                     std::to_string(-report.gap));
    if (method == DualMethod::exact && !(report.gap <= 1e-6))
        throw internal_check_failure("dual_value: exact instance left a gap of " +
                                     std::to_string(report.gap));
    return report;
}

/// Gradient surrogate of an aggregator at x (a subgradient for the catalog,
/// central differences for custom evaluators).
inline std::vector<double> gradient_surrogate(const CertainFunction& phi,
                                              std::span<const double> x) {
    const std::size_t d = x.size();
    std::vector<double> g(d, 0.0);
    switch (phi.kind()) {
        case CertainFunction::Kind::weighted_sum:
            g = phi.weights();
            break;
        case CertainFunction::Kind::max_component: {
            std::size_t arg = 0;
            for (std::size_t j = 1; j < d; ++j)
                if (x[j] > x[arg]) arg = j;
            g[arg] = 1.0;
            break;
        }
        case CertainFunction::Kind::shortfall: {
            g = phi.weights();
            for (std::size_t j = 0; j < d; ++j)
                if (x[j] > phi.threshold()) g[j] += phi.beta();
            break;
        }
        case CertainFunction::Kind::custom: {
            std::vector<double> hi(x.begin(), x.end()), lo(x.begin(), x.end());
            const double h = 1e-5;
            for (std::size_t j = 0; j < d; ++j) {
                hi[j] += h;
                lo[j] -= h;
                g[j] = (phi(hi) - phi(lo)) / (2.0 * h);
                hi[j] = x[j];
                lo[j] = x[j];
            }
            break;
        }
    }
    return g;
}

/// A seeded cloud of dual candidates around an anchor economy: densities
/// feasible for the simple measure's dual set where that set is known,
/// paired with fhat(omega) = Yhat(omega) * (gradient surrogate of phi).
/// Infeasible strays are harmless - their penalty absorbs them.
inline std::vector<DualPair> make_candidate_cloud(const CertainFunction& phi,
                                                  const SimpleRiskMeasure& rho_s,
                                                  const RandomEconomy& f, std::size_t count,
                                                  const FiniteSpace& sp, std::uint64_t seed) {
    const std::size_t n = sp.size();
    const std::size_t d = f.dims;
    std::vector<DualPair> cloud;
    cloud.reserve(count);
    Rng rng(seed);

    auto density = [&](Rng& r) {
        std::vector<double> y(n);
        switch (rho_s.kind()) {
            case SimpleRiskMeasure::Kind::mean_semideviation: {
                std::vector<double> h(n);
                double hbar = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    h[i] = r.uniform();
                    hbar += sp.probs[i] * h[i];
                }
                for (std::size_t i = 0; i < n; ++i)
                    y[i] = 1.0 + rho_s.param() * (h[i] - hbar);
                break;
            }
            case SimpleRiskMeasure::Kind::expected_shortfall: {
                const double cap = 1.0 / (1.0 - rho_s.param());
                for (std::size_t i = 0; i < n; ++i) y[i] = r.uniform(0.0, cap);
                for (int pass = 0; pass < 50; ++pass) {
                    double mean = 0.0;
                    for (std::size_t i = 0; i < n; ++i) mean += sp.probs[i] * y[i];
                    if (mean <= 0.0) break;
                    for (auto& v : y) v = std::min(v / mean, cap);
                }
                break;
            }
            default: {  // any nonnegative density
                double mean = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    y[i] = std::abs(r.normal()) + 1e-3;
                    mean += sp.probs[i] * y[i];
                }
                for (auto& v : y) v /= mean;
                break;
            }
        }
        return y;
    };

    for (std::size_t c = 0; c < count; ++c) {
        std::vector<double> y = c == 0 ? std::vector<double>(n, 1.0) : density(rng);
        RandomEconomy fhat(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<double> g = gradient_surrogate(phi, f.row(i));
            for (std::size_t j = 0; j < d; ++j) fhat(i, j) = y[i] * g[j];
        }
        cloud.push_back(DualPair{RandomVariable(std::move(y)), std::move(fhat), kInf});
    }
    return cloud;
}

}  // namespace varrisk
