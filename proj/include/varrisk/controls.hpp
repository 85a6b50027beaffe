#pragma once

#include <cmath>
#include <vector>

#include "certain.hpp"
#include "simple_risk.hpp"
#include "systemic.hpp"

namespace varrisk {
namespace controls {

// Known-invalid reference instances. Each violates exactly the property its
// name points at; the harnesses must reject it with a counterexample. They
// exist to validate the checking machinery, not for production use.

/// rho(X) = E[X^2]: monotone-ish and convex but not constant on constants
/// (rho(2) = 4).
inline SimpleRiskMeasure second_moment_measure() {
    return SimpleRiskMeasure::custom(
        [](const RandomVariable& X, const FiniteSpace& sp) {
            double acc = 0.0;
            for (std::size_t i = 0; i < X.size(); ++i)
                acc += sp.probs[i] * X.values[i] * X.values[i];
            return acc;
        },
        "second_moment");
}

/// rho(f) = E[max(f)^2]: squares the aggregated position before averaging.
/// Preference consistency holds (pointwise dominated squares average in
/// order) but convexity fails wherever the square decreases.
inline SystemicRiskMeasure squared_aggregate_measure() {
    const CertainFunction phi = CertainFunction::max_component();
    return SystemicRiskMeasure::blackbox(
        [phi](const RandomEconomy& f, const FiniteSpace& sp) {
            double acc = 0.0;
            for (std::size_t i = 0; i < f.atoms; ++i) {
                const double v = phi(f.row(i));
                acc += sp.probs[i] * v * v;
            }
            return acc;
        },
        [phi](std::span<const double> x) {
            const double v = phi(x);
            return v * v;
        },
        "squared_aggregate");
}

/// phi(x) = min_j x_j: monotone and onto R but concave, so the convexity
/// check must produce a witness mixture.
inline CertainFunction min_component_aggregator() {
    return CertainFunction::custom(
        [](std::span<const double> x) {
            double m = x[0];
            for (double v : x) m = std::min(m, v);
            return m;
        },
        "min_component");
}

/// The constant measure: fails surjectivity (its range is a point).
inline SystemicRiskMeasure constant_zero_measure() {
    return SystemicRiskMeasure::blackbox(
        [](const RandomEconomy&, const FiniteSpace&) { return 0.0; },
        [](std::span<const double>) { return 0.0; }, "constant_zero");
}

/// rho(f) = E[f_1 + f_2] + (E[f_1] - E[f_2])^2 on two institutions. Its
/// restriction x_1 + x_2 + (x_1 - x_2)^2 is increasing along the ones ray,
/// so the extraction machinery runs, but the value sees the cross-section
/// dispersion that no pointwise restriction carries: recomposition misses
/// it by Var(f_1 - f_2) and preference consistency fails.
inline SystemicRiskMeasure dispersion_penalized_sum() {
    return SystemicRiskMeasure::blackbox(
        [](const RandomEconomy& f, const FiniteSpace& sp) {
            double mean_sum = 0.0, mean_diff = 0.0;
            for (std::size_t i = 0; i < f.atoms; ++i) {
                mean_sum += sp.probs[i] * (f(i, 0) + f(i, 1));
                mean_diff += sp.probs[i] * (f(i, 0) - f(i, 1));
            }
            return mean_sum + mean_diff * mean_diff;
        },
        [](std::span<const double> x) {
            const double diff = x[0] - x[1];
            return x[0] + x[1] + diff * diff;
        },
        "dispersion_penalized_sum");
}

/// rho(f) = max_i u_i phi(f(omega_i)) with a sign-flipped scenario weight
/// u = (+1, -1, +1, ...): the value depends on which scenario carries which
/// position in a way no pointwise comparison controls, so preference
/// consistency fails. Its restriction |phi(x)| is not invertible along the
/// ray, which also makes the extraction machinery refuse it.
inline SystemicRiskMeasure sign_weighted_max_measure(std::size_t n) {
    if (n < 2) throw invalid_config("sign_weighted_max_measure: needs at least two atoms");
    const CertainFunction phi = CertainFunction::max_component();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = (i % 2 == 0) ? 1.0 : -1.0;
    return SystemicRiskMeasure::blackbox(
        [phi, u](const RandomEconomy& f, const FiniteSpace&) {
            double best = -kInf;
            for (std::size_t i = 0; i < f.atoms; ++i)
                best = std::max(best, u[i % u.size()] * phi(f.row(i)));
            return best;
        },
        [phi](std::span<const double> x) {
            // constant embedding: max_i u_i phi(x) with u containing +1 and -1
            return std::abs(phi(x));
        },
        "sign_weighted_max");
}

}  // namespace controls
}  // namespace varrisk
