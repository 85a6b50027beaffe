#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace varrisk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline void require_finite(std::span<const double> xs, const char* what) {
    for (double x : xs)
        if (!std::isfinite(x))
            throw validation_error(std::string(what) + ": entries must be finite");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double euclidean(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

}  // namespace detail

/// Discrete probability space with full support; every atom carries strictly
/// positive mass, so essential suprema reduce to maxima.
struct FiniteSpace {
    std::vector<double> probs;

    FiniteSpace() = default;

    explicit FiniteSpace(std::vector<double> p) : probs(std::move(p)) {
        if (probs.empty()) throw validation_error("space.probs: must not be empty");
        double sum = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (!std::isfinite(probs[i]) || probs[i] <= 0.0)
                throw non_positive_probability("space.probs[" + std::to_string(i) +
                                               "]: probabilities must be strictly positive");
            sum += probs[i];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw probabilities_do_not_sum_to_one("space.probs: sum is " + std::to_string(sum) +
                                                  ", must be 1 within 1e-12");
    }

    std::size_t size() const { return probs.size(); }
};

inline FiniteSpace make_space(std::vector<double> probs) { return FiniteSpace(std::move(probs)); }

inline FiniteSpace uniform_space(std::size_t n) {
    return FiniteSpace(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

/// Polyhedral cone order on E = R^d: K = { x : Hx >= 0 componentwise },
/// together with a reference direction z in the interior of K (Hz > 0
/// strictly), so a |-> phi(a z) is increasing for monotone phi.
struct ConeOrder {
    std::size_t dim = 0;
    std::vector<double> halfspaces;  // m x dim, row-major
    std::vector<double> z;

    ConeOrder() = default;

    ConeOrder(std::size_t d, std::vector<double> H, std::vector<double> zref)
        : dim(d), halfspaces(std::move(H)), z(std::move(zref)) {
        if (dim == 0) throw validation_error("cone.dim: must be at least 1");
        if (halfspaces.empty() || halfspaces.size() % dim != 0)
            throw validation_error("cone.halfspaces: need m x dim entries, m >= 1");
        if (z.size() != dim) throw validation_error("cone.z: length must equal dim");
        detail::require_finite(halfspaces, "cone.halfspaces");
        detail::require_finite(z, "cone.z");
        const std::size_t m = rows();
        for (std::size_t r = 0; r < m; ++r) {
            double norm = 0.0, hz = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                norm += std::abs(halfspaces[r * dim + j]);
                hz += halfspaces[r * dim + j] * z[j];
            }
            if (norm == 0.0)
                throw validation_error("cone.halfspaces: row " + std::to_string(r) + " is zero");
            if (!(hz > 0.0))
                throw validation_error("cone.z: must satisfy Hz > 0 strictly (row " +
                                       std::to_string(r) + ")");
        }
    }

    static ConeOrder orthant(std::size_t d) {
        std::vector<double> H(d * d, 0.0);
        for (std::size_t j = 0; j < d; ++j) H[j * d + j] = 1.0;
        return ConeOrder(d, std::move(H), std::vector<double>(d, 1.0));
    }

    std::size_t rows() const { return dim == 0 ? 0 : halfspaces.size() / dim; }

    std::span<const double> row(std::size_t r) const {
        return {halfspaces.data() + r * dim, dim};
    }
};

/// x <=_K y, i.e. H(y - x) >= -tol componentwise.
inline bool cone_leq(std::span<const double> x, std::span<const double> y, const ConeOrder& order,
                     double tol = 1e-12) {
    if (x.size() != order.dim || y.size() != order.dim)
        throw dimension_mismatch("cone_leq: vectors must have the cone's dimension");
    const std::size_t m = order.rows();
    for (std::size_t r = 0; r < m; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < order.dim; ++j)
            s += order.halfspaces[r * order.dim + j] * (y[j] - x[j]);
        if (s < -tol) return false;
    }
    return true;
}

/// A random element of K: rejection-sampled from a scaled normal with a
/// fallback onto the ray through z (which always lies in K).
inline std::vector<double> sample_cone_element(const ConeOrder& order, Rng& rng, double scale) {
    if (rng.uniform() < 0.25) {
        std::vector<double> k(order.z);
        const double a = std::abs(rng.normal(scale));
        for (auto& v : k) v *= a;
        return k;
    }
    const std::vector<double> zero(order.dim, 0.0);
    for (int attempt = 0; attempt < 50; ++attempt) {
        std::vector<double> k = rng.normal_vector(order.dim, scale);
        if (cone_leq(zero, k, order, 0.0)) return k;
    }
    std::vector<double> k(order.z);
    const double a = std::abs(rng.normal(scale));
    for (auto& v : k) v *= a;
    return k;
}

/// Per-atom integrability exponent p(omega) in [1, +inf], plus the fixed
/// order of the range space L^p.
struct Exponent {
    std::vector<double> values;
    double range_order = 2.0;

    Exponent() = default;

    Exponent(std::vector<double> vals, double range) : values(std::move(vals)), range_order(range) {
        if (values.empty()) throw validation_error("exponent.values: must not be empty");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (std::isnan(values[i]) || values[i] < 1.0)
                throw validation_error("exponent.values[" + std::to_string(i) +
                                       "]: must be >= 1 (p < 1 is not a norm exponent)");
        if (std::isnan(range_order) || range_order < 1.0)
            throw validation_error("exponent.range_order: must be >= 1");
    }

    static Exponent constant(std::size_t n, double p, double range) {
        return Exponent(std::vector<double>(n, p), range);
    }

    bool all_finite() const {
        for (double p : values)
            if (std::isinf(p)) return false;
        return true;
    }
};

/// Scenario-indexed scalar position, an element of L^p.
struct RandomVariable {
    std::vector<double> values;

    RandomVariable() = default;

    explicit RandomVariable(std::vector<double> v) : values(std::move(v)) {
        if (values.empty()) throw validation_error("random variable: must not be empty");
        detail::require_finite(values, "random variable");
    }

    static RandomVariable constant(std::size_t n, double a) {
        return RandomVariable(std::vector<double>(n, a));
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

/// Scenario-indexed positions of d institutions: row i is the economy in
/// state i, an element of L^{p(.)}.
struct RandomEconomy {
    std::size_t atoms = 0;
    std::size_t dims = 0;
    std::vector<double> data;  // atoms x dims, row-major

    RandomEconomy() = default;

    RandomEconomy(std::size_t n, std::size_t d) : atoms(n), dims(d), data(n * d, 0.0) {
        if (n == 0 || d == 0) throw validation_error("economy: needs at least one atom and one dim");
    }

    RandomEconomy(std::size_t n, std::size_t d, std::vector<double> vals)
        : atoms(n), dims(d), data(std::move(vals)) {
        if (n == 0 || d == 0) throw validation_error("economy: needs at least one atom and one dim");
        if (data.size() != n * d)
            throw validation_error("economy: data length must be atoms x dims");
        detail::require_finite(data, "economy");
    }

    /// The deterministic embedding of x in E: the same position in every state.
    static RandomEconomy constant(std::size_t n, std::span<const double> x) {
        RandomEconomy f(n, x.size());
        for (std::size_t i = 0; i < n; ++i)
            std::copy(x.begin(), x.end(), f.data.begin() + static_cast<std::ptrdiff_t>(i * x.size()));
        return f;
    }

    double operator()(std::size_t i, std::size_t j) const { return data[i * dims + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * dims + j]; }

    std::span<const double> row(std::size_t i) const { return {data.data() + i * dims, dims}; }
    std::span<double> row(std::size_t i) { return {data.data() + i * dims, dims}; }

    bool is_zero() const {
        for (double x : data)
            if (x != 0.0) return false;
        return true;
    }
};

/// Classical L^p norm on scenario scalars; p = inf uses the maximum (full
/// support makes the essential supremum a maximum).
inline double lp_norm(const RandomVariable& X, double p, const FiniteSpace& sp) {
    if (X.size() != sp.size())
        throw length_mismatch("lp_norm: variable length must match the space");
    if (std::isnan(p) || p < 1.0) throw invalid_order("lp_norm: order must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : X.values) m = std::max(m, std::abs(x));
        return m;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i)
        acc += sp.probs[i] * std::pow(std::abs(X.values[i]), p);
    return std::pow(acc, 1.0 / p);
}

/// Scenario-wise Euclidean norms ||f(omega_i)||_E as a random variable.
inline RandomVariable pointwise_euclidean_norms(const RandomEconomy& f) {
    std::vector<double> out(f.atoms);
    for (std::size_t i = 0; i < f.atoms; ++i) out[i] = detail::euclidean(f.row(i));
    return RandomVariable(std::move(out));
}

/// Variable-exponent modular: sum over finite-exponent atoms of
/// P(omega) (||f(omega)||_E / lambda)^{p(omega)}; an atom with p = inf
/// contributes 0 when ||f(omega)||_E <= lambda and +inf otherwise.
inline double modular(const RandomEconomy& f, const Exponent& exp, double lambda,
                      const FiniteSpace& sp, const ConeOrder& order) {
    if (!(lambda > 0.0)) throw non_positive_lambda("modular: lambda must be > 0");
    if (f.atoms != sp.size() || exp.values.size() != sp.size())
        throw dimension_mismatch("modular: economy, exponent and space sizes must agree");
    if (f.dims != order.dim)
        throw dimension_mismatch("modular: economy dims must match the cone dimension");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.atoms; ++i) {
        const double norm_i = detail::euclidean(f.row(i));
        const double p = exp.values[i];
        if (std::isinf(p)) {
            if (norm_i > lambda) return kInf;
        } else {
            acc += sp.probs[i] * std::pow(norm_i / lambda, p);
        }
    }
    return acc;
}

/// Luxemburg norm inf{ lambda > 0 : modular(f, lambda) <= 1 } by bracketing
/// and bisection. The modular is nonincreasing in lambda, which keeps the
/// bracket valid; the zero economy maps to 0.
inline double luxemburg_norm(const RandomEconomy& f, const Exponent& exp, const FiniteSpace& sp,
                             const ConeOrder& order) {
    if (f.is_zero()) {
        // still validate the cross-dimensions
        (void)modular(f, exp, 1.0, sp, order);
        return 0.0;
    }
    double max_norm = 0.0;
    for (std::size_t i = 0; i < f.atoms; ++i)
        max_norm = std::max(max_norm, detail::euclidean(f.row(i)));

    double hi = std::max(1.0, max_norm) * static_cast<double>(f.atoms);
    for (int it = 0; it < 200 && modular(f, exp, hi, sp, order) > 1.0; ++it) hi *= 2.0;
    double lo = hi;
    for (int it = 0; it < 200 && modular(f, exp, lo, sp, order) < 1.0; ++it) lo *= 0.5;
    // invariant: modular(lo) >= 1 >= modular(hi)
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (modular(f, exp, mid, sp, order) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Probability-weighted bilinear pairing <fhat, f> = E[ <fhat(omega), f(omega)> ],
/// the finite-dimensional pairing between L^{p(.)} and its dual.
inline double dual_pairing(const RandomEconomy& fhat, const RandomEconomy& f,
                           const FiniteSpace& sp) {
    if (fhat.atoms != f.atoms || fhat.dims != f.dims || f.atoms != sp.size())
        throw dimension_mismatch("dual_pairing: shapes must agree with the space");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.atoms; ++i)
        acc += sp.probs[i] * detail::dot(fhat.row(i), f.row(i));
    return acc;
}

/// Probability-weighted pairing of scenario scalars, E[Yhat X].
inline double scalar_pairing(const RandomVariable& Yhat, const RandomVariable& X,
                             const FiniteSpace& sp) {
    if (Yhat.size() != X.size() || X.size() != sp.size())
        throw length_mismatch("scalar_pairing: lengths must agree with the space");
    double acc = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) acc += sp.probs[i] * Yhat[i] * X.values[i];
    return acc;
}

/// Conjugate order q with 1/p + 1/q = 1; 1 <-> inf.
inline double conjugate_exponent(double p) {
    if (std::isnan(p) || p < 1.0) throw invalid_order("conjugate_exponent: order must be >= 1");
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

}  // namespace varrisk
