#pragma once

#include <string>
#include <vector>

#include <varrisk/varrisk.hpp>

namespace vrt {

using namespace varrisk;

inline RandomEconomy random_economy(Rng& rng, std::size_t n, std::size_t d, double scale = 2.0) {
    return RandomEconomy(n, d, rng.normal_vector(n * d, scale));
}

inline RandomVariable random_variable(Rng& rng, std::size_t n, double scale = 2.0) {
    return RandomVariable(rng.normal_vector(n, scale));
}

/// A non-uniform but valid probability vector, deterministic in the seed.
inline FiniteSpace random_space(Rng& rng, std::size_t n) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& v : p) {
        v = rng.uniform(0.1, 1.0);
        sum += v;
    }
    for (auto& v : p) v /= sum;
    double resum = 0.0;
    for (double v : p) resum += v;
    p[0] += 1.0 - resum;
    return FiniteSpace(std::move(p));
}

}  // namespace vrt
