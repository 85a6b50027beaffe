#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace varrisk {

/// Deterministic 64-bit generator (splitmix64: fixed-increment state walk,
/// output finalized with two xor-multiply rounds). No platform entropy is
/// involved, so a seed identifies the whole stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Index in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    /// Standard normal via Box-Muller on two uniforms; the sine mate of
    /// each pair is cached and served next.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double sigma) { return sigma * normal(); }

    std::vector<double> normal_vector(std::size_t n, double sigma) {
        std::vector<double> out(n);
        for (auto& x : out) x = normal(sigma);
        return out;
    }

    /// Independent stream for trial `index` of a harness seeded with `seed`.
    /// Derived by one splitmix round over seed xor a Weyl multiple of the
    /// index, so trial streams never depend on scheduling order.
    static Rng for_trial(std::uint64_t seed, std::uint64_t index) {
        Rng mix(seed ^ ((index + 1) * 0x9e3779b97f4a7c15ull));
        return Rng(mix.next_u64());
    }

private:
    static constexpr double kTwoPi = 6.283185307179586476925286766559;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace varrisk
