#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace varrisk {

/// A named value attached to a counterexample: scalar (1x1), vector (1xn)
/// or matrix (rows x cols, row-major).
struct WitnessValue {
    std::string name;
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::vector<double> data;
};

inline WitnessValue witness_scalar(std::string name, double v) {
    return {std::move(name), 1, 1, {v}};
}

inline WitnessValue witness_vector(std::string name, std::vector<double> v) {
    const std::size_t n = v.size();
    return {std::move(name), 1, n, std::move(v)};
}

inline WitnessValue witness_matrix(std::string name, std::size_t rows, std::size_t cols,
                                   std::vector<double> v) {
    return {std::move(name), rows, cols, std::move(v)};
}

/// Concrete inputs that falsify a property, kept in full so a failure can
/// be replayed from the serialized report.
struct Witness {
    std::string description;
    std::vector<WitnessValue> values;
};

/// Outcome of one sampled property check.
struct AxiomCheck {
    std::string id;
    bool passed = false;
    long trials = 0;
    std::optional<Witness> witness;  // present iff failed
};

/// Results of a property suite run against one subject (an aggregator, a
/// risk measure, a composition, or an acceptance-set pair).
struct AxiomReport {
    std::string subject;
    std::vector<AxiomCheck> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    const AxiomCheck* find(const std::string& id) const {
        for (const auto& c : checks)
            if (c.id == id) return &c;
        return nullptr;
    }
};

}  // namespace varrisk
