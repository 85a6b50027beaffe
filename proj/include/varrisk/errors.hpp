#pragma once

#include <stdexcept>
#include <string>

namespace varrisk {

/// Base class of every library error.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct dimension_mismatch : error {
    using error::error;
};

struct length_mismatch : error {
    using error::error;
};

struct invalid_order : error {
    using error::error;
};

struct non_positive_lambda : error {
    using error::error;
};

struct non_positive_probability : error {
    using error::error;
};

struct probabilities_do_not_sum_to_one : error {
    using error::error;
};

struct not_invertible : error {
    using error::error;
};

struct bracketing_failure : error {
    using error::error;
};

struct unbounded_envelope : error {
    using error::error;
};

struct unsupported_kind : error {
    using error::error;
};

struct unsupported_instance : error {
    using error::error;
};

/// A sampled dual value exceeded the primal beyond tolerance. This signals
/// an implementation bug, never a property of the model.
struct weak_duality_violation : error {
    using error::error;
};

struct invalid_config : error {
    using error::error;
};

/// Input could not be parsed; the message carries the position.
struct parse_error : error {
    using error::error;
};

/// Input parsed but violates an invariant; the message names the field.
struct validation_error : error {
    using error::error;
};

struct write_error : error {
    using error::error;
};

/// An internal consistency assertion failed (e.g. a feasibility check
/// inside a representation routine).
struct internal_check_failure : error {
    using error::error;
};

}  // namespace varrisk
