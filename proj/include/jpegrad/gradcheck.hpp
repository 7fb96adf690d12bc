#pragma once

#include <string>

#include "jpegrad/diffop.hpp"
#include "jpegrad/image.hpp"
#include "jpegrad/rng.hpp"

namespace jpegrad {

struct CheckReport {
    float max_rel_error = 0.0f;
    bool pass = false;
    /// The check ran against the op's declared surrogate forward (STE ops).
    bool used_surrogate_forward = false;
    /// Set when the check could not run: "non-differentiable", or a
    /// non-finite forward value with its coordinate.
    std::string note;
};

/// Central-difference check of op.vjp against a random linear functional of
/// the output, probed at `probes` random input coordinates. Linear stages are
/// exact at any h; pick h ~ 1e-3 times the input scale so float32 rounding
/// noise stays below tol.
CheckReport finite_diff_check(DiffOp& op, const ImageTensor& x, int probes, float h,
                              float tol, Rng& rng);

}  // namespace jpegrad
