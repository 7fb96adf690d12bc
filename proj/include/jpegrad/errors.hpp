#pragma once

#include <stdexcept>
#include <string>

namespace jpegrad {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/config shapes incompatible with an operation.
struct ShapeError : Error {
    using Error::Error;
};

// Argument outside its documented domain.
struct ArgumentError : Error {
    using Error::Error;
};

// API misuse: vjp without a matching forward, restore with a foreign state, ...
struct UsageError : Error {
    using Error::Error;
};

// Gradient requested from an operator that has none.
struct UnsupportedOperation : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// A runtime invariant (l-inf budget, [0,1] box) failed mid-run.
struct InvariantViolation : Error {
    int step;
    InvariantViolation(int step_, const std::string& what_)
        : Error("invariant violation at step " + std::to_string(step_) + ": " + what_),
          step(step_) {}
};

}  // namespace jpegrad
