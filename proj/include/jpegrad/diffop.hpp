#pragma once

#include <memory>
#include <string>
#include <vector>

#include "jpegrad/image.hpp"

namespace jpegrad {

/// A differentiable pipeline stage: a forward evaluation plus a
/// vector-Jacobian product pulling an output cotangent back to the input.
/// forward() records whatever context vjp() needs, so one instance serves
/// one evaluation at a time; concurrent callers use separate instances.
class DiffOp {
public:
    virtual ~DiffOp() = default;

    virtual std::string name() const = 0;

    virtual ImageTensor forward(const ImageTensor& x) = 0;

    /// Requires a prior forward(). Throws UsageError without one and
    /// UnsupportedOperation when has_vjp() is false.
    virtual Cotangent vjp(const Cotangent& g) const = 0;

    virtual bool has_vjp() const { return true; }

    /// Smooth stand-in evaluated by the finite-difference checker. Ops whose
    /// backward is a declared surrogate rather than the true derivative (STE
    /// quantization) override this with the round-free path.
    virtual ImageTensor surrogate_forward(const ImageTensor& x) { return forward(x); }
    virtual bool uses_surrogate_gradient() const { return false; }
};

/// Applies ops left to right; vjp chains in reverse order.
class ComposeOp : public DiffOp {
public:
    explicit ComposeOp(std::vector<std::unique_ptr<DiffOp>> ops);

    std::string name() const override;
    ImageTensor forward(const ImageTensor& x) override;
    Cotangent vjp(const Cotangent& g) const override;
    ImageTensor surrogate_forward(const ImageTensor& x) override;
    bool uses_surrogate_gradient() const override;

private:
    std::vector<std::unique_ptr<DiffOp>> ops_;
    bool forwarded_ = false;
};

class IdentityOp : public DiffOp {
public:
    std::string name() const override { return "identity"; }
    ImageTensor forward(const ImageTensor& x) override { return x; }
    Cotangent vjp(const Cotangent& g) const override { return g; }
};

class ScaleOp : public DiffOp {
public:
    explicit ScaleOp(float factor) : factor_(factor) {}
    std::string name() const override { return "scale"; }
    ImageTensor forward(const ImageTensor& x) override;
    Cotangent vjp(const Cotangent& g) const override;

private:
    float factor_;
};

/// Plain elementwise round: zero derivative almost everywhere, no vjp.
class HardRoundOp : public DiffOp {
public:
    std::string name() const override { return "hard_round"; }
    ImageTensor forward(const ImageTensor& x) override;
    Cotangent vjp(const Cotangent& g) const override;
    bool has_vjp() const override { return false; }
};

}  // namespace jpegrad
