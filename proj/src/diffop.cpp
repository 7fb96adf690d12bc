#include "jpegrad/diffop.hpp"

#include <cmath>

#include "jpegrad/errors.hpp"

namespace jpegrad {

ComposeOp::ComposeOp(std::vector<std::unique_ptr<DiffOp>> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw ArgumentError("compose: empty op list");
}

std::string ComposeOp::name() const {
    std::string n = "compose(";
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        if (i) n += ", ";
        n += ops_[i]->name();
    }
    return n + ")";
}

ImageTensor ComposeOp::forward(const ImageTensor& x) {
    ImageTensor cur = x;
    for (auto& op : ops_) cur = op->forward(cur);
    forwarded_ = true;
    return cur;
}

Cotangent ComposeOp::vjp(const Cotangent& g) const {
    if (!forwarded_) throw UsageError("compose: vjp before forward");
    Cotangent cur = g;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) cur = (*it)->vjp(cur);
    return cur;
}

ImageTensor ComposeOp::surrogate_forward(const ImageTensor& x) {
    ImageTensor cur = x;
    for (auto& op : ops_) cur = op->surrogate_forward(cur);
    return cur;
}

bool ComposeOp::uses_surrogate_gradient() const {
    for (const auto& op : ops_)
        if (op->uses_surrogate_gradient()) return true;
    return false;
}

ImageTensor ScaleOp::forward(const ImageTensor& x) {
    ImageTensor out = x;
    for (float& v : out.data) v *= factor_;
    return out;
}

Cotangent ScaleOp::vjp(const Cotangent& g) const {
    Cotangent out = g;
    for (float& v : out.data) v *= factor_;
    return out;
}

ImageTensor HardRoundOp::forward(const ImageTensor& x) {
    ImageTensor out = x;
    for (float& v : out.data) v = std::round(v);
    return out;
}

Cotangent HardRoundOp::vjp(const Cotangent&) const {
    throw UnsupportedOperation("hard_round: derivative is zero almost everywhere, no vjp");
}

}  // namespace jpegrad
