#pragma once

#include "jpegrad/diffop.hpp"
#include "jpegrad/image.hpp"

namespace jpegrad {

/// Full-range JFIF BT.601 transform on the [0,255] scale. No clamping:
/// chroma of saturated primaries may leave [0,255] mid-pipeline.
ImageTensor rgb_to_ycbcr(const ImageTensor& x);
ImageTensor ycbcr_to_rgb(const ImageTensor& x);

/// Adjoints: transpose of the 3x3 linear part applied per pixel (the +128
/// chroma offsets are constants and do not enter the vjp).
Cotangent rgb_to_ycbcr_adjoint(const Cotangent& g);
Cotangent ycbcr_to_rgb_adjoint(const Cotangent& g);

class RgbToYcbcrOp : public DiffOp {
public:
    std::string name() const override { return "rgb_to_ycbcr"; }
    ImageTensor forward(const ImageTensor& x) override { return rgb_to_ycbcr(x); }
    Cotangent vjp(const Cotangent& g) const override { return rgb_to_ycbcr_adjoint(g); }
};

class YcbcrToRgbOp : public DiffOp {
public:
    std::string name() const override { return "ycbcr_to_rgb"; }
    ImageTensor forward(const ImageTensor& x) override { return ycbcr_to_rgb(x); }
    Cotangent vjp(const Cotangent& g) const override { return ycbcr_to_rgb_adjoint(g); }
};

}  // namespace jpegrad
