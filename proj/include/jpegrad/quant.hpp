#pragma once

#include <array>

#include "jpegrad/diffop.hpp"
#include "jpegrad/image.hpp"

namespace jpegrad {

enum class Plane { kLuma, kChroma };

/// 8x8 integer quantization divisors for both planes, derived from a quality
/// factor by IJG scaling of the ITU-T T.81 Annex K base tables.
struct QuantTables {
    std::array<int, 64> luma{};
    std::array<int, 64> chroma{};
    int qf = 0;

    const std::array<int, 64>& table(Plane p) const {
        return p == Plane::kLuma ? luma : chroma;
    }
};

/// scale = 5000/qf (qf < 50) else 200 - 2*qf; entry = clamp((base*scale+50)/100, 1, 255).
QuantTables quality_to_tables(int qf);

/// Shared per-process cache, built once on first use.
const QuantTables& cached_tables(int qf);

/// Forward: round(F/Q)*Q per coefficient, half away from zero. The vjp is the
/// identity: the /Q and *Q scalings cancel and round passes the cotangent
/// straight through.
ImageTensor ste_quantize(const ImageTensor& coefs, const QuantTables& tables, Plane plane);

/// The round-free path (F/Q)*Q used as the declared smooth surrogate.
ImageTensor dequantize_scale(const ImageTensor& coefs, const QuantTables& tables, Plane plane);

class SteQuantizeOp : public DiffOp {
public:
    SteQuantizeOp(QuantTables tables, Plane plane) : tables_(tables), plane_(plane) {}
    std::string name() const override { return "ste_quantize"; }
    ImageTensor forward(const ImageTensor& x) override {
        return ste_quantize(x, tables_, plane_);
    }
    Cotangent vjp(const Cotangent& g) const override { return g; }
    ImageTensor surrogate_forward(const ImageTensor& x) override {
        return dequantize_scale(x, tables_, plane_);
    }
    bool uses_surrogate_gradient() const override { return true; }

private:
    QuantTables tables_;
    Plane plane_;
};

}  // namespace jpegrad
