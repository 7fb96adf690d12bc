#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "jpegrad/diffop.hpp"
#include "jpegrad/image.hpp"

namespace jpegrad {

enum class ChromaMode { k444, k420 };

struct CodecConfig {
    int qf = 75;
    ChromaMode chroma_mode = ChromaMode::k444;
    // Rounding is fixed: half away from zero.
    bool clamp_output = true;
};

/// Context saved by a diffjpeg forward for the matching vjp. All pipeline
/// stages are linear or STE-identity, so only shapes, the config and the
/// clamp mask are needed.
struct CodecCtx {
    CodecConfig cfg;
    int orig_h = 0, orig_w = 0;
    int padded_h = 0, padded_w = 0;
    std::vector<std::uint8_t> clamp_mask;  // 1 = output was clamped (empty if no clamp)
    bool has_forward = false;
};

/// The encode-decode round trip with STE quantization:
/// [0,1] -> x255 -> YCbCr -> -128 -> (4:2:0 pool) -> block DCT -> round(F/Q)*Q
/// -> block IDCT -> (+128, upsample) -> RGB -> /255 -> optional clamp.
/// Non-multiple-of-8 dims are edge-replicated in and cropped back out
/// (4:2:0 requires multiples of 16). Bit-exact with hard_jpeg by
/// construction: both run this same code path.
ImageTensor diffjpeg_forward(const ImageTensor& x, const CodecConfig& cfg,
                             CodecCtx* ctx = nullptr);

/// Chains the stage adjoints in reverse. In 4:4:4 no-clamp mode this is the
/// identity map up to float rounding.
Cotangent diffjpeg_vjp(const CodecCtx& ctx, const Cotangent& g);

/// Reference deployment codec: identical forward numerics, no gradient path.
ImageTensor hard_jpeg(const ImageTensor& x, const CodecConfig& cfg);

class DiffJpegOp : public DiffOp {
public:
    explicit DiffJpegOp(CodecConfig cfg) : cfg_(cfg) {}
    std::string name() const override { return "diffjpeg"; }
    ImageTensor forward(const ImageTensor& x) override {
        ctx_ = CodecCtx{};
        return diffjpeg_forward(x, cfg_, &ctx_);
    }
    Cotangent vjp(const Cotangent& g) const override { return diffjpeg_vjp(ctx_, g); }
    ImageTensor surrogate_forward(const ImageTensor& x) override;
    bool uses_surrogate_gradient() const override { return true; }

private:
    CodecConfig cfg_;
    CodecCtx ctx_;
};

class HardJpegOp : public DiffOp {
public:
    explicit HardJpegOp(CodecConfig cfg) : cfg_(cfg) {}
    std::string name() const override { return "hard_jpeg"; }
    ImageTensor forward(const ImageTensor& x) override { return hard_jpeg(x, cfg_); }
    Cotangent vjp(const Cotangent&) const override;
    bool has_vjp() const override { return false; }

private:
    CodecConfig cfg_;
};

}  // namespace jpegrad
