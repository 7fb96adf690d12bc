#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jpegrad/codec.hpp"
#include "jpegrad/diffop.hpp"
#include "jpegrad/image.hpp"
#include "jpegrad/rng.hpp"

namespace jpegrad {

enum class TransformCategory { kJpegOnly, kJpegThenSpatial, kSpatialThenJpeg, kSpatialOnly, kIdentity };
enum class SpatialKind { kGaussianBlur, kHorizontalFlip, kCropResize };

struct SpatialParams {
    SpatialKind kind = SpatialKind::kGaussianBlur;
    float sigma = 1.0f;          // blur only, in [0.1, 2.0]
    float crop_fraction = 1.0f;  // crop only, in [0.875, 1.0]
    int row_offset = 0;          // crop only
    int col_offset = 0;
};

struct TransformSpec {
    TransformCategory category = TransformCategory::kIdentity;
    std::optional<int> qf;             // present iff the category includes JPEG
    std::optional<SpatialParams> spatial;  // present iff the category includes a spatial aug
};

/// One-line log form, e.g. "JpegThenSpatial qf=72 blur sigma=0.84".
std::string to_string(const TransformSpec& spec);

struct CurriculumConfig {
    int qf_max = 95;
    int qf_min_final = 50;
    int total_steps = 200;  // T
};

/// Linear curriculum: qf_max at t=0, reaching qf_min_final at t=T/2 and held
/// there for t in [T/2, T]. Returns the schedule value rounded half-up.
int qf_min(int t, const CurriculumConfig& cfg);

/// Draws a transform: category with probabilities (.40, .30, .15, .10, .05)
/// for (JpegOnly, JpegThenSpatial, SpatialThenJpeg, SpatialOnly, Identity);
/// qf uniform over [qf_lo, qf_hi]; spatial kind uniform over the three kinds;
/// sigma ~ U[0.1, 2.0]; crop_fraction ~ U[0.875, 1.0] with offsets uniform
/// over valid positions for an height x width image.
TransformSpec sample_transform(Rng& rng, int qf_lo, int qf_hi, int height, int width);

enum class GradMode { kWithGrad, kNoGrad };

/// Saved per-stage contexts for transform_vjp.
struct TransformCtx {
    std::vector<std::unique_ptr<DiffOp>> ops;
    bool forwarded = false;
};

/// Applies the composed stages in category order. JPEG stages run the
/// diffjpeg codec (bit-exact with the hard codec, so both grad modes share
/// numerics); kWithGrad fills `ctx` for transform_vjp.
ImageTensor apply_transform(const TransformSpec& spec, const ImageTensor& x, GradMode mode,
                            TransformCtx* ctx = nullptr);

Cotangent transform_vjp(const TransformCtx& ctx, const Cotangent& g);

/// Truncated Gaussian kernel of radius ceil(3*sigma), renormalized to sum 1,
/// separable, with symmetric-reflect padding. The vjp is the exact transpose
/// (weight scatter through the same reflection).
class GaussianBlurOp : public DiffOp {
public:
    explicit GaussianBlurOp(float sigma);
    std::string name() const override { return "gaussian_blur"; }
    ImageTensor forward(const ImageTensor& x) override;
    Cotangent vjp(const Cotangent& g) const override;

private:
    float sigma_;
    std::vector<float> taps_;
    int radius_;
    int in_h_ = 0, in_w_ = 0, in_c_ = 0;
};

class HorizontalFlipOp : public DiffOp {
public:
    std::string name() const override { return "horizontal_flip"; }
    ImageTensor forward(const ImageTensor& x) override;
    Cotangent vjp(const Cotangent& g) const override;
};

/// Crop a window of crop_fraction per side, then bilinear-resize back to the
/// original dims so every EOT sample stays shape-compatible with the loss.
class CropResizeOp : public DiffOp {
public:
    CropResizeOp(float crop_fraction, int row_offset, int col_offset);
    std::string name() const override { return "crop_resize"; }
    ImageTensor forward(const ImageTensor& x) override;
    Cotangent vjp(const Cotangent& g) const override;

    static int crop_side(int full, float fraction);

private:
    float fraction_;
    int row_off_, col_off_;
    int in_h_ = 0, in_w_ = 0;
    int crop_h_ = 0, crop_w_ = 0;
};

}  // namespace jpegrad
