#include "jpegrad/transforms.hpp"

#include <cmath>
#include <cstdio>

#include "jpegrad/errors.hpp"
#include "jpegrad/resample.hpp"

namespace jpegrad {

namespace {

constexpr double kCumJpegOnly = 0.40;
constexpr double kCumJpegThenSpatial = 0.70;
constexpr double kCumSpatialThenJpeg = 0.85;
constexpr double kCumSpatialOnly = 0.95;

constexpr float kSigmaLo = 0.1f, kSigmaHi = 2.0f;
constexpr float kCropLo = 0.875f, kCropHi = 1.0f;

bool has_jpeg(TransformCategory c) {
    return c == TransformCategory::kJpegOnly || c == TransformCategory::kJpegThenSpatial ||
           c == TransformCategory::kSpatialThenJpeg;
}

bool has_spatial(TransformCategory c) {
    return c == TransformCategory::kJpegThenSpatial ||
           c == TransformCategory::kSpatialThenJpeg || c == TransformCategory::kSpatialOnly;
}

SpatialParams sample_spatial(Rng& rng, int height, int width) {
    SpatialParams p;
    const int kind = rng.uniform_int(0, 2);
    p.kind = static_cast<SpatialKind>(kind);
    switch (p.kind) {
        case SpatialKind::kGaussianBlur:
            p.sigma = rng.uniform(kSigmaLo, kSigmaHi);
            break;
        case SpatialKind::kHorizontalFlip:
            break;
        case SpatialKind::kCropResize: {
            p.crop_fraction = rng.uniform(kCropLo, kCropHi);
            const int ch = CropResizeOp::crop_side(height, p.crop_fraction);
            const int cw = CropResizeOp::crop_side(width, p.crop_fraction);
            p.row_offset = rng.uniform_int(0, height - ch);
            p.col_offset = rng.uniform_int(0, width - cw);
            break;
        }
    }
    return p;
}

std::unique_ptr<DiffOp> make_spatial_op(const SpatialParams& p) {
    switch (p.kind) {
        case SpatialKind::kGaussianBlur:
            return std::make_unique<GaussianBlurOp>(p.sigma);
        case SpatialKind::kHorizontalFlip:
            return std::make_unique<HorizontalFlipOp>();
        case SpatialKind::kCropResize:
            return std::make_unique<CropResizeOp>(p.crop_fraction, p.row_offset, p.col_offset);
    }
    throw ArgumentError("unknown spatial kind");
}

void validate_spec(const TransformSpec& spec) {
    if (has_jpeg(spec.category) != spec.qf.has_value())
        throw ArgumentError("transform spec: qf must be present iff the category includes JPEG");
    if (has_spatial(spec.category) != spec.spatial.has_value())
        throw ArgumentError(
            "transform spec: spatial params must be present iff the category includes a "
            "spatial augmentation");
    if (spec.qf && (*spec.qf < 1 || *spec.qf > 100))
        throw ArgumentError("transform spec: qf out of range");
}

std::vector<std::unique_ptr<DiffOp>> build_ops(const TransformSpec& spec) {
    validate_spec(spec);
    CodecConfig codec_cfg;
    if (spec.qf) codec_cfg.qf = *spec.qf;

    std::vector<std::unique_ptr<DiffOp>> ops;
    switch (spec.category) {
        case TransformCategory::kJpegOnly:
            ops.push_back(std::make_unique<DiffJpegOp>(codec_cfg));
            break;
        case TransformCategory::kJpegThenSpatial:
            ops.push_back(std::make_unique<DiffJpegOp>(codec_cfg));
            ops.push_back(make_spatial_op(*spec.spatial));
            break;
        case TransformCategory::kSpatialThenJpeg:
            ops.push_back(make_spatial_op(*spec.spatial));
            ops.push_back(std::make_unique<DiffJpegOp>(codec_cfg));
            break;
        case TransformCategory::kSpatialOnly:
            ops.push_back(make_spatial_op(*spec.spatial));
            break;
        case TransformCategory::kIdentity:
            ops.push_back(std::make_unique<IdentityOp>());
            break;
    }
    return ops;
}

}  // namespace

std::string to_string(const TransformSpec& spec) {
    const char* cat = nullptr;
    switch (spec.category) {
        case TransformCategory::kJpegOnly: cat = "JpegOnly"; break;
        case TransformCategory::kJpegThenSpatial: cat = "JpegThenSpatial"; break;
        case TransformCategory::kSpatialThenJpeg: cat = "SpatialThenJpeg"; break;
        case TransformCategory::kSpatialOnly: cat = "SpatialOnly"; break;
        case TransformCategory::kIdentity: cat = "Identity"; break;
    }
    std::string s = cat;
    if (spec.qf) s += " qf=" + std::to_string(*spec.qf);
    if (spec.spatial) {
        char buf[80];
        switch (spec.spatial->kind) {
            case SpatialKind::kGaussianBlur:
                std::snprintf(buf, sizeof(buf), " blur sigma=%.2f", spec.spatial->sigma);
                break;
            case SpatialKind::kHorizontalFlip:
                std::snprintf(buf, sizeof(buf), " flip");
                break;
            case SpatialKind::kCropResize:
                std::snprintf(buf, sizeof(buf), " crop frac=%.3f off=(%d,%d)",
                              spec.spatial->crop_fraction, spec.spatial->row_offset,
                              spec.spatial->col_offset);
                break;
        }
        s += buf;
    }
    return s;
}

int qf_min(int t, const CurriculumConfig& cfg) {
    if (cfg.total_steps < 1) throw ArgumentError("curriculum: total_steps must be >= 1");
    if (cfg.qf_min_final < 1 || cfg.qf_max > 100 || cfg.qf_min_final > cfg.qf_max)
        throw ArgumentError("curriculum: need 1 <= qf_min_final <= qf_max <= 100");
    if (t < 0 || t > cfg.total_steps)
        throw ArgumentError("curriculum: t out of [0, T], got " + std::to_string(t));
    const double frac = std::min(1.0, 2.0 * t / cfg.total_steps);
    const double v = cfg.qf_max - frac * (cfg.qf_max - cfg.qf_min_final);
    const int rounded = static_cast<int>(std::floor(v + 0.5));  // round half up
    return std::min(cfg.qf_max, std::max(cfg.qf_min_final, rounded));
}

TransformSpec sample_transform(Rng& rng, int qf_lo, int qf_hi, int height, int width) {
    if (qf_lo > qf_hi || qf_lo < 1 || qf_hi > 100)
        throw ArgumentError("sample_transform: invalid qf range [" + std::to_string(qf_lo) +
                            "," + std::to_string(qf_hi) + "]");
    if (height < 1 || width < 1) throw ArgumentError("sample_transform: empty image dims");

    TransformSpec spec;
    const double u = rng.uniform();
    if (u < kCumJpegOnly) spec.category = TransformCategory::kJpegOnly;
    else if (u < kCumJpegThenSpatial) spec.category = TransformCategory::kJpegThenSpatial;
    else if (u < kCumSpatialThenJpeg) spec.category = TransformCategory::kSpatialThenJpeg;
    else if (u < kCumSpatialOnly) spec.category = TransformCategory::kSpatialOnly;
    else spec.category = TransformCategory::kIdentity;

    if (has_jpeg(spec.category)) spec.qf = rng.uniform_int(qf_lo, qf_hi);
    if (has_spatial(spec.category)) spec.spatial = sample_spatial(rng, height, width);
    return spec;
}

ImageTensor apply_transform(const TransformSpec& spec, const ImageTensor& x, GradMode mode,
                            TransformCtx* ctx) {
    auto ops = build_ops(spec);
    ImageTensor cur = x;
    for (auto& op : ops) cur = op->forward(cur);
    if (mode == GradMode::kWithGrad && ctx) {
        ctx->ops = std::move(ops);
        ctx->forwarded = true;
    }
    return cur;
}

Cotangent transform_vjp(const TransformCtx& ctx, const Cotangent& g) {
    if (!ctx.forwarded) throw UsageError("transform_vjp: no saved forward context");
    Cotangent cur = g;
    for (auto it = ctx.ops.rbegin(); it != ctx.ops.rend(); ++it) cur = (*it)->vjp(cur);
    return cur;
}

// ---------------------------------------------------------------- blur

GaussianBlurOp::GaussianBlurOp(float sigma) : sigma_(sigma) {
    if (!(sigma > 0.0f)) throw ArgumentError("gaussian_blur: sigma must be positive");
    radius_ = static_cast<int>(std::ceil(3.0 * sigma));
    taps_.resize(2 * radius_ + 1);
    double sum = 0.0;
    for (int i = -radius_; i <= radius_; ++i) {
        const double w = std::exp(-0.5 * (static_cast<double>(i) * i) / (static_cast<double>(sigma) * sigma));
        taps_[i + radius_] = static_cast<float>(w);
        sum += w;
    }
    for (float& w : taps_) w = static_cast<float>(w / sum);
}

namespace {

// Symmetric reflection: ...2,1,0 | 0,1,2... n-1 | n-1,n-2...
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

ImageTensor blur_pass(const ImageTensor& x, const std::vector<float>& taps, int radius,
                      bool vertical) {
    ImageTensor out(x.height, x.width, x.channels);
    for (int y = 0; y < x.height; ++y) {
        for (int xx = 0; xx < x.width; ++xx) {
            for (int c = 0; c < x.channels; ++c) {
                double s = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int sy = vertical ? reflect(y + k, x.height) : y;
                    const int sx = vertical ? xx : reflect(xx + k, x.width);
                    s += static_cast<double>(taps[k + radius]) * x.at(sy, sx, c);
                }
                out.at(y, xx, c) = static_cast<float>(s);
            }
        }
    }
    return out;
}

// Exact transpose of blur_pass: scatter each output cotangent through the
// same taps and reflection.
Cotangent blur_pass_adjoint(const Cotangent& g, const std::vector<float>& taps, int radius,
                            bool vertical) {
    Cotangent out(g.height, g.width, g.channels, 0.0f);
    for (int y = 0; y < g.height; ++y) {
        for (int xx = 0; xx < g.width; ++xx) {
            for (int c = 0; c < g.channels; ++c) {
                const float gv = g.at(y, xx, c);
                for (int k = -radius; k <= radius; ++k) {
                    const int sy = vertical ? reflect(y + k, g.height) : y;
                    const int sx = vertical ? xx : reflect(xx + k, g.width);
                    out.at(sy, sx, c) += taps[k + radius] * gv;
                }
            }
        }
    }
    return out;
}

}  // namespace

ImageTensor GaussianBlurOp::forward(const ImageTensor& x) {
    if (radius_ >= x.height || radius_ >= x.width)
        throw ShapeError("gaussian_blur: kernel radius exceeds image dims");
    in_h_ = x.height;
    in_w_ = x.width;
    in_c_ = x.channels;
    ImageTensor h = blur_pass(x, taps_, radius_, /*vertical=*/false);
    return blur_pass(h, taps_, radius_, /*vertical=*/true);
}

Cotangent GaussianBlurOp::vjp(const Cotangent& g) const {
    if (in_h_ == 0) throw UsageError("gaussian_blur: vjp before forward");
    if (g.height != in_h_ || g.width != in_w_ || g.channels != in_c_)
        throw ShapeError("gaussian_blur: cotangent shape mismatch");
    Cotangent v = blur_pass_adjoint(g, taps_, radius_, /*vertical=*/true);
    return blur_pass_adjoint(v, taps_, radius_, /*vertical=*/false);
}

// ---------------------------------------------------------------- flip

ImageTensor HorizontalFlipOp::forward(const ImageTensor& x) {
    ImageTensor out(x.height, x.width, x.channels);
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx)
            for (int c = 0; c < x.channels; ++c)
                out.at(y, xx, c) = x.at(y, x.width - 1 - xx, c);
    return out;
}

Cotangent HorizontalFlipOp::vjp(const Cotangent& g) const {
    Cotangent out(g.height, g.width, g.channels);
    for (int y = 0; y < g.height; ++y)
        for (int xx = 0; xx < g.width; ++xx)
            for (int c = 0; c < g.channels; ++c)
                out.at(y, xx, c) = g.at(y, g.width - 1 - xx, c);
    return out;
}

// ---------------------------------------------------------------- crop+resize

int CropResizeOp::crop_side(int full, float fraction) {
    const int side = static_cast<int>(std::lround(static_cast<double>(full) * fraction));
    return std::max(1, std::min(full, side));
}

CropResizeOp::CropResizeOp(float crop_fraction, int row_offset, int col_offset)
    : fraction_(crop_fraction), row_off_(row_offset), col_off_(col_offset) {
    if (!(crop_fraction > 0.0f && crop_fraction <= 1.0f))
        throw ArgumentError("crop_resize: crop_fraction must be in (0,1]");
    if (row_offset < 0 || col_offset < 0)
        throw ArgumentError("crop_resize: offsets must be non-negative");
}

ImageTensor CropResizeOp::forward(const ImageTensor& x) {
    in_h_ = x.height;
    in_w_ = x.width;
    crop_h_ = crop_side(x.height, fraction_);
    crop_w_ = crop_side(x.width, fraction_);
    if (row_off_ + crop_h_ > x.height || col_off_ + crop_w_ > x.width)
        throw ShapeError("crop_resize: window out of bounds");
    ImageTensor window = crop(x, row_off_, col_off_, crop_h_, crop_w_);
    return bilinear_resize(window, x.height, x.width);
}

Cotangent CropResizeOp::vjp(const Cotangent& g) const {
    if (in_h_ == 0) throw UsageError("crop_resize: vjp before forward");
    Cotangent window = bilinear_resize_adjoint(g, crop_h_, crop_w_);
    return crop_adjoint(window, row_off_, col_off_, in_h_, in_w_);
}

}  // namespace jpegrad
