#include "jpegrad/codec.hpp"

#include <algorithm>
#include <cmath>

#include "jpegrad/color.hpp"
#include "jpegrad/dct.hpp"
#include "jpegrad/errors.hpp"
#include "jpegrad/quant.hpp"
#include "jpegrad/resample.hpp"

namespace jpegrad {

namespace {

constexpr float kLevelShift = 128.0f;

ImageTensor extract_plane(const ImageTensor& x, int c) {
    ImageTensor out(x.height, x.width, 1);
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx) out.at(y, xx, 0) = x.at(y, xx, c);
    return out;
}

void insert_plane(ImageTensor& dst, const ImageTensor& plane, int c) {
    for (int y = 0; y < dst.height; ++y)
        for (int xx = 0; xx < dst.width; ++xx) dst.at(y, xx, c) = plane.at(y, xx, 0);
}

int round_up(int v, int mult) { return ((v + mult - 1) / mult) * mult; }

void validate_input(const ImageTensor& x, const CodecConfig& cfg) {
    if (x.channels != 3) throw ShapeError("jpeg codec: expected a 3-channel image");
    if (x.height < 1 || x.width < 1) throw ShapeError("jpeg codec: empty image");
    if (cfg.qf < 1 || cfg.qf > 100)
        throw ArgumentError("jpeg codec: qf must be in [1,100], got " + std::to_string(cfg.qf));
}

// One plane through DCT -> quantize -> IDCT. `round_quantize` false gives the
// smooth surrogate path (scalings cancel, numerically the identity).
ImageTensor plane_roundtrip(const ImageTensor& plane, const QuantTables& tables,
                            Plane kind, bool round_quantize) {
    ImageTensor coefs = block_dct(plane);
    coefs = round_quantize ? ste_quantize(coefs, tables, kind)
                           : dequantize_scale(coefs, tables, kind);
    return block_idct(coefs);
}

ImageTensor codec_pipeline(const ImageTensor& x, const CodecConfig& cfg, CodecCtx* ctx,
                           bool round_quantize) {
    validate_input(x, cfg);
    const int block = cfg.chroma_mode == ChromaMode::k420 ? 16 : 8;
    const int ph = round_up(x.height, block);
    const int pw = round_up(x.width, block);

    ImageTensor padded = (ph == x.height && pw == x.width) ? x : pad_replicate(x, ph, pw);

    ImageTensor scaled = padded;
    for (float& v : scaled.data) v *= 255.0f;

    ImageTensor ycc = rgb_to_ycbcr(scaled);
    const QuantTables& tables = cached_tables(cfg.qf);

    ImageTensor recon(ph, pw, 3);
    for (int c = 0; c < 3; ++c) {
        ImageTensor plane = extract_plane(ycc, c);
        for (float& v : plane.data) v -= kLevelShift;

        const Plane kind = c == 0 ? Plane::kLuma : Plane::kChroma;
        if (c > 0 && cfg.chroma_mode == ChromaMode::k420) {
            ImageTensor sub = avgpool2(plane);
            sub = plane_roundtrip(sub, tables, kind, round_quantize);
            plane = bilinear_resize(sub, ph, pw);
        } else {
            plane = plane_roundtrip(plane, tables, kind, round_quantize);
        }

        for (float& v : plane.data) v += kLevelShift;
        insert_plane(recon, plane, c);
    }

    ImageTensor out = ycbcr_to_rgb(recon);
    for (float& v : out.data) v *= (1.0f / 255.0f);

    if (ph != x.height || pw != x.width) out = crop(out, 0, 0, x.height, x.width);

    if (ctx) {
        ctx->cfg = cfg;
        ctx->orig_h = x.height;
        ctx->orig_w = x.width;
        ctx->padded_h = ph;
        ctx->padded_w = pw;
        ctx->clamp_mask.clear();
        ctx->has_forward = true;
    }
    if (cfg.clamp_output) {
        if (ctx) ctx->clamp_mask.assign(out.data.size(), 0);
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            const float v = out.data[i];
            if (v < 0.0f || v > 1.0f) {
                out.data[i] = v < 0.0f ? 0.0f : 1.0f;
                if (ctx) ctx->clamp_mask[i] = 1;
            }
        }
    }
    return out;
}

}  // namespace

ImageTensor diffjpeg_forward(const ImageTensor& x, const CodecConfig& cfg, CodecCtx* ctx) {
    return codec_pipeline(x, cfg, ctx, /*round_quantize=*/true);
}

ImageTensor hard_jpeg(const ImageTensor& x, const CodecConfig& cfg) {
    return codec_pipeline(x, cfg, nullptr, /*round_quantize=*/true);
}

Cotangent diffjpeg_vjp(const CodecCtx& ctx, const Cotangent& g) {
    if (!ctx.has_forward) throw UsageError("diffjpeg_vjp: no saved forward context");
    if (g.channels != 3 || g.height != ctx.orig_h || g.width != ctx.orig_w)
        throw ShapeError("diffjpeg_vjp: cotangent shape does not match the forward");

    Cotangent cur = g;
    if (ctx.cfg.clamp_output) {
        for (std::size_t i = 0; i < cur.data.size(); ++i)
            if (ctx.clamp_mask[i]) cur.data[i] = 0.0f;
    }

    if (ctx.padded_h != ctx.orig_h || ctx.padded_w != ctx.orig_w)
        cur = crop_adjoint(cur, 0, 0, ctx.padded_h, ctx.padded_w);

    for (float& v : cur.data) v *= (1.0f / 255.0f);
    cur = ycbcr_to_rgb_adjoint(cur);

    const QuantTables& tables = cached_tables(ctx.cfg.qf);
    Cotangent merged(ctx.padded_h, ctx.padded_w, 3);
    for (int c = 0; c < 3; ++c) {
        ImageTensor plane = extract_plane(cur, c);
        // +128 / -128 level shifts are constant offsets: identity adjoints.
        if (c > 0 && ctx.cfg.chroma_mode == ChromaMode::k420) {
            ImageTensor sub = bilinear_resize_adjoint(plane, ctx.padded_h / 2, ctx.padded_w / 2);
            sub = block_dct(sub);          // adjoint of block_idct
            (void)tables;                  // STE backward: identity through quantization
            sub = block_idct(sub);         // adjoint of block_dct
            plane = avgpool2_adjoint(sub);
        } else {
            plane = block_dct(plane);
            plane = block_idct(plane);
        }
        insert_plane(merged, plane, c);
    }

    merged = rgb_to_ycbcr_adjoint(merged);
    for (float& v : merged.data) v *= 255.0f;

    if (ctx.padded_h != ctx.orig_h || ctx.padded_w != ctx.orig_w)
        merged = pad_replicate_adjoint(merged, ctx.orig_h, ctx.orig_w);
    return merged;
}

ImageTensor DiffJpegOp::surrogate_forward(const ImageTensor& x) {
    return codec_pipeline(x, cfg_, nullptr, /*round_quantize=*/false);
}

Cotangent HardJpegOp::vjp(const Cotangent&) const {
    throw UnsupportedOperation(
        "hard_jpeg: round() has a zero derivative almost everywhere, no gradient path");
}

}  // namespace jpegrad
