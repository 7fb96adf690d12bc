#include "jpegrad/resample.hpp"

#include <algorithm>
#include <cmath>

#include "jpegrad/errors.hpp"

namespace jpegrad {

ImageTensor pad_replicate(const ImageTensor& x, int new_h, int new_w) {
    if (new_h < x.height || new_w < x.width)
        throw ShapeError("pad_replicate: target dims smaller than source");
    ImageTensor out(new_h, new_w, x.channels);
    for (int y = 0; y < new_h; ++y) {
        const int sy = std::min(y, x.height - 1);
        for (int xx = 0; xx < new_w; ++xx) {
            const int sx = std::min(xx, x.width - 1);
            for (int c = 0; c < x.channels; ++c) out.at(y, xx, c) = x.at(sy, sx, c);
        }
    }
    return out;
}

Cotangent pad_replicate_adjoint(const Cotangent& g, int orig_h, int orig_w) {
    if (orig_h > g.height || orig_w > g.width)
        throw ShapeError("pad_replicate_adjoint: original dims larger than padded");
    Cotangent out(orig_h, orig_w, g.channels, 0.0f);
    for (int y = 0; y < g.height; ++y) {
        const int sy = std::min(y, orig_h - 1);
        for (int x = 0; x < g.width; ++x) {
            const int sx = std::min(x, orig_w - 1);
            for (int c = 0; c < g.channels; ++c) out.at(sy, sx, c) += g.at(y, x, c);
        }
    }
    return out;
}

ImageTensor crop(const ImageTensor& x, int row0, int col0, int h, int w) {
    if (row0 < 0 || col0 < 0 || row0 + h > x.height || col0 + w > x.width)
        throw ShapeError("crop: window out of bounds");
    ImageTensor out(h, w, x.channels);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            for (int c = 0; c < x.channels; ++c)
                out.at(y, xx, c) = x.at(row0 + y, col0 + xx, c);
    return out;
}

Cotangent crop_adjoint(const Cotangent& g, int row0, int col0, int full_h, int full_w) {
    if (row0 < 0 || col0 < 0 || row0 + g.height > full_h || col0 + g.width > full_w)
        throw ShapeError("crop_adjoint: window out of bounds");
    Cotangent out(full_h, full_w, g.channels, 0.0f);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            for (int c = 0; c < g.channels; ++c)
                out.at(row0 + y, col0 + x, c) = g.at(y, x, c);
    return out;
}

ImageTensor avgpool2(const ImageTensor& x) {
    if (x.height % 2 != 0 || x.width % 2 != 0)
        throw ShapeError("avgpool2: dims must be even");
    ImageTensor out(x.height / 2, x.width / 2, x.channels);
    for (int y = 0; y < out.height; ++y)
        for (int xx = 0; xx < out.width; ++xx)
            for (int c = 0; c < x.channels; ++c)
                out.at(y, xx, c) = 0.25f * (x.at(2 * y, 2 * xx, c) + x.at(2 * y, 2 * xx + 1, c) +
                                            x.at(2 * y + 1, 2 * xx, c) +
                                            x.at(2 * y + 1, 2 * xx + 1, c));
    return out;
}

Cotangent avgpool2_adjoint(const Cotangent& g) {
    Cotangent out(g.height * 2, g.width * 2, g.channels);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            for (int c = 0; c < g.channels; ++c) {
                const float v = 0.25f * g.at(y, x, c);
                out.at(2 * y, 2 * x, c) = v;
                out.at(2 * y, 2 * x + 1, c) = v;
                out.at(2 * y + 1, 2 * x, c) = v;
                out.at(2 * y + 1, 2 * x + 1, c) = v;
            }
    return out;
}

namespace {

struct Tap {
    int i0, i1;
    float w0, w1;
};

// Half-pixel source coordinate for output index i, clamped to the valid range.
Tap tap_for(int i, int out_n, int in_n) {
    const double src = (i + 0.5) * (static_cast<double>(in_n) / out_n) - 0.5;
    const double clamped = std::min(std::max(src, 0.0), static_cast<double>(in_n - 1));
    int i0 = static_cast<int>(std::floor(clamped));
    if (i0 > in_n - 2) i0 = in_n - 2;
    if (in_n == 1) return {0, 0, 1.0f, 0.0f};
    const float frac = static_cast<float>(clamped - i0);
    return {i0, i0 + 1, 1.0f - frac, frac};
}

}  // namespace

ImageTensor bilinear_resize(const ImageTensor& x, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1) throw ShapeError("bilinear_resize: empty output");
    ImageTensor out(out_h, out_w, x.channels);
    for (int y = 0; y < out_h; ++y) {
        const Tap ty = tap_for(y, out_h, x.height);
        for (int xx = 0; xx < out_w; ++xx) {
            const Tap tx = tap_for(xx, out_w, x.width);
            for (int c = 0; c < x.channels; ++c) {
                const double v = static_cast<double>(ty.w0) * tx.w0 * x.at(ty.i0, tx.i0, c) +
                                 static_cast<double>(ty.w0) * tx.w1 * x.at(ty.i0, tx.i1, c) +
                                 static_cast<double>(ty.w1) * tx.w0 * x.at(ty.i1, tx.i0, c) +
                                 static_cast<double>(ty.w1) * tx.w1 * x.at(ty.i1, tx.i1, c);
                out.at(y, xx, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

Cotangent bilinear_resize_adjoint(const Cotangent& g, int in_h, int in_w) {
    Cotangent out(in_h, in_w, g.channels, 0.0f);
    for (int y = 0; y < g.height; ++y) {
        const Tap ty = tap_for(y, g.height, in_h);
        for (int x = 0; x < g.width; ++x) {
            const Tap tx = tap_for(x, g.width, in_w);
            for (int c = 0; c < g.channels; ++c) {
                const float gv = g.at(y, x, c);
                out.at(ty.i0, tx.i0, c) += ty.w0 * tx.w0 * gv;
                out.at(ty.i0, tx.i1, c) += ty.w0 * tx.w1 * gv;
                out.at(ty.i1, tx.i0, c) += ty.w1 * tx.w0 * gv;
                out.at(ty.i1, tx.i1, c) += ty.w1 * tx.w1 * gv;
            }
        }
    }
    return out;
}

}  // namespace jpegrad
