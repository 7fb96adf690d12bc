#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace jpegrad {

/// Dense row-major height x width x channels tensor of 32-bit floats.
/// Pipeline images hold values in [0,1] with 3 channels; per-plane
/// internals use a single channel.
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    ImageTensor() = default;
    ImageTensor(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, fill) {}

    float& at(int y, int x, int c) {
        assert(y >= 0 && y < height && x >= 0 && x < width && c >= 0 && c < channels);
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        assert(y >= 0 && y < height && x >= 0 && x < width && c >= 0 && c < channels);
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const ImageTensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
    bool all_finite() const;
};

/// A cotangent always shares the layout of the tensor it adjoins.
using Cotangent = ImageTensor;

ImageTensor zeros_like(const ImageTensor& x);

/// Elementwise clamp to [lo, hi].
ImageTensor clamp(const ImageTensor& x, float lo, float hi);

/// max_i |a_i - b_i|; shapes must match.
float max_abs_diff(const ImageTensor& a, const ImageTensor& b);

float linf_norm(const ImageTensor& x);

/// Global L2 norm, accumulated in double.
double l2_norm(const ImageTensor& x);

/// <a, b> accumulated in double; shapes must match.
double dot(const ImageTensor& a, const ImageTensor& b);

class Rng;
/// Uniform values in [lo, hi), drawn in row-major order.
ImageTensor random_image(Rng& rng, int h, int w, int c, float lo = 0.0f, float hi = 1.0f);

}  // namespace jpegrad
