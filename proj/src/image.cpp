#include "jpegrad/image.hpp"

#include <algorithm>
#include <cmath>

#include "jpegrad/errors.hpp"
#include "jpegrad/rng.hpp"

namespace jpegrad {

bool ImageTensor::all_finite() const {
    for (float v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

ImageTensor zeros_like(const ImageTensor& x) {
    return ImageTensor(x.height, x.width, x.channels, 0.0f);
}

ImageTensor clamp(const ImageTensor& x, float lo, float hi) {
    ImageTensor out = x;
    for (float& v : out.data) v = std::min(hi, std::max(lo, v));
    return out;
}

float max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw ShapeError("max_abs_diff: shape mismatch");
    float m = 0.0f;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

float linf_norm(const ImageTensor& x) {
    float m = 0.0f;
    for (float v : x.data) m = std::max(m, std::fabs(v));
    return m;
}

double l2_norm(const ImageTensor& x) {
    double s = 0.0;
    for (float v : x.data) s += static_cast<double>(v) * v;
    return std::sqrt(s);
}

double dot(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw ShapeError("dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        s += static_cast<double>(a.data[i]) * b.data[i];
    return s;
}

ImageTensor random_image(Rng& rng, int h, int w, int c, float lo, float hi) {
    ImageTensor out(h, w, c);
    for (float& v : out.data) v = rng.uniform(lo, hi);
    return out;
}

}  // namespace jpegrad
