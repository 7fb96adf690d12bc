#include "jpegrad/color.hpp"

#include "jpegrad/errors.hpp"

namespace jpegrad {

namespace {

// Forward matrix rows (Y, Cb, Cr) and the exact inverse derived from them.
constexpr double kFwd[3][3] = {
    {0.299, 0.587, 0.114},
    {-0.168736, -0.331264, 0.5},
    {0.5, -0.418688, -0.081312},
};
constexpr double kOffset[3] = {0.0, 128.0, 128.0};

// True inverse of kFwd (adjugate / det). The textbook decode constants
// (1.402, 1.772, ...) only invert the *unrounded* derivation; inverting the
// matrix as printed keeps the round trip exact to float32 storage.
struct InverseMatrix {
    double m[3][3];
    InverseMatrix() {
        const auto& f = kFwd;
        const double det = f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1]) -
                           f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0]) +
                           f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0]);
        m[0][0] = (f[1][1] * f[2][2] - f[1][2] * f[2][1]) / det;
        m[0][1] = (f[0][2] * f[2][1] - f[0][1] * f[2][2]) / det;
        m[0][2] = (f[0][1] * f[1][2] - f[0][2] * f[1][1]) / det;
        m[1][0] = (f[1][2] * f[2][0] - f[1][0] * f[2][2]) / det;
        m[1][1] = (f[0][0] * f[2][2] - f[0][2] * f[2][0]) / det;
        m[1][2] = (f[0][2] * f[1][0] - f[0][0] * f[1][2]) / det;
        m[2][0] = (f[1][0] * f[2][1] - f[1][1] * f[2][0]) / det;
        m[2][1] = (f[0][1] * f[2][0] - f[0][0] * f[2][1]) / det;
        m[2][2] = (f[0][0] * f[1][1] - f[0][1] * f[1][0]) / det;
    }
};

const InverseMatrix kInverse;
const double (&kInv)[3][3] = kInverse.m;

void require_rgb(const ImageTensor& x, const char* op) {
    if (x.channels != 3)
        throw ShapeError(std::string(op) + ": expected 3 channels, got " +
                         std::to_string(x.channels));
}

}  // namespace

ImageTensor rgb_to_ycbcr(const ImageTensor& x) {
    require_rgb(x, "rgb_to_ycbcr");
    ImageTensor out(x.height, x.width, 3);
    const std::size_t n = static_cast<std::size_t>(x.height) * x.width;
    for (std::size_t p = 0; p < n; ++p) {
        const double r = x.data[p * 3 + 0];
        const double g = x.data[p * 3 + 1];
        const double b = x.data[p * 3 + 2];
        for (int c = 0; c < 3; ++c) {
            out.data[p * 3 + c] = static_cast<float>(
                kFwd[c][0] * r + kFwd[c][1] * g + kFwd[c][2] * b + kOffset[c]);
        }
    }
    return out;
}

ImageTensor ycbcr_to_rgb(const ImageTensor& x) {
    require_rgb(x, "ycbcr_to_rgb");
    ImageTensor out(x.height, x.width, 3);
    const std::size_t n = static_cast<std::size_t>(x.height) * x.width;
    for (std::size_t p = 0; p < n; ++p) {
        const double y = x.data[p * 3 + 0];
        const double cb = static_cast<double>(x.data[p * 3 + 1]) - 128.0;
        const double cr = static_cast<double>(x.data[p * 3 + 2]) - 128.0;
        for (int c = 0; c < 3; ++c) {
            out.data[p * 3 + c] =
                static_cast<float>(kInv[c][0] * y + kInv[c][1] * cb + kInv[c][2] * cr);
        }
    }
    return out;
}

Cotangent rgb_to_ycbcr_adjoint(const Cotangent& g) {
    require_rgb(g, "rgb_to_ycbcr_adjoint");
    Cotangent out(g.height, g.width, 3);
    const std::size_t n = static_cast<std::size_t>(g.height) * g.width;
    for (std::size_t p = 0; p < n; ++p) {
        const double gy = g.data[p * 3 + 0];
        const double gcb = g.data[p * 3 + 1];
        const double gcr = g.data[p * 3 + 2];
        for (int c = 0; c < 3; ++c) {
            out.data[p * 3 + c] = static_cast<float>(
                kFwd[0][c] * gy + kFwd[1][c] * gcb + kFwd[2][c] * gcr);
        }
    }
    return out;
}

Cotangent ycbcr_to_rgb_adjoint(const Cotangent& g) {
    require_rgb(g, "ycbcr_to_rgb_adjoint");
    Cotangent out(g.height, g.width, 3);
    const std::size_t n = static_cast<std::size_t>(g.height) * g.width;
    for (std::size_t p = 0; p < n; ++p) {
        const double gr = g.data[p * 3 + 0];
        const double gg = g.data[p * 3 + 1];
        const double gb = g.data[p * 3 + 2];
        for (int c = 0; c < 3; ++c) {
            out.data[p * 3 + c] = static_cast<float>(
                kInv[0][c] * gr + kInv[1][c] * gg + kInv[2][c] * gb);
        }
    }
    return out;
}

}  // namespace jpegrad
