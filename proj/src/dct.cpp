#include "jpegrad/dct.hpp"

#include <cmath>

#include "jpegrad/errors.hpp"

namespace jpegrad {

namespace {

std::array<float, 64> make_basis() {
    std::array<float, 64> d{};
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < 8; ++k) {
        const double c = (k == 0) ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
        for (int n = 0; n < 8; ++n)
            d[k * 8 + n] = static_cast<float>(c * std::cos(pi * (2 * n + 1) * k / 16.0));
    }
    return d;
}

void require_plane(const ImageTensor& p, const char* op) {
    if (p.channels != 1)
        throw ShapeError(std::string(op) + ": expected a single-channel plane");
    if (p.height % 8 != 0 || p.width % 8 != 0)
        throw ShapeError(std::string(op) + ": dims must be multiples of 8, got " +
                         std::to_string(p.height) + "x" + std::to_string(p.width));
}

// out_block = A * block * B^T with double accumulation; A, B are 8x8
// row-major, block addressed inside `src` at (by, bx).
void block_bilinear(const float* a, const float* b, const ImageTensor& src, int by,
                    int bx, ImageTensor& dst) {
    double tmp[64];  // A * block
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            double s = 0.0;
            for (int k = 0; k < 8; ++k)
                s += static_cast<double>(a[i * 8 + k]) * src.at(by + k, bx + j, 0);
            tmp[i * 8 + j] = s;
        }
    }
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            double s = 0.0;
            for (int k = 0; k < 8; ++k) s += tmp[i * 8 + k] * b[j * 8 + k];
            dst.at(by + i, bx + j, 0) = static_cast<float>(s);
        }
    }
}

ImageTensor apply_blockwise(const ImageTensor& plane, bool inverse) {
    const auto& d = dct_basis();
    std::array<float, 64> dt;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) dt[i * 8 + j] = d[j * 8 + i];

    const float* a = inverse ? dt.data() : d.data();
    const float* b = inverse ? dt.data() : d.data();
    ImageTensor out(plane.height, plane.width, 1);
    for (int by = 0; by < plane.height; by += 8)
        for (int bx = 0; bx < plane.width; bx += 8)
            block_bilinear(a, b, plane, by, bx, out);
    return out;
}

}  // namespace

const std::array<float, 64>& dct_basis() {
    static const std::array<float, 64> d = make_basis();
    return d;
}

ImageTensor block_dct(const ImageTensor& plane) {
    require_plane(plane, "block_dct");
    return apply_blockwise(plane, false);
}

ImageTensor block_idct(const ImageTensor& coefs) {
    require_plane(coefs, "block_idct");
    return apply_blockwise(coefs, true);
}

}  // namespace jpegrad
