#include "jpegrad/quant.hpp"

#include <cmath>
#include <vector>

#include "jpegrad/errors.hpp"

namespace jpegrad {

namespace {

// ITU-T T.81 Annex K base tables, raster order.
constexpr int kBaseLuma[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};
constexpr int kBaseChroma[64] = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,
};

std::array<int, 64> scale_table(const int* base, int scale) {
    std::array<int, 64> out{};
    for (int i = 0; i < 64; ++i) {
        const int v = (base[i] * scale + 50) / 100;
        out[i] = v < 1 ? 1 : (v > 255 ? 255 : v);
    }
    return out;
}

}  // namespace

QuantTables quality_to_tables(int qf) {
    if (qf < 1 || qf > 100)
        throw ArgumentError("quality_to_tables: qf must be in [1,100], got " +
                            std::to_string(qf));
    const int scale = qf < 50 ? 5000 / qf : 200 - 2 * qf;
    QuantTables t;
    t.luma = scale_table(kBaseLuma, scale);
    t.chroma = scale_table(kBaseChroma, scale);
    t.qf = qf;
    return t;
}

const QuantTables& cached_tables(int qf) {
    static const std::vector<QuantTables> cache = [] {
        std::vector<QuantTables> c;
        c.reserve(100);
        for (int q = 1; q <= 100; ++q) c.push_back(quality_to_tables(q));
        return c;
    }();
    if (qf < 1 || qf > 100)
        throw ArgumentError("cached_tables: qf must be in [1,100], got " +
                            std::to_string(qf));
    return cache[qf - 1];
}

ImageTensor ste_quantize(const ImageTensor& coefs, const QuantTables& tables, Plane plane) {
    if (coefs.channels != 1) throw ShapeError("ste_quantize: expected a single-channel plane");
    const auto& q = tables.table(plane);
    ImageTensor out(coefs.height, coefs.width, 1);
    for (int y = 0; y < coefs.height; ++y) {
        for (int x = 0; x < coefs.width; ++x) {
            const float qv = static_cast<float>(q[(y % 8) * 8 + (x % 8)]);
            // std::round is half away from zero.
            out.at(y, x, 0) = std::round(coefs.at(y, x, 0) / qv) * qv;
        }
    }
    return out;
}

ImageTensor dequantize_scale(const ImageTensor& coefs, const QuantTables& tables, Plane plane) {
    if (coefs.channels != 1)
        throw ShapeError("dequantize_scale: expected a single-channel plane");
    const auto& q = tables.table(plane);
    ImageTensor out(coefs.height, coefs.width, 1);
    for (int y = 0; y < coefs.height; ++y) {
        for (int x = 0; x < coefs.width; ++x) {
            const float qv = static_cast<float>(q[(y % 8) * 8 + (x % 8)]);
            out.at(y, x, 0) = (coefs.at(y, x, 0) / qv) * qv;
        }
    }
    return out;
}

}  // namespace jpegrad
