#pragma once

#include <cmath>
#include <string>

#include "jpegrad/diffop.hpp"
#include "jpegrad/image.hpp"
#include "jpegrad/rng.hpp"

#ifndef JPEGRAD_TEST_DATA_DIR
#define JPEGRAD_TEST_DATA_DIR "tests/data"
#endif

namespace jpegrad::test {

inline std::string data_path(const std::string& name) {
    return std::string(JPEGRAD_TEST_DATA_DIR) + "/" + name;
}

/// <L x, g> == <x, L^T g> for a linear op; affine offsets are removed by
/// subtracting f(0). For STE ops the identity holds against the declared
/// surrogate forward (the linear part whose adjoint the vjp implements), so
/// that path is evaluated when the op declares one. Returns the worst
/// relative error over `trials` random (x, g) pairs.
inline double adjoint_check(DiffOp& op, int h, int w, int c, int trials, Rng& rng,
                            float in_lo = 0.0f, float in_hi = 1.0f) {
    const bool surrogate = op.uses_surrogate_gradient();
    const ImageTensor zero(h, w, c, 0.0f);
    const ImageTensor y0 = surrogate ? op.surrogate_forward(zero) : op.forward(zero);

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const ImageTensor x = random_image(rng, h, w, c, in_lo, in_hi);
        (void)op.forward(x);  // record the vjp context
        const ImageTensor y = surrogate ? op.surrogate_forward(x) : op.forward(x);
        ImageTensor g(y.height, y.width, y.channels);
        for (float& v : g.data) v = rng.uniform(-1.0f, 1.0f);
        const Cotangent xt = op.vjp(g);

        double lhs = 0.0;
        for (std::size_t i = 0; i < g.data.size(); ++i)
            lhs += (static_cast<double>(y.data[i]) - y0.data[i]) * g.data[i];
        const double rhs = dot(x, xt);
        const double denom = std::max({std::fabs(lhs), std::fabs(rhs), 1e-6});
        worst = std::max(worst, std::fabs(lhs - rhs) / denom);
    }
    return worst;
}

}  // namespace jpegrad::test
