#include "jpegrad/gradcheck.hpp"

#include <cmath>
#include <cstdio>

#include "jpegrad/errors.hpp"

namespace jpegrad {

namespace {

// <u, f> accumulated in double.
double functional(const ImageTensor& u, const ImageTensor& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.data.size(); ++i)
        s += static_cast<double>(u.data[i]) * y.data[i];
    return s;
}

std::string coord_string(const ImageTensor& t, std::size_t flat) {
    const int c = static_cast<int>(flat % t.channels);
    const std::size_t px = flat / t.channels;
    const int x = static_cast<int>(px % t.width);
    const int y = static_cast<int>(px / t.width);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%d,%d,%d)", y, x, c);
    return buf;
}

}  // namespace

CheckReport finite_diff_check(DiffOp& op, const ImageTensor& x, int probes, float h,
                              float tol, Rng& rng) {
    if (h <= 0.0f) throw ArgumentError("finite_diff_check: h must be positive");
    if (probes < 1) throw ArgumentError("finite_diff_check: probes must be >= 1");

    CheckReport report;
    if (!op.has_vjp()) {
        report.note = "non-differentiable";
        return report;
    }
    report.used_surrogate_forward = op.uses_surrogate_gradient();

    const ImageTensor y0 = op.forward(x);
    for (std::size_t i = 0; i < y0.data.size(); ++i) {
        if (!std::isfinite(y0.data[i])) {
            report.note = "non-finite forward value at " + coord_string(y0, i);
            return report;
        }
    }

    ImageTensor u(y0.height, y0.width, y0.channels);
    for (float& v : u.data) v = rng.uniform(-1.0f, 1.0f);

    const Cotangent a = op.vjp(u);  // gradient of <u, f(x)> w.r.t. x
    const float grad_scale = linf_norm(a);

    ImageTensor xp = x;
    float max_rel = 0.0f;
    for (int p = 0; p < probes; ++p) {
        const std::size_t i = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(x.data.size()) - 1));
        const float orig = xp.data[i];

        xp.data[i] = orig + h;
        const double phi_plus = functional(u, op.surrogate_forward(xp));
        xp.data[i] = orig - h;
        const double phi_minus = functional(u, op.surrogate_forward(xp));
        xp.data[i] = orig;

        if (!std::isfinite(phi_plus) || !std::isfinite(phi_minus)) {
            report.note = "non-finite perturbed forward at " + coord_string(x, i);
            return report;
        }

        const double fd = (phi_plus - phi_minus) / (2.0 * static_cast<double>(h));
        const double ai = a.data[i];
        const double denom =
            std::max({std::fabs(fd), std::fabs(ai), static_cast<double>(grad_scale), 1e-3});
        max_rel = std::max(max_rel, static_cast<float>(std::fabs(fd - ai) / denom));
    }

    // Restore the op's saved context to match the unperturbed input.
    op.forward(x);

    report.max_rel_error = max_rel;
    report.pass = max_rel <= tol;
    return report;
}

}  // namespace jpegrad
