#include "jpegrad/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "jpegrad/codec.hpp"
#include "jpegrad/color.hpp"
#include "jpegrad/dct.hpp"
#include "jpegrad/errors.hpp"
#include "jpegrad/parallel.hpp"
#include "jpegrad/quant.hpp"

namespace jpegrad {

float psnr(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw ShapeError("psnr: shape mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<float>::infinity();
    return static_cast<float>(10.0 * std::log10(1.0 / mse));
}

PerturbationStats perturbation_stats(const ImageTensor& x_p, const ImageTensor& x_c) {
    if (!x_p.same_shape(x_c)) throw ShapeError("perturbation_stats: shape mismatch");
    double sum = 0.0;
    float max_d = 0.0f;
    std::size_t covered = 0;
    const float threshold = 0.5f / 255.0f;
    for (std::size_t i = 0; i < x_p.data.size(); ++i) {
        const float d = std::fabs(x_p.data[i] - x_c.data[i]);
        max_d = std::max(max_d, d);
        sum += d;
        if (d > threshold) ++covered;
    }
    PerturbationStats s;
    s.max_delta = max_d * 255.0f;
    s.mean_delta = static_cast<float>(sum / static_cast<double>(x_p.data.size()) * 255.0);
    s.coverage = static_cast<float>(covered) / static_cast<float>(x_p.data.size());
    return s;
}

float survival_from_deltas(const ImageTensor& d_before, const ImageTensor& d_after) {
    if (!d_before.same_shape(d_after)) throw ShapeError("jpeg_survival: shape mismatch");
    double dot_bb = 0.0, dot_aa = 0.0, dot_ba = 0.0;
    for (std::size_t i = 0; i < d_before.data.size(); ++i) {
        const double b = d_before.data[i];
        const double a = d_after.data[i];
        dot_bb += b * b;
        dot_aa += a * a;
        dot_ba += b * a;
    }
    const double norm_b = std::sqrt(dot_bb);
    const double norm_a = std::sqrt(dot_aa);
    if (norm_b == 0.0 && norm_a == 0.0) return 1.0f;
    if (norm_b == 0.0 || norm_a == 0.0) return 0.0f;

    const double cosine = dot_ba / (norm_b * norm_a);
    const double ratio = std::min(1.0, norm_a / norm_b);
    const double product = std::max(0.0, cosine * ratio);
    return static_cast<float>(std::sqrt(product));
}

float jpeg_survival(const ImageTensor& x_p, const ImageTensor& x_c, int qf) {
    if (!x_p.same_shape(x_c)) throw ShapeError("jpeg_survival: shape mismatch");
    CodecConfig cfg;
    cfg.qf = qf;
    const ImageTensor jp = hard_jpeg(x_p, cfg);
    const ImageTensor jc = hard_jpeg(x_c, cfg);

    ImageTensor before(x_p.height, x_p.width, x_p.channels);
    ImageTensor after(x_p.height, x_p.width, x_p.channels);
    for (std::size_t i = 0; i < x_p.data.size(); ++i) {
        before.data[i] = x_p.data[i] - x_c.data[i];
        after.data[i] = jp.data[i] - jc.data[i];
    }
    return survival_from_deltas(before, after);
}

float grad_coverage(CodecKind kind, const ImageTensor& x, int qf, Rng& rng) {
    if (kind == CodecKind::kHard) return 0.0f;  // no gradient path exists

    CodecConfig cfg;
    cfg.qf = qf;
    cfg.clamp_output = false;
    CodecCtx ctx;
    (void)diffjpeg_forward(x, cfg, &ctx);

    Cotangent g(x.height, x.width, x.channels);
    bool nonzero = false;
    while (!nonzero) {
        for (float& v : g.data) {
            const float mag = rng.uniform(0.5f, 1.0f);
            v = rng.uniform() < 0.5 ? -mag : mag;
        }
        for (float v : g.data)
            if (v != 0.0f) { nonzero = true; break; }
    }

    const Cotangent back = diffjpeg_vjp(ctx, g);
    std::size_t hit = 0;
    for (float v : back.data)
        if (std::fabs(v) > 0.0f) ++hit;
    return static_cast<float>(hit) / static_cast<float>(back.data.size());
}

SurvivalHeatmap dct_survival_heatmap(const ImageTensor& x, int qf) {
    if (x.channels != 3) throw ShapeError("dct_survival_heatmap: expected a 3-channel image");
    if (x.height % 8 != 0 || x.width % 8 != 0)
        throw ShapeError("dct_survival_heatmap: dims must be multiples of 8");

    // Luma plane on the 255 scale, level-shifted.
    ImageTensor scaled = x;
    for (float& v : scaled.data) v *= 255.0f;
    const ImageTensor ycc = rgb_to_ycbcr(scaled);
    ImageTensor luma(x.height, x.width, 1);
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx) luma.at(y, xx, 0) = ycc.at(y, xx, 0) - 128.0f;

    const ImageTensor coefs = block_dct(luma);
    const ImageTensor quantized = ste_quantize(coefs, cached_tables(qf), Plane::kLuma);

    std::array<double, 64> num{}, den{};
    for (int y = 0; y < x.height; ++y) {
        for (int xx = 0; xx < x.width; ++xx) {
            const int cell = (y % 8) * 8 + (xx % 8);
            num[cell] += std::fabs(quantized.at(y, xx, 0));
            den[cell] += std::fabs(coefs.at(y, xx, 0));
        }
    }

    SurvivalHeatmap h;
    h.qf = qf;
    h.n_blocks = (x.height / 8) * (x.width / 8);
    for (int i = 0; i < 64; ++i)
        h.grid[i] = den[i] < 1e-8 ? 1.0f : static_cast<float>(std::min(1.0, num[i] / den[i]));
    return h;
}

ZoneReport zone_survival(const SurvivalHeatmap& h) {
    double acc[4] = {0, 0, 0, 0};
    int count[4] = {0, 0, 0, 0};
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            const int s = u + v;
            const int zone = (u == 0 && v == 0) ? 0 : (s <= 2 ? 1 : (s <= 9 ? 2 : 3));
            acc[zone] += h.grid[u * 8 + v];
            ++count[zone];
        }
    }
    ZoneReport z;
    z.dc = static_cast<float>(acc[0] / count[0]);
    z.low = static_cast<float>(acc[1] / count[1]);
    z.mid = static_cast<float>(acc[2] / count[2]);
    z.high = static_cast<float>(acc[3] / count[3]);
    return z;
}

const std::vector<int>& protection_qfs() {
    static const std::vector<int> qfs = {100, 95, 90, 85, 80, 75, 70, 60, 50};
    return qfs;
}

namespace {

struct MeanStd {
    float mean, std;
};

MeanStd mean_std(const std::vector<float>& v) {
    double m = 0.0;
    for (float x : v) m += x;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (float x : v) var += (x - m) * (x - m);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    return {static_cast<float>(m), static_cast<float>(std::sqrt(var))};
}

}  // namespace

ProtectionTable eval_protection(const std::vector<ImageTensor>& clean,
                                const std::vector<ImageTensor>& protected_images,
                                const SurrogateParams& params, const NoiseSchedule& sched,
                                const std::vector<int>& qfs, int n_samples, int cond_tag,
                                std::uint64_t noise_seed) {
    if (clean.size() != protected_images.size())
        throw ArgumentError("eval_protection: list length mismatch");
    if (clean.empty()) throw ArgumentError("eval_protection: empty image lists");
    if (n_samples < 1) throw ArgumentError("eval_protection: n_samples must be >= 1");

    const Rng base(noise_seed);
    ProtectionTable table;
    table.rows.resize(qfs.size());

    parallel_for(static_cast<int>(qfs.size()), [&](int qi) {
        const int qf = qfs[qi];
        CodecConfig cfg;
        cfg.qf = qf;
        std::vector<float> clean_losses, prot_losses;
        for (std::size_t i = 0; i < clean.size(); ++i) {
            const ImageTensor jc = hard_jpeg(clean[i], cfg);
            const ImageTensor jp = hard_jpeg(protected_images[i], cfg);
            // Same draws for both conditions (and across QFs): paired sampling.
            const Rng rng_i = base.derive(i);
            const DenoiseLossResult lc = denoise_loss(params, sched, jc, cond_tag, n_samples, rng_i);
            const DenoiseLossResult lp = denoise_loss(params, sched, jp, cond_tag, n_samples, rng_i);
            clean_losses.insert(clean_losses.end(), lc.per_sample.begin(), lc.per_sample.end());
            prot_losses.insert(prot_losses.end(), lp.per_sample.begin(), lp.per_sample.end());
        }
        const MeanStd mc = mean_std(clean_losses);
        const MeanStd mp = mean_std(prot_losses);
        table.rows[qi] = {qf, mc.mean, mc.std, mp.mean, mp.std, mp.mean - mc.mean};
    });
    return table;
}

std::string protection_table_csv(const ProtectionTable& table) {
    std::string out = "qf,clean_mean,clean_std,prot_mean,prot_std,delta\n";
    char buf[192];
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.qf, r.clean_mean,
                      r.clean_std, r.prot_mean, r.prot_std, r.delta);
        out += buf;
    }
    return out;
}

std::string zone_report_csv(const ZoneReport& z) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "dc,low,mid,high\n%.9g,%.9g,%.9g,%.9g\n", z.dc, z.low,
                  z.mid, z.high);
    return buf;
}

std::string heatmap_csv(const SurvivalHeatmap& h) {
    std::string out;
    char buf[32];
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            std::snprintf(buf, sizeof(buf), v == 7 ? "%.9g\n" : "%.9g,", h.grid[u * 8 + v]);
            out += buf;
        }
    }
    return out;
}

}  // namespace jpegrad
