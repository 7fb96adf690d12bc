#include "jpegrad/crafter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "jpegrad/errors.hpp"
#include "jpegrad/metrics.hpp"
#include "jpegrad/parallel.hpp"

namespace jpegrad {

namespace {

constexpr std::uint64_t kStreamInit = 0x101;
constexpr std::uint64_t kStreamInner = 0x202;
constexpr std::uint64_t kStreamOuter = 0x303;

void validate_config(const CraftConfig& cfg) {
    if (!(cfg.epsilon > 0.0f && cfg.epsilon <= 1.0f))
        throw ArgumentError("craft: epsilon must be in (0,1]");
    if (!(cfg.alpha > 0.0f && cfg.alpha <= cfg.epsilon))
        throw ArgumentError("craft: need 0 < alpha <= epsilon");
    if (cfg.steps < 0) throw ArgumentError("craft: steps must be >= 0");
    if (cfg.eot_samples < 1) throw ArgumentError("craft: eot_samples must be >= 1");
    if (cfg.inner_unroll < 0) throw ArgumentError("craft: inner_unroll must be >= 0");
    if (cfg.inner_lr < 0.0f) throw ArgumentError("craft: inner_lr must be >= 0");
    if (cfg.survival_qf < 1 || cfg.survival_qf > 100)
        throw ArgumentError("craft: survival_qf out of range");
}

float sign_of(float v) { return v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f); }

struct MeanStd {
    float mean = 0.0f, std = 0.0f;
};

MeanStd mean_std(const std::vector<float>& v) {
    if (v.empty()) return {};
    double m = 0.0;
    for (float x : v) m += x;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (float x : v) var += (x - m) * (x - m);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    return {static_cast<float>(m), static_cast<float>(std::sqrt(var))};
}

}  // namespace

ImageTensor project_linf(const ImageTensor& x, const ImageTensor& ref, float epsilon) {
    if (!x.same_shape(ref)) throw ShapeError("project_linf: shape mismatch");
    ImageTensor out(x.height, x.width, x.channels);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const float delta =
            std::min(epsilon, std::max(-epsilon, x.data[i] - ref.data[i]));
        out.data[i] = std::min(1.0f, std::max(0.0f, ref.data[i] + delta));
    }
    return out;
}

InnerUpdateResult inner_update(CraftState& state, SurrogateParams& params,
                               const NoiseSchedule& sched, const CraftConfig& cfg, int qf_lo,
                               Rng rng) {
    InnerUpdateResult result;
    result.saved = snapshot_head(params);
    if (cfg.inner_unroll == 0 || state.x_p.empty()) return result;

    double loss_acc = 0.0;
    for (int k = 0; k < cfg.inner_unroll; ++k) {
        // One transform draw per inner iteration, applied to the whole batch;
        // the images are detached (no-grad path).
        const TransformSpec spec = sample_transform(rng, qf_lo, cfg.qf_max,
                                                    state.x_p[0].height, state.x_p[0].width);
        std::vector<ImageTensor> batch;
        batch.reserve(state.x_p.size());
        for (const ImageTensor& img : state.x_p)
            batch.push_back(apply_transform(spec, img, GradMode::kNoGrad));
        loss_acc += inner_step(params, sched, batch, cfg.cond_tag, cfg.inner_lr,
                               rng.derive(0x9000 + static_cast<std::uint64_t>(k)));
    }
    result.loss = static_cast<float>(loss_acc / cfg.inner_unroll);
    return result;
}

OuterStepStats outer_pgd_step(CraftState& state, const SurrogateParams& params,
                              const NoiseSchedule& sched, const CraftConfig& cfg, int qf_lo,
                              Rng rng) {
    const int n_images = static_cast<int>(state.x_p.size());
    const int j_samples = cfg.eot_samples;

    std::vector<std::vector<float>> losses(n_images);
    std::vector<int> skipped(n_images, 0);

    parallel_for(n_images, [&](int i) {
        Rng rng_i = rng.derive(static_cast<std::uint64_t>(i));
        const ImageTensor& x = state.x_p[i];

        ImageTensor grad_sum = zeros_like(x);
        int kept = 0;
        for (int j = 0; j < j_samples; ++j) {
            const TransformSpec spec =
                sample_transform(rng_i, qf_lo, cfg.qf_max, x.height, x.width);
            TransformCtx tctx;
            const ImageTensor y = apply_transform(spec, x, GradMode::kWithGrad, &tctx);
            const DenoiseEval eval = denoise_loss_and_input_grad(
                params, sched, y, cfg.cond_tag, 1,
                rng_i.derive(0x5000 + static_cast<std::uint64_t>(j)));
            losses[i].push_back(eval.loss);

            const Cotangent grad = transform_vjp(tctx, eval.input_grad);
            const double norm = l2_norm(grad);
            if (norm > 0.0) {
                const float inv = static_cast<float>(1.0 / norm);
                for (std::size_t p = 0; p < grad.data.size(); ++p)
                    grad_sum.data[p] += grad.data[p] * inv;
                ++kept;
            } else {
                ++skipped[i];
            }
        }

        if (kept == 0) return;  // all gradients vanished: leave the image unchanged
        const float inv_kept = 1.0f / static_cast<float>(kept);
        ImageTensor updated = x;
        for (std::size_t p = 0; p < updated.data.size(); ++p)
            updated.data[p] += cfg.alpha * sign_of(grad_sum.data[p] * inv_kept);
        state.x_p[i] = project_linf(updated, state.clean_ref[i], cfg.epsilon);
    });

    OuterStepStats stats;
    std::vector<float> all;
    for (int i = 0; i < n_images; ++i) {
        all.insert(all.end(), losses[i].begin(), losses[i].end());
        stats.skipped_samples += skipped[i];
        if (skipped[i] == j_samples)
            std::fprintf(stderr,
                         "warning: step %d image %d: all %d EOT gradients were zero, no-op\n",
                         state.step, i, j_samples);
    }
    const MeanStd ms = mean_std(all);
    stats.loss_mean = ms.mean;
    stats.loss_std = ms.std;
    return stats;
}

CraftResult craft(const std::vector<ImageTensor>& clean, const CraftConfig& cfg) {
    validate_config(cfg);
    if (clean.empty()) throw ArgumentError("craft: empty image list");
    for (const ImageTensor& img : clean) {
        if (img.channels != 3) throw ShapeError("craft: expected 3-channel images");
        if (!img.all_finite()) throw ArgumentError("craft: non-finite input image");
    }

    const Rng master(cfg.seed);
    SurrogateParams params = init_surrogate(master.derive(kStreamInit).next_u64());
    const NoiseSchedule sched = NoiseSchedule::linear();
    const CurriculumConfig curriculum = cfg.curriculum();

    CraftState state;
    state.x_p = clean;
    state.clean_ref = clean;

    for (int t = 0; t < cfg.steps; ++t) {
        state.step = t;
        const int lo = qf_min(t, curriculum);

        const InnerUpdateResult inner =
            inner_update(state, params, sched, cfg, lo,
                         master.derive(kStreamInner).derive(static_cast<std::uint64_t>(t)));
        const OuterStepStats outer =
            outer_pgd_step(state, params, sched, cfg, lo,
                           master.derive(kStreamOuter).derive(static_cast<std::uint64_t>(t)));
        restore_head(params, inner.saved);

        StepRecord rec;
        rec.step = t;
        rec.qf_min = lo;
        rec.inner_loss = inner.loss;
        rec.outer_loss_mean = outer.loss_mean;
        rec.outer_loss_std = outer.loss_std;

        double psnr_acc = 0.0, survival_acc = 0.0;
        float max_delta = 0.0f, min_px = 1.0f, max_px = 0.0f;
        for (std::size_t i = 0; i < state.x_p.size(); ++i) {
            psnr_acc += psnr(state.x_p[i], state.clean_ref[i]);
            survival_acc += jpeg_survival(state.x_p[i], state.clean_ref[i], cfg.survival_qf);
            max_delta = std::max(max_delta, max_abs_diff(state.x_p[i], state.clean_ref[i]));
            for (float v : state.x_p[i].data) {
                min_px = std::min(min_px, v);
                max_px = std::max(max_px, v);
            }
        }
        rec.psnr = static_cast<float>(psnr_acc / static_cast<double>(state.x_p.size()));
        rec.survival = static_cast<float>(survival_acc / static_cast<double>(state.x_p.size()));
        rec.max_delta = max_delta;
        rec.min_pixel = min_px;
        rec.max_pixel = max_px;

        if (max_delta > cfg.epsilon + 1e-6f)
            throw InvariantViolation(t, "l-inf budget exceeded: max|delta| = " +
                                            std::to_string(max_delta));
        if (min_px < 0.0f || max_px > 1.0f)
            throw InvariantViolation(t, "pixel range left [0,1]");

        state.log.push_back(rec);
        state.step = t + 1;
    }

    return {std::move(state.x_p), std::move(state.log)};
}

std::string craft_log_csv(const std::vector<StepRecord>& log) {
    std::string out = "step,qf_min,inner_loss,outer_loss_mean,outer_loss_std,psnr,survival\n";
    char buf[224];
    for (const StepRecord& r : log) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.step, r.qf_min,
                      r.inner_loss, r.outer_loss_mean, r.outer_loss_std, r.psnr, r.survival);
        out += buf;
    }
    return out;
}

}  // namespace jpegrad
