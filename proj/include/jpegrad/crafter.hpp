#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jpegrad/image.hpp"
#include "jpegrad/rng.hpp"
#include "jpegrad/surrogate.hpp"
#include "jpegrad/transforms.hpp"

namespace jpegrad {

struct CraftConfig {
    float epsilon = 8.0f / 255.0f;  // l-inf budget
    float alpha = 0.5f / 255.0f;    // PGD step size
    int steps = 200;                // C (0 permitted: output equals input)
    int eot_samples = 4;            // J
    int inner_unroll = 1;           // K (0 permitted: inner loop is a no-op)
    float inner_lr = 1e-3f;
    int qf_max = 95;
    int qf_min_final = 50;
    int survival_qf = 75;           // reference QF for the logged survival column
    int cond_tag = 0;
    std::uint64_t seed = 0;

    CurriculumConfig curriculum() const { return {qf_max, qf_min_final, std::max(1, steps)}; }
};

struct StepRecord {
    int step = 0;
    int qf_min = 0;
    float inner_loss = 0.0f;
    float outer_loss_mean = 0.0f;
    float outer_loss_std = 0.0f;
    float psnr = 0.0f;
    float survival = 0.0f;
    // Audit fields (not part of the CSV contract).
    float max_delta = 0.0f;
    float min_pixel = 0.0f;
    float max_pixel = 0.0f;
};

struct CraftState {
    std::vector<ImageTensor> x_p;
    std::vector<ImageTensor> clean_ref;  // never mutated
    int step = 0;
    std::vector<StepRecord> log;
};

/// delta = clamp(x - ref, -eps, eps); result = clamp(ref + delta, 0, 1).
ImageTensor project_linf(const ImageTensor& x, const ImageTensor& ref, float epsilon);

struct InnerUpdateResult {
    HeadState saved;   // head snapshot taken before the K steps
    float loss = 0.0f; // mean inner loss over the K steps (0 when K = 0)
};

/// Snapshot the head, then K SGD steps on it using transformed poisoned
/// images (no gradient reaches the images). The caller restores the head
/// from `saved` after the outer step.
InnerUpdateResult inner_update(CraftState& state, SurrogateParams& params,
                               const NoiseSchedule& sched, const CraftConfig& cfg, int qf_lo,
                               Rng rng);

struct OuterStepStats {
    float loss_mean = 0.0f;
    float loss_std = 0.0f;
    int skipped_samples = 0;  // zero-gradient EOT samples dropped from the mean
};

/// One EOT-averaged ascent step: per image, J transform draws over
/// [qf_lo, cfg.qf_max], per-sample input gradients normalized by their
/// global L2 norm, averaged, then x += alpha * sign(avg) and the hard
/// projection. The loss is maximized.
OuterStepStats outer_pgd_step(CraftState& state, const SurrogateParams& params,
                              const NoiseSchedule& sched, const CraftConfig& cfg, int qf_lo,
                              Rng rng);

struct CraftResult {
    std::vector<ImageTensor> protected_images;
    std::vector<StepRecord> log;
};

/// The full crafting loop: per step, advance the curriculum, run the inner
/// surrogate update, take the outer PGD step against the updated head,
/// restore the head, then audit and log. Deterministic given cfg.seed.
CraftResult craft(const std::vector<ImageTensor>& clean, const CraftConfig& cfg);

std::string craft_log_csv(const std::vector<StepRecord>& log);

}  // namespace jpegrad
