#pragma once

#include <array>
#include <string>
#include <vector>

#include "jpegrad/image.hpp"
#include "jpegrad/rng.hpp"
#include "jpegrad/surrogate.hpp"

namespace jpegrad {

/// 10*log10(1/MSE) on the [0,1] scale; +inf when the images are identical.
float psnr(const ImageTensor& a, const ImageTensor& b);

struct PerturbationStats {
    float max_delta;   // max |delta| in /255 units
    float mean_delta;  // mean |delta| in /255 units
    float coverage;    // fraction of elements with |delta| > 0.5/255
};
PerturbationStats perturbation_stats(const ImageTensor& x_p, const ImageTensor& x_c);

/// sqrt( cos(d_before, d_after) * min(1, |d_after|/|d_before|) ) with the
/// deltas flattened and L2 norms; a negative cosine clamps the product to 0
/// before the sqrt. Both deltas zero -> 1; exactly one zero -> 0.
float survival_from_deltas(const ImageTensor& d_before, const ImageTensor& d_after);

/// survival_from_deltas with d_before = x_p - x_c and d_after measured
/// through the hard codec at `qf`.
float jpeg_survival(const ImageTensor& x_p, const ImageTensor& x_c, int qf);

enum class CodecKind { kDiff, kHard };

/// Fraction of input elements receiving a non-zero cotangent from a random
/// non-zero output cotangent through the codec's vjp. The hard codec exposes
/// no vjp and scores 0 by definition. Measured on the unclamped chain so the
/// result reflects the quantization path, not box saturation.
float grad_coverage(CodecKind kind, const ImageTensor& x, int qf, Rng& rng);

struct SurvivalHeatmap {
    std::array<float, 64> grid{};  // [u*8+v], each in [0,1]
    int qf = 0;
    int n_blocks = 0;
};

/// Per (u,v): min(1, sum_blocks |F_hat| / sum_blocks |F|) on the luma plane,
/// F pre-quantization and F_hat after quantize-dequantize. Cells whose
/// denominator is below 1e-8 report 1 (nothing to destroy).
SurvivalHeatmap dct_survival_heatmap(const ImageTensor& x, int qf);

/// Zone partition of the 8x8 grid: DC = {(0,0)}; low = {1 <= u+v <= 2};
/// mid = {3 <= u+v <= 9}; high = {u+v >= 10}.
struct ZoneReport {
    float dc = 0.0f, low = 0.0f, mid = 0.0f, high = 0.0f;
};
ZoneReport zone_survival(const SurvivalHeatmap& h);

struct ProtectionRow {
    int qf;
    float clean_mean, clean_std;
    float prot_mean, prot_std;
    float delta;  // prot_mean - clean_mean
};
struct ProtectionTable {
    std::vector<ProtectionRow> rows;
};

/// The standard evaluation QF sweep.
const std::vector<int>& protection_qfs();

/// For each qf: hard-compress both sets, evaluate the denoising loss with n
/// draws per image. Noise draws are shared across conditions (paired
/// sampling keeps the deltas low-variance at small n).
ProtectionTable eval_protection(const std::vector<ImageTensor>& clean,
                                const std::vector<ImageTensor>& protected_images,
                                const SurrogateParams& params, const NoiseSchedule& sched,
                                const std::vector<int>& qfs, int n_samples, int cond_tag,
                                std::uint64_t noise_seed);

std::string protection_table_csv(const ProtectionTable& table);
std::string zone_report_csv(const ZoneReport& z);
std::string heatmap_csv(const SurvivalHeatmap& h);

}  // namespace jpegrad
