#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jpegrad/image.hpp"
#include "jpegrad/rng.hpp"

namespace jpegrad {

/// 3x3 convolution, stride 1, zero padding 1.
struct ConvLayer {
    int in_ch = 0;
    int out_ch = 0;
    std::vector<float> weights;  // [out][in][3][3]
    std::vector<float> bias;     // [out]
};

/// Trainable state: the head convolution plus the per-tag condition biases.
struct HeadState {
    std::vector<float> weights;
    std::vector<float> bias;
    std::vector<float> cond_bias;
};

/// Desk-scale denoiser: a frozen two-layer convolutional backbone
/// (3 -> 16 -> 16 channels, softplus between) and a trainable head
/// (16 -> 3) with an additive per-channel condition bias selected by tag.
/// Only the head and the condition biases are ever updated.
struct SurrogateParams {
    ConvLayer conv1, conv2;       // frozen after construction
    ConvLayer head;               // trainable
    std::vector<float> cond_bias; // [num_tags][3], trainable
    int num_tags = 2;
    std::uint64_t seed = 0;
};

/// alpha_t = sqrt(alpha_bar[t]), sigma_t = sqrt(1 - alpha_bar[t]);
/// alpha^2 + sigma^2 = 1 by construction.
struct NoiseSchedule {
    int t_diff = 100;
    std::vector<float> alpha_bar;  // monotone decreasing, in (0,1]

    /// Linear alpha_bar from `first` down to `last` over t_diff steps.
    static NoiseSchedule linear(int t_diff = 100, float first = 0.9999f, float last = 0.02f);

    float alpha(int t) const;
    float sigma(int t) const;
};

/// All weights and biases uniform in [-k, k] with k = 1/sqrt(fan_in);
/// deterministic given the seed.
SurrogateParams init_surrogate(std::uint64_t seed);

/// Denoiser forward pass on an H x W x 3 input.
ImageTensor surrogate_apply(const SurrogateParams& params, const ImageTensor& z, int cond_tag);

struct DenoiseLossResult {
    float loss = 0.0f;
    std::vector<float> per_sample;
};

/// Monte Carlo denoising objective: mean over n draws of
/// (eps ~ N(0,I), t ~ U{1..t_diff}) of w_t * mean((D(alpha_t x + sigma_t eps, c) - x)^2)
/// with w_t = 1. The rng is taken by value so a saved copy replays the same
/// draws (loss_vjp_wrt_input pairs with the forward this way).
DenoiseLossResult denoise_loss(const SurrogateParams& params, const NoiseSchedule& sched,
                               const ImageTensor& x, int cond_tag, int n_samples, Rng rng);

/// Exact gradient of denoise_loss w.r.t. x, params held fixed, same draws.
Cotangent loss_vjp_wrt_input(const SurrogateParams& params, const NoiseSchedule& sched,
                             const ImageTensor& x, int cond_tag, int n_samples, Rng rng);

/// Loss and input gradient from one shared set of draws.
struct DenoiseEval {
    float loss = 0.0f;
    std::vector<float> per_sample;
    Cotangent input_grad;
};
DenoiseEval denoise_loss_and_input_grad(const SurrogateParams& params,
                                        const NoiseSchedule& sched, const ImageTensor& x,
                                        int cond_tag, int n_samples, Rng rng);

/// One plain SGD step on the head (weights, bias, condition biases),
/// minimizing the mean denoising loss over the batch with one draw per
/// image. The backbone is untouched. Returns the pre-step batch loss.
float inner_step(SurrogateParams& params, const NoiseSchedule& sched,
                 const std::vector<ImageTensor>& batch, int cond_tag, float lr, Rng rng);

HeadState snapshot_head(const SurrogateParams& params);
/// Bit-exact restore; throws UsageError on an architecture mismatch.
void restore_head(SurrogateParams& params, const HeadState& state);

/// Flat binary serialization: magic, version, seed, layer dims, then 32-bit
/// values in row-major order.
void save_surrogate(const std::string& path, const SurrogateParams& params);
SurrogateParams load_surrogate(const std::string& path);

}  // namespace jpegrad
