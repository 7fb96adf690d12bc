#include "jpegrad/surrogate.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "jpegrad/errors.hpp"

namespace jpegrad {

namespace {

constexpr int kKernel = 3;
constexpr int kPad = 1;
constexpr int kHidden = 16;
constexpr float kWt = 1.0f;  // Eq-level weighting, fixed to 1

double softplus(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::fabs(v))); }
double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

ConvLayer make_conv(int in_ch, int out_ch, Rng& rng) {
    ConvLayer l;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.weights.resize(static_cast<std::size_t>(out_ch) * in_ch * kKernel * kKernel);
    l.bias.resize(out_ch);
    const float k = 1.0f / std::sqrt(static_cast<float>(in_ch * kKernel * kKernel));
    for (float& w : l.weights) w = rng.uniform(-k, k);
    for (float& b : l.bias) b = rng.uniform(-k, k);
    return l;
}

ImageTensor conv_forward(const ConvLayer& l, const ImageTensor& x) {
    if (x.channels != l.in_ch) throw ShapeError("conv: channel mismatch");
    ImageTensor out(x.height, x.width, l.out_ch);
    for (int y = 0; y < x.height; ++y) {
        for (int xx = 0; xx < x.width; ++xx) {
            for (int oc = 0; oc < l.out_ch; ++oc) {
                double s = l.bias[oc];
                for (int ic = 0; ic < l.in_ch; ++ic) {
                    for (int dy = 0; dy < kKernel; ++dy) {
                        const int sy = y + dy - kPad;
                        if (sy < 0 || sy >= x.height) continue;
                        for (int dx = 0; dx < kKernel; ++dx) {
                            const int sx = xx + dx - kPad;
                            if (sx < 0 || sx >= x.width) continue;
                            const float w =
                                l.weights[((static_cast<std::size_t>(oc) * l.in_ch + ic) * kKernel + dy) *
                                              kKernel +
                                          dx];
                            s += static_cast<double>(w) * x.at(sy, sx, ic);
                        }
                    }
                }
                out.at(y, xx, oc) = static_cast<float>(s);
            }
        }
    }
    return out;
}

// Gradient w.r.t. the conv input: correlation of gout with the flipped kernel.
ImageTensor conv_input_grad(const ConvLayer& l, const Cotangent& gout, int h, int w) {
    Cotangent gin(h, w, l.in_ch, 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            for (int ic = 0; ic < l.in_ch; ++ic) {
                double s = 0.0;
                for (int oc = 0; oc < l.out_ch; ++oc) {
                    for (int dy = 0; dy < kKernel; ++dy) {
                        const int oy = y - dy + kPad;
                        if (oy < 0 || oy >= h) continue;
                        for (int dx = 0; dx < kKernel; ++dx) {
                            const int ox = xx - dx + kPad;
                            if (ox < 0 || ox >= w) continue;
                            const float wv =
                                l.weights[((static_cast<std::size_t>(oc) * l.in_ch + ic) * kKernel + dy) *
                                              kKernel +
                                          dx];
                            s += static_cast<double>(wv) * gout.at(oy, ox, oc);
                        }
                    }
                }
                gin.at(y, xx, ic) = static_cast<float>(s);
            }
        }
    }
    return gin;
}

struct HeadGrads {
    std::vector<double> weights, bias, cond_bias;

    void init(const SurrogateParams& p) {
        weights.assign(p.head.weights.size(), 0.0);
        bias.assign(p.head.bias.size(), 0.0);
        cond_bias.assign(p.cond_bias.size(), 0.0);
    }
};

void accumulate_head_grads(const ConvLayer& head, const ImageTensor& input,
                           const Cotangent& gout, int cond_tag, HeadGrads& grads) {
    const int h = input.height, w = input.width;
    for (int oc = 0; oc < head.out_ch; ++oc) {
        double gb = 0.0;
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) gb += gout.at(y, xx, oc);
        grads.bias[oc] += gb;
        grads.cond_bias[static_cast<std::size_t>(cond_tag) * head.out_ch + oc] += gb;
    }
    for (int oc = 0; oc < head.out_ch; ++oc) {
        for (int ic = 0; ic < head.in_ch; ++ic) {
            for (int dy = 0; dy < kKernel; ++dy) {
                for (int dx = 0; dx < kKernel; ++dx) {
                    double s = 0.0;
                    for (int y = 0; y < h; ++y) {
                        const int sy = y + dy - kPad;
                        if (sy < 0 || sy >= h) continue;
                        for (int xx = 0; xx < w; ++xx) {
                            const int sx = xx + dx - kPad;
                            if (sx < 0 || sx >= w) continue;
                            s += static_cast<double>(gout.at(y, xx, oc)) * input.at(sy, sx, ic);
                        }
                    }
                    grads.weights[((static_cast<std::size_t>(oc) * head.in_ch + ic) * kKernel + dy) *
                                      kKernel +
                                  dx] += s;
                }
            }
        }
    }
}

struct NetTrace {
    ImageTensor z1, a1, z2, a2, out;
};

ImageTensor apply_softplus(const ImageTensor& z) {
    ImageTensor a(z.height, z.width, z.channels);
    for (std::size_t i = 0; i < z.data.size(); ++i)
        a.data[i] = static_cast<float>(softplus(z.data[i]));
    return a;
}

NetTrace net_forward(const SurrogateParams& p, const ImageTensor& z0, int cond_tag) {
    NetTrace t;
    t.z1 = conv_forward(p.conv1, z0);
    t.a1 = apply_softplus(t.z1);
    t.z2 = conv_forward(p.conv2, t.a1);
    t.a2 = apply_softplus(t.z2);
    t.out = conv_forward(p.head, t.a2);
    for (int y = 0; y < t.out.height; ++y)
        for (int xx = 0; xx < t.out.width; ++xx)
            for (int c = 0; c < t.out.channels; ++c)
                t.out.at(y, xx, c) +=
                    p.cond_bias[static_cast<std::size_t>(cond_tag) * p.head.out_ch + c];
    return t;
}

// Pulls gout back to the network input; optionally accumulates head grads.
Cotangent net_backward(const SurrogateParams& p, const NetTrace& t, const ImageTensor& z0,
                       const Cotangent& gout, int cond_tag, HeadGrads* head_grads) {
    if (head_grads) accumulate_head_grads(p.head, t.a2, gout, cond_tag, *head_grads);
    Cotangent ga2 = conv_input_grad(p.head, gout, z0.height, z0.width);
    for (std::size_t i = 0; i < ga2.data.size(); ++i)
        ga2.data[i] = static_cast<float>(ga2.data[i] * sigmoid(t.z2.data[i]));
    Cotangent ga1 = conv_input_grad(p.conv2, ga2, z0.height, z0.width);
    for (std::size_t i = 0; i < ga1.data.size(); ++i)
        ga1.data[i] = static_cast<float>(ga1.data[i] * sigmoid(t.z1.data[i]));
    return conv_input_grad(p.conv1, ga1, z0.height, z0.width);
}

void validate_loss_args(const ImageTensor& x, int n_samples) {
    if (x.channels != 3) throw ShapeError("denoise_loss: expected a 3-channel image");
    if (n_samples < 1) throw ArgumentError("denoise_loss: n_samples must be >= 1");
}

// Shared Monte Carlo core. Draw order per sample: t, then eps row-major.
DenoiseEval denoise_eval(const SurrogateParams& params, const NoiseSchedule& sched,
                         const ImageTensor& x, int cond_tag, int n_samples, Rng& rng,
                         bool want_input_grad, HeadGrads* head_grads) {
    validate_loss_args(x, n_samples);
    if (cond_tag < 0 || cond_tag >= params.num_tags)
        throw ArgumentError("denoise_loss: unknown condition tag");

    const std::size_t n_elems = x.data.size();
    DenoiseEval result;
    result.per_sample.reserve(n_samples);
    if (want_input_grad) result.input_grad = zeros_like(x);

    std::vector<double> grad_acc;
    if (want_input_grad) grad_acc.assign(n_elems, 0.0);

    double loss_acc = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const int t = rng.uniform_int(1, sched.t_diff);
        const float a = sched.alpha(t - 1);
        const float sg = sched.sigma(t - 1);

        ImageTensor z0(x.height, x.width, x.channels);
        for (std::size_t i = 0; i < n_elems; ++i)
            z0.data[i] = a * x.data[i] + sg * rng.normal();

        const NetTrace trace = net_forward(params, z0, cond_tag);

        double sq = 0.0;
        for (std::size_t i = 0; i < n_elems; ++i) {
            const double r = static_cast<double>(trace.out.data[i]) - x.data[i];
            sq += r * r;
        }
        const double sample_loss = kWt * sq / static_cast<double>(n_elems);
        result.per_sample.push_back(static_cast<float>(sample_loss));
        loss_acc += sample_loss;

        if (want_input_grad || head_grads) {
            // d(sample_loss)/d(pred) = 2*(pred - x)/N
            Cotangent gpred(x.height, x.width, x.channels);
            const float scale = 2.0f * kWt / static_cast<float>(n_elems);
            for (std::size_t i = 0; i < n_elems; ++i)
                gpred.data[i] = scale * (trace.out.data[i] - x.data[i]);

            const Cotangent gz0 =
                net_backward(params, trace, z0, gpred, cond_tag, head_grads);
            if (want_input_grad) {
                // x enters the noised input (factor alpha) and the target (-1).
                for (std::size_t i = 0; i < n_elems; ++i)
                    grad_acc[i] += static_cast<double>(a) * gz0.data[i] - gpred.data[i];
            }
        }
    }

    result.loss = static_cast<float>(loss_acc / n_samples);
    if (want_input_grad) {
        const double inv_n = 1.0 / n_samples;
        for (std::size_t i = 0; i < n_elems; ++i)
            result.input_grad.data[i] = static_cast<float>(grad_acc[i] * inv_n);
    }
    return result;
}

}  // namespace

NoiseSchedule NoiseSchedule::linear(int t_diff, float first, float last) {
    if (t_diff < 1) throw ArgumentError("noise schedule: t_diff must be >= 1");
    NoiseSchedule s;
    s.t_diff = t_diff;
    s.alpha_bar.resize(t_diff);
    for (int t = 0; t < t_diff; ++t) {
        const double frac = t_diff == 1 ? 0.0 : static_cast<double>(t) / (t_diff - 1);
        s.alpha_bar[t] = static_cast<float>(first + frac * (static_cast<double>(last) - first));
    }
    return s;
}

float NoiseSchedule::alpha(int t) const { return std::sqrt(alpha_bar.at(t)); }
float NoiseSchedule::sigma(int t) const { return std::sqrt(1.0f - alpha_bar.at(t)); }

SurrogateParams init_surrogate(std::uint64_t seed) {
    Rng rng(seed);
    SurrogateParams p;
    p.seed = seed;
    p.conv1 = make_conv(3, kHidden, rng);
    p.conv2 = make_conv(kHidden, kHidden, rng);
    p.head = make_conv(kHidden, 3, rng);
    p.cond_bias.resize(static_cast<std::size_t>(p.num_tags) * 3);
    const float k = 1.0f / std::sqrt(static_cast<float>(kHidden * kKernel * kKernel));
    for (float& b : p.cond_bias) b = rng.uniform(-k, k);
    return p;
}

ImageTensor surrogate_apply(const SurrogateParams& params, const ImageTensor& z, int cond_tag) {
    return net_forward(params, z, cond_tag).out;
}

DenoiseLossResult denoise_loss(const SurrogateParams& params, const NoiseSchedule& sched,
                               const ImageTensor& x, int cond_tag, int n_samples, Rng rng) {
    DenoiseEval e = denoise_eval(params, sched, x, cond_tag, n_samples, rng, false, nullptr);
    return {e.loss, std::move(e.per_sample)};
}

Cotangent loss_vjp_wrt_input(const SurrogateParams& params, const NoiseSchedule& sched,
                             const ImageTensor& x, int cond_tag, int n_samples, Rng rng) {
    return denoise_eval(params, sched, x, cond_tag, n_samples, rng, true, nullptr).input_grad;
}

DenoiseEval denoise_loss_and_input_grad(const SurrogateParams& params,
                                        const NoiseSchedule& sched, const ImageTensor& x,
                                        int cond_tag, int n_samples, Rng rng) {
    return denoise_eval(params, sched, x, cond_tag, n_samples, rng, true, nullptr);
}

float inner_step(SurrogateParams& params, const NoiseSchedule& sched,
                 const std::vector<ImageTensor>& batch, int cond_tag, float lr, Rng rng) {
    if (batch.empty()) throw ArgumentError("inner_step: empty batch");
    if (lr < 0.0f) throw ArgumentError("inner_step: lr must be non-negative");

    HeadGrads grads;
    grads.init(params);
    double loss_acc = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Rng sample_rng = rng.derive(i);
        DenoiseEval e =
            denoise_eval(params, sched, batch[i], cond_tag, 1, sample_rng, false, &grads);
        loss_acc += e.loss;
    }

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < params.head.weights.size(); ++i)
        params.head.weights[i] -= static_cast<float>(lr * grads.weights[i] * inv_b);
    for (std::size_t i = 0; i < params.head.bias.size(); ++i)
        params.head.bias[i] -= static_cast<float>(lr * grads.bias[i] * inv_b);
    for (std::size_t i = 0; i < params.cond_bias.size(); ++i)
        params.cond_bias[i] -= static_cast<float>(lr * grads.cond_bias[i] * inv_b);

    return static_cast<float>(loss_acc * inv_b);
}

HeadState snapshot_head(const SurrogateParams& params) {
    return {params.head.weights, params.head.bias, params.cond_bias};
}

void restore_head(SurrogateParams& params, const HeadState& state) {
    if (state.weights.size() != params.head.weights.size() ||
        state.bias.size() != params.head.bias.size() ||
        state.cond_bias.size() != params.cond_bias.size())
        throw UsageError("restore_head: architecture mismatch");
    params.head.weights = state.weights;
    params.head.bias = state.bias;
    params.cond_bias = state.cond_bias;
}

namespace {

constexpr std::uint32_t kMagic = 0x4a525347;  // "JRSG"
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& f, std::uint32_t v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ofstream& f, std::uint64_t v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_floats(std::ofstream& f, const std::vector<float>& v) {
    write_u64(f, v.size());
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::uint32_t read_u32(std::ifstream& f) {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t read_u64(std::ifstream& f) {
    std::uint64_t v = 0;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::vector<float> read_floats(std::ifstream& f) {
    const std::uint64_t n = read_u64(f);
    std::vector<float> v(n);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(float)));
    return v;
}

void write_conv(std::ofstream& f, const ConvLayer& l) {
    write_u32(f, static_cast<std::uint32_t>(l.in_ch));
    write_u32(f, static_cast<std::uint32_t>(l.out_ch));
    write_floats(f, l.weights);
    write_floats(f, l.bias);
}

ConvLayer read_conv(std::ifstream& f) {
    ConvLayer l;
    l.in_ch = static_cast<int>(read_u32(f));
    l.out_ch = static_cast<int>(read_u32(f));
    l.weights = read_floats(f);
    l.bias = read_floats(f);
    return l;
}

}  // namespace

void save_surrogate(const std::string& path, const SurrogateParams& params) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_surrogate: cannot open " + path);
    write_u32(f, kMagic);
    write_u32(f, kVersion);
    write_u64(f, params.seed);
    write_u32(f, static_cast<std::uint32_t>(params.num_tags));
    write_conv(f, params.conv1);
    write_conv(f, params.conv2);
    write_conv(f, params.head);
    write_floats(f, params.cond_bias);
    if (!f) throw IoError("save_surrogate: write failed for " + path);
}

SurrogateParams load_surrogate(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_surrogate: cannot open " + path);
    if (read_u32(f) != kMagic) throw IoError("load_surrogate: bad magic in " + path);
    if (read_u32(f) != kVersion) throw IoError("load_surrogate: unsupported version");
    SurrogateParams p;
    p.seed = read_u64(f);
    p.num_tags = static_cast<int>(read_u32(f));
    p.conv1 = read_conv(f);
    p.conv2 = read_conv(f);
    p.head = read_conv(f);
    p.cond_bias = read_floats(f);
    if (!f) throw IoError("load_surrogate: truncated file " + path);
    return p;
}

}  // namespace jpegrad
