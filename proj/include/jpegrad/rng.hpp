#pragma once

#include <cstdint>
#include <random>

namespace jpegrad {

/// Deterministic random generator. std::mt19937_64 supplies the raw stream;
/// the distribution transforms are fixed here because the standard library's
/// distribution algorithms are implementation-defined and runs must be
/// reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform();
    /// Uniform float in [lo, hi).
    float uniform(float lo, float hi);
    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi);
    /// Standard normal (Box-Muller).
    float normal();

    /// Independent child stream; derivation depends only on the construction
    /// seed and `stream`, never on how much of this generator was consumed.
    Rng derive(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace jpegrad
