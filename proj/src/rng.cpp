#include "jpegrad/rng.hpp"

#include <cmath>

#include "jpegrad/errors.hpp"

namespace jpegrad {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

double Rng::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

float Rng::uniform(float lo, float hi) {
    return lo + static_cast<float>(uniform() * (static_cast<double>(hi) - lo));
}

int Rng::uniform_int(int lo, int hi) {
    if (lo > hi) throw ArgumentError("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
    return lo + static_cast<int>(gen_() % span);
}

float Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return static_cast<float>(spare_);
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return static_cast<float>(r * std::cos(theta));
}

Rng Rng::derive(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream ^ 0xa0761d6478bd642fULL)));
}

}  // namespace jpegrad
