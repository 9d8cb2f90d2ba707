#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>

namespace wpt {

// SplitMix64 mixing step; spreads user seeds and derives stream seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of stream k derived from a master seed. The Monte Carlo harness gives
// realization r the streams 2r (harvester link) and 2r+1 (information-receiver
// link), so realizations are independent and runs reproducible regardless of
// execution order.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t k) {
    return splitmix64(master + (k + 1) * 0x9e3779b97f4a7c15ULL);
}

// Deterministic random stream. std::mt19937_64 output is pinned by the
// standard; the Gaussian transform is an explicit Box-Muller so draws do not
// depend on the standard library's distribution implementations.
//
// Streams are caller-owned. A stream must not be shared across threads;
// distinct streams may be used concurrently.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    std::pair<double, double> normal_pair() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * kPi * uniform();
        return {r * std::cos(th), r * std::sin(th)};
    }

    // One standard normal draw; a fresh Box-Muller pair per call, second value
    // discarded, so there is no hidden carry-over state.
    double normal() { return normal_pair().first; }

    // Complex Gaussian with the mean on the real axis and the given total
    // variance split evenly between real and imaginary parts.
    std::complex<double> complex_normal(double mean_re, double total_variance) {
        const auto [z0, z1] = normal_pair();
        const double s = std::sqrt(0.5 * total_variance);
        return {mean_re + s * z0, s * z1};
    }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;
    std::mt19937_64 eng_;
};

}  // namespace wpt
