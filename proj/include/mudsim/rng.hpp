#pragma once

#include <cstdint>
#include <cmath>
#include <complex>

namespace mudsim {

// splitmix64 finalizer; used to derive independent seed streams from a
// master seed plus an arbitrary tag chain.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master) { return splitmix64(master); }

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, Tags... rest) {
    return derive_seed(splitmix64(master ^ splitmix64(tag)), rest...);
}

// Small counter-based generator (xoshiro-style mixing via splitmix64 on a
// counter). Output is identical on every platform, which the reproducibility
// contract of the harness depends on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)), counter_(0) {}

    std::uint64_t next_u64() { return splitmix64(state_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]; safe for log()
    double next_double_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller pair of independent standard normals
    std::complex<double> next_gaussian_pair() {
        const double u1 = next_double_pos();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

    // antipodal symbol, equiprobable
    double rademacher() { return (next_u64() & 1) ? -1.0 : 1.0; }

private:
    std::uint64_t state_;
    std::uint64_t counter_;
};

} // namespace mudsim
