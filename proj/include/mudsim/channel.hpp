#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mudsim/rng.hpp"

namespace mudsim {

/// Per-user sequence of complex flat-fading gains, one sample per symbol.
struct FadingTrace {
    std::vector<std::complex<double>> gains;
    double doppler = 0.0; // normalized Doppler rate f_d * T_b
    int user_id = 0;

    std::size_t length() const { return gains.size(); }
};

/// Two-sided noise power spectral density; complex chip noise carries
/// variance n0/2 per quadrature component.
struct NoiseSpec {
    double n0 = 0.0;
};

inline NoiseSpec make_noise_spec(double n0) {
    if (n0 < 0.0) throw std::invalid_argument("NoiseSpec: n0 must be >= 0");
    return NoiseSpec{n0};
}

/// N0 = Es / (bits_per_symbol * 10^(ebn0_db/10)).
inline NoiseSpec ebn0_to_n0(double ebn0_db, int bits_per_symbol, double symbol_energy) {
    if (symbol_energy <= 0.0) throw std::invalid_argument("ebn0_to_n0: symbol_energy must be > 0");
    if (bits_per_symbol < 1) throw std::invalid_argument("ebn0_to_n0: bits_per_symbol must be >= 1");
    const double snr = std::pow(10.0, ebn0_db / 10.0);
    return NoiseSpec{symbol_energy / (bits_per_symbol * snr)};
}

/// Rayleigh flat-fading trace via a sum-of-sinusoids Clarke model
/// (Zheng-Xiao arrival-angle arrangement). Real and imaginary parts are
/// zero-mean with variance 1/2 each and autocorrelation approximating
/// J_0(2 pi fd_tb tau).
inline FadingTrace rayleigh_trace(std::size_t symbols, double fd_tb, std::uint64_t seed,
                                  std::size_t num_angles = 64, int user_id = 0) {
    if (symbols < 1) throw std::invalid_argument("rayleigh_trace: symbol count must be >= 1");
    if (fd_tb <= 0.0 || fd_tb >= 0.5)
        throw std::invalid_argument("rayleigh_trace: fd_tb must be in (0, 0.5); "
                                    "use constant_trace for a static channel");

    Rng rng(seed);
    const double theta = rng.uniform(-M_PI, M_PI);
    std::vector<double> wc(num_angles), ws(num_angles), phi(num_angles), psi(num_angles);
    const double wd = 2.0 * M_PI * fd_tb;
    for (std::size_t n = 0; n < num_angles; ++n) {
        const double alpha =
            (2.0 * M_PI * static_cast<double>(n + 1) - M_PI + theta) / (4.0 * num_angles);
        wc[n] = wd * std::cos(alpha);
        ws[n] = wd * std::sin(alpha);
        phi[n] = rng.uniform(-M_PI, M_PI);
        psi[n] = rng.uniform(-M_PI, M_PI);
    }

    FadingTrace trace;
    trace.doppler = fd_tb;
    trace.user_id = user_id;
    trace.gains.resize(symbols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(num_angles));
    for (std::size_t m = 0; m < symbols; ++m) {
        double re = 0.0, im = 0.0;
        for (std::size_t n = 0; n < num_angles; ++n) {
            re += std::cos(wc[n] * m + phi[n]);
            im += std::cos(ws[n] * m + psi[n]);
        }
        trace.gains[m] = {re * scale, im * scale};
    }
    return trace;
}

/// Static channel with a fixed complex gain for every symbol.
inline FadingTrace constant_trace(std::size_t symbols, std::complex<double> gain,
                                  int user_id = 0) {
    if (symbols < 1) throw std::invalid_argument("constant_trace: symbol count must be >= 1");
    FadingTrace trace;
    trace.doppler = 0.0;
    trace.user_id = user_id;
    trace.gains.assign(symbols, gain);
    return trace;
}

/// i.i.d. complex Gaussian chip noise, variance n0/2 per component.
inline std::vector<std::complex<double>> awgn_frame(const NoiseSpec& noise, std::size_t len,
                                                    Rng& rng) {
    if (len < 1) throw std::invalid_argument("awgn_frame: len must be >= 1");
    std::vector<std::complex<double>> v(len);
    if (noise.n0 == 0.0) return v;
    const double sigma = std::sqrt(noise.n0 / 2.0);
    for (auto& s : v) s = sigma * rng.next_gaussian_pair();
    return v;
}

} // namespace mudsim
