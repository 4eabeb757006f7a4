#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mudsim/channel.hpp"
#include "mudsim/rng.hpp"
#include "mudsim/sequences.hpp"

namespace mudsim {

/// One user's transmit state: antipodal data symbols, spreading code and
/// fading trace, all indexed by the same symbol counter.
struct UserFrame {
    std::vector<double> bits; // b_k(m) in {-1, +1}
    SpreadingCode code;
    FadingTrace trace;
};

/// Composite received chip vector for one symbol period.
struct ReceivedFrame {
    std::vector<std::complex<double>> samples;
    std::size_t symbol_index = 0;
};

/// BPSK mapping: bit 0 -> +1, bit 1 -> -1.
inline double bpsk_symbol(int bit) { return bit ? -1.0 : 1.0; }

/// i.i.d. equiprobable antipodal symbol stream.
inline std::vector<double> modulate_bpsk(Rng& rng, std::size_t symbols) {
    if (symbols < 1) throw std::invalid_argument("modulate_bpsk: symbol count must be >= 1");
    std::vector<double> out(symbols);
    for (auto& b : out) b = rng.rademacher();
    return out;
}

/// r(m) = sum_k beta_k(m) b_k(m) c_k + v(m). Exact superposition at chip
/// rate, channel constant over the symbol.
inline ReceivedFrame compose_received(const std::vector<UserFrame>& users, const NoiseSpec& noise,
                                      std::size_t m, Rng& noise_rng) {
    if (users.empty()) throw std::invalid_argument("compose_received: no users");
    const std::size_t n = users.front().code.length();
    for (const auto& u : users) {
        if (u.code.length() != n)
            throw std::invalid_argument("compose_received: spreading factor mismatch across users");
        if (m >= u.bits.size() || m >= u.trace.length())
            throw std::invalid_argument("compose_received: symbol index out of range");
    }

    ReceivedFrame frame;
    frame.symbol_index = m;
    frame.samples = awgn_frame(noise, n, noise_rng);
    for (const auto& u : users) {
        const std::complex<double> amp = u.trace.gains[m] * u.bits[m];
        for (std::size_t i = 0; i < n; ++i) frame.samples[i] += amp * u.code.chips[i];
    }
    return frame;
}

} // namespace mudsim
