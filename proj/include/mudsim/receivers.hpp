#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mudsim/sequences.hpp"
#include "mudsim/transmitter.hpp"

namespace mudsim {

enum class ReceiverKind { mf, sic, pic, ba_sic, ba_pic };

inline const char* receiver_name(ReceiverKind k) {
    switch (k) {
        case ReceiverKind::mf: return "mf";
        case ReceiverKind::sic: return "sic";
        case ReceiverKind::pic: return "pic";
        case ReceiverKind::ba_sic: return "ba_sic";
        case ReceiverKind::ba_pic: return "ba_pic";
    }
    return "?";
}

/// Per user per symbol detection output. `estimate` is the joint
/// channel-times-data estimate; for adaptive receivers it carries the
/// scaling factor, elsewhere alpha stays 1.
struct DetectionRecord {
    int user = 0;
    std::size_t symbol = 0;
    int stage = 0;
    double z = 0.0;
    double estimate = 0.0;
    int bit = 1; // hard decision in {-1, +1}
    double alpha = 1.0;
};

inline int hard_bit(double z) { return z < 0.0 ? -1 : 1; } // z = 0 breaks to +1

inline double sign_of(double z) { return z < 0.0 ? -1.0 : 1.0; }

/// Real part of the e^{+j phi}-rotated frame; aligns the user whose
/// channel phase is phi onto the real axis.
inline std::vector<double> derotate(const ReceivedFrame& frame, double phi) {
    const std::complex<double> rot = std::polar(1.0, phi);
    std::vector<double> out(frame.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (rot * frame.samples[i]).real();
    return out;
}

inline double despread(const std::vector<double>& derotated, const std::vector<double>& taps) {
    double acc = 0.0;
    for (std::size_t i = 0; i < derotated.size(); ++i) acc += derotated[i] * taps[i];
    return acc;
}

inline DetectionRecord matched_filter(const ReceivedFrame& frame, const SpreadingCode& code,
                                      double phi, int user = 0) {
    if (code.length() != frame.samples.size())
        throw std::invalid_argument("matched_filter: code/frame length mismatch");
    DetectionRecord rec;
    rec.user = user;
    rec.symbol = frame.symbol_index;
    rec.z = despread(derotate(frame, phi), code.chips);
    rec.estimate = rec.z;
    rec.bit = hard_bit(rec.z);
    return rec;
}

namespace detail {

// residual -= a * e^{-j phi} * chips; the estimate is re-rotated back into
// the complex domain before subtraction.
inline void subtract_respread(std::vector<std::complex<double>>& residual, double a, double phi,
                              const std::vector<double>& chips) {
    const std::complex<double> amp = a * std::polar(1.0, -phi);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= amp * chips[i];
}

} // namespace detail

/// Multistage parallel cancellation. Stage 0 is the matched-filter bank;
/// stage l despreads r minus the respread stage l-1 estimates of all
/// other users. Returns stages 0..L, each holding one record per user.
/// `injected_stage0` substitutes the initial estimates (genie feeding for
/// oracle checks).
inline std::vector<std::vector<DetectionRecord>> conventional_pic(
    const ReceivedFrame& frame, const std::vector<SpreadingCode>& codes,
    const std::vector<double>& phases, int stages,
    const std::vector<DetectionRecord>* injected_stage0 = nullptr) {
    if (stages < 1) throw std::invalid_argument("conventional_pic: L must be >= 1");
    const std::size_t k_users = codes.size();

    std::vector<std::vector<DetectionRecord>> out;
    out.reserve(stages + 1);
    if (injected_stage0 != nullptr) {
        if (injected_stage0->size() != k_users)
            throw std::invalid_argument("conventional_pic: injected stage-0 size mismatch");
        out.push_back(*injected_stage0);
    } else {
        std::vector<DetectionRecord> bank(k_users);
        for (std::size_t k = 0; k < k_users; ++k)
            bank[k] = matched_filter(frame, codes[k], phases[k], static_cast<int>(k));
        out.push_back(bank);
    }

    for (int l = 1; l <= stages; ++l) {
        std::vector<DetectionRecord> next(k_users);
        for (std::size_t k = 0; k < k_users; ++k) {
            ReceivedFrame residual = frame;
            for (std::size_t j = 0; j < k_users; ++j) {
                if (j == k) continue;
                detail::subtract_respread(residual.samples, out[l - 1][j].z, phases[j],
                                          codes[j].chips);
            }
            next[k] = matched_filter(residual, codes[k], phases[k], static_cast<int>(k));
            next[k].stage = l;
        }
        out.push_back(std::move(next));
    }
    return out;
}

/// Successive cancellation: repeatedly despread the residual with every
/// not-yet-detected user's code, take the largest |z| (ties to the lowest
/// user index), respread and subtract. Records are returned in detection
/// order.
inline std::vector<DetectionRecord> conventional_sic(const ReceivedFrame& frame,
                                                     const std::vector<SpreadingCode>& codes,
                                                     const std::vector<double>& phases) {
    const std::size_t k_users = codes.size();
    ReceivedFrame residual = frame;
    std::vector<bool> done(k_users, false);
    std::vector<DetectionRecord> out;
    out.reserve(k_users);

    for (std::size_t stage = 0; stage < k_users; ++stage) {
        int best = -1;
        double best_z = 0.0;
        for (std::size_t u = 0; u < k_users; ++u) {
            if (done[u]) continue;
            const double z = despread(derotate(residual, phases[u]), codes[u].chips);
            if (best < 0 || std::fabs(z) > std::fabs(best_z)) {
                best = static_cast<int>(u);
                best_z = z;
            }
        }
        done[best] = true;
        DetectionRecord rec;
        rec.user = best;
        rec.symbol = frame.symbol_index;
        rec.stage = static_cast<int>(stage);
        rec.z = best_z;
        rec.estimate = best_z;
        rec.bit = hard_bit(best_z);
        out.push_back(rec);
        detail::subtract_respread(residual.samples, best_z, phases[best], codes[best].chips);
    }
    return out;
}

/// CMA-adapted despreader taps for one user.
struct DespreaderWeights {
    std::vector<double> w;
    double mu = 1e-4;
};

/// w' = w - mu * (|z| - 1) * sign(z) * r_derot. Constant-modulus target
/// R = 1 for unit-power BPSK; |z| = 1 is a fixed point.
inline DespreaderWeights cma_update(const DespreaderWeights& weights,
                                    const std::vector<double>& r_derot, double z) {
    if (weights.mu < 0.0) throw std::invalid_argument("cma_update: mu must be >= 0");
    DespreaderWeights next = weights;
    const double step = weights.mu * (std::fabs(z) - 1.0) * sign_of(z);
    for (std::size_t i = 0; i < next.w.size(); ++i) next.w[i] -= step * r_derot[i];
    return next;
}

/// alpha = mean |chip| / mean |weight|.
inline double scaling_factor(const DespreaderWeights& weights, const SpreadingCode& code) {
    double wbar = 0.0;
    for (double x : weights.w) wbar += std::fabs(x);
    wbar /= static_cast<double>(weights.w.size());
    if (wbar == 0.0) throw std::invalid_argument("scaling_factor: degenerate all-zero weights");
    double cbar = 0.0;
    for (double x : code.chips) cbar += std::fabs(x);
    cbar /= static_cast<double>(code.chips.size());
    return cbar / wbar;
}

/// Mutable per-trial adaptation state for the blind receivers: one weight
/// vector per user, single-writer. `diverged` latches once any weight norm
/// exceeds 1e3 times the code norm (bad step size).
struct AdaptiveState {
    std::vector<DespreaderWeights> users;
    bool diverged = false;

    static AdaptiveState init(const std::vector<SpreadingCode>& codes, double mu) {
        AdaptiveState st;
        st.users.reserve(codes.size());
        for (const auto& c : codes) st.users.push_back(DespreaderWeights{c.chips, mu});
        return st;
    }

    void check_divergence(const std::vector<SpreadingCode>& codes) {
        for (std::size_t k = 0; k < users.size(); ++k) {
            double wn = 0.0;
            for (double x : users[k].w) wn += x * x;
            if (wn > 1e6 * codes[k].energy()) diverged = true;
        }
    }
};

namespace detail {

inline void cma_update_inplace(DespreaderWeights& weights, const std::vector<double>& r_derot,
                               double z) {
    const double step = weights.mu * (std::fabs(z) - 1.0) * sign_of(z);
    for (std::size_t i = 0; i < weights.w.size(); ++i) weights.w[i] -= step * r_derot[i];
}

} // namespace detail

/// Blind adaptive SIC. At each stage the residual is despread with every
/// remaining user's weights; the strongest |z| wins, its estimate
/// alpha * z is respread and cancelled, and its weights take one CMA step
/// against the residual it was detected on. Every user's weights update
/// exactly once per symbol, at its own selection stage.
inline std::vector<DetectionRecord> ba_sic(const ReceivedFrame& frame,
                                           const std::vector<SpreadingCode>& codes,
                                           const std::vector<double>& phases,
                                           AdaptiveState& state) {
    const std::size_t k_users = codes.size();
    ReceivedFrame residual = frame;
    std::vector<bool> done(k_users, false);
    std::vector<DetectionRecord> out;
    out.reserve(k_users);

    for (std::size_t stage = 0; stage < k_users; ++stage) {
        int best = -1;
        double best_z = 0.0;
        std::vector<double> best_derot;
        for (std::size_t u = 0; u < k_users; ++u) {
            if (done[u]) continue;
            std::vector<double> d = derotate(residual, phases[u]);
            const double z = despread(d, state.users[u].w);
            if (best < 0 || std::fabs(z) > std::fabs(best_z)) {
                best = static_cast<int>(u);
                best_z = z;
                best_derot = std::move(d);
            }
        }
        done[best] = true;
        const double alpha = scaling_factor(state.users[best], codes[best]);
        DetectionRecord rec;
        rec.user = best;
        rec.symbol = frame.symbol_index;
        rec.stage = static_cast<int>(stage);
        rec.z = best_z;
        rec.alpha = alpha;
        rec.estimate = alpha * best_z;
        rec.bit = hard_bit(best_z);
        out.push_back(rec);
        detail::subtract_respread(residual.samples, rec.estimate, phases[best], codes[best].chips);
        detail::cma_update_inplace(state.users[best], best_derot, best_z);
    }
    state.check_divergence(codes);
    return out;
}

/// Blind adaptive PIC. Stage 0 despreads r with each user's weights and
/// takes the per-symbol CMA step; stages l >= 1 cancel the respread
/// alpha-scaled previous-stage estimates of all other users and despread
/// the residual with the same weights. One weight vector per user shared
/// across stages, updated once per symbol at stage 0.
inline std::vector<std::vector<DetectionRecord>> ba_pic(const ReceivedFrame& frame,
                                                        const std::vector<SpreadingCode>& codes,
                                                        const std::vector<double>& phases,
                                                        AdaptiveState& state, int stages) {
    if (stages < 1) throw std::invalid_argument("ba_pic: L must be >= 1");
    const std::size_t k_users = codes.size();

    std::vector<std::vector<double>> derot(k_users);
    std::vector<double> alpha(k_users);
    std::vector<std::vector<DetectionRecord>> out;
    out.reserve(stages + 1);

    std::vector<DetectionRecord> stage0(k_users);
    for (std::size_t k = 0; k < k_users; ++k) {
        derot[k] = derotate(frame, phases[k]);
        const double z = despread(derot[k], state.users[k].w);
        alpha[k] = scaling_factor(state.users[k], codes[k]);
        auto& rec = stage0[k];
        rec.user = static_cast<int>(k);
        rec.symbol = frame.symbol_index;
        rec.z = z;
        rec.alpha = alpha[k];
        rec.estimate = alpha[k] * z;
        rec.bit = hard_bit(z);
    }
    out.push_back(stage0);

    for (int l = 1; l <= stages; ++l) {
        std::vector<DetectionRecord> next(k_users);
        for (std::size_t k = 0; k < k_users; ++k) {
            ReceivedFrame residual = frame;
            for (std::size_t j = 0; j < k_users; ++j) {
                if (j == k) continue;
                detail::subtract_respread(residual.samples, out[l - 1][j].estimate, phases[j],
                                          codes[j].chips);
            }
            const double z = despread(derotate(residual, phases[k]), state.users[k].w);
            auto& rec = next[k];
            rec.user = static_cast<int>(k);
            rec.symbol = frame.symbol_index;
            rec.stage = l;
            rec.z = z;
            rec.alpha = alpha[k];
            rec.estimate = alpha[k] * z;
            rec.bit = hard_bit(z);
        }
        out.push_back(std::move(next));
    }

    for (std::size_t k = 0; k < k_users; ++k)
        detail::cma_update_inplace(state.users[k], derot[k], stage0[k].z);
    state.check_divergence(codes);
    return out;
}

} // namespace mudsim
