#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mudsim/receivers.hpp"

namespace mudsim {

/// Simulation-side ground truth, indexed [user][symbol].
struct GenieTruth {
    std::vector<std::vector<double>> g;   // channel amplitude
    std::vector<std::vector<double>> b;   // transmitted symbol
    std::vector<std::vector<double>> phi; // channel phase

    std::size_t users() const { return g.size(); }
};

/// Streaming per-user sums; merging is associative so trial partials can
/// be reduced in a fixed order regardless of worker scheduling.
struct MetricAccumulator {
    struct PerUser {
        double sum_sig = 0.0;   // (g b)^2
        double sum_resid = 0.0; // (estimate - g b)^2
        double sum_mse = 0.0;   // (|estimate| - g)^2
        std::uint64_t bit_errors = 0;
        std::uint64_t count = 0;
    };
    std::vector<PerUser> users;

    explicit MetricAccumulator(std::size_t k = 0) : users(k) {}

    void add(const DetectionRecord& rec, double g, double b) {
        auto& u = users.at(rec.user);
        const double sig = g * b;
        u.sum_sig += sig * sig;
        const double r = rec.estimate - sig;
        u.sum_resid += r * r;
        const double e = std::fabs(rec.estimate) - g;
        u.sum_mse += e * e;
        if (rec.bit != (b < 0.0 ? -1 : 1)) ++u.bit_errors;
        ++u.count;
    }

    void merge(const MetricAccumulator& other) {
        if (users.size() != other.users.size())
            throw std::invalid_argument("MetricAccumulator::merge: user count mismatch");
        for (std::size_t k = 0; k < users.size(); ++k) {
            users[k].sum_sig += other.users[k].sum_sig;
            users[k].sum_resid += other.users[k].sum_resid;
            users[k].sum_mse += other.users[k].sum_mse;
            users[k].bit_errors += other.users[k].bit_errors;
            users[k].count += other.users[k].count;
        }
    }

    std::uint64_t total_count() const {
        std::uint64_t n = 0;
        for (const auto& u : users) n += u.count;
        return n;
    }

    double mse() const {
        double s = 0.0;
        std::uint64_t n = total_count();
        if (n == 0) throw std::invalid_argument("mse: empty record set");
        for (const auto& u : users) s += u.sum_mse;
        return s / static_cast<double>(n);
    }

    double ber() const {
        std::uint64_t n = total_count();
        if (n == 0) throw std::invalid_argument("ber: empty record set");
        std::uint64_t e = 0;
        for (const auto& u : users) e += u.bit_errors;
        return static_cast<double>(e) / static_cast<double>(n);
    }

    /// Per-user Gamma_k = S_k / I_k. Zero residual yields +inf sentinels.
    std::vector<double> per_user_sinr() const {
        std::vector<double> out;
        out.reserve(users.size());
        for (const auto& u : users) {
            if (u.count == 0) throw std::invalid_argument("per_user_sinr: empty user record set");
            const double s = u.sum_sig / static_cast<double>(u.count);
            const double i = u.sum_resid / static_cast<double>(u.count);
            out.push_back(i == 0.0 ? std::numeric_limits<double>::infinity() : s / i);
        }
        return out;
    }

    /// Mean of per-user SINR ratios; +inf sentinels are excluded.
    double mean_sinr() const {
        const auto g = per_user_sinr();
        double s = 0.0;
        std::size_t n = 0;
        for (double x : g) {
            if (std::isinf(x)) continue;
            s += x;
            ++n;
        }
        return n == 0 ? std::numeric_limits<double>::infinity() : s / static_cast<double>(n);
    }

    /// Pooled SINR: total signal power over total residual power across all
    /// users and symbols. This aggregate, rather than the mean of per-user
    /// ratios, is what the reported spectral-efficiency curves follow.
    double pooled_sinr() const {
        double s = 0.0, i = 0.0;
        for (const auto& u : users) {
            s += u.sum_sig;
            i += u.sum_resid;
        }
        if (total_count() == 0) throw std::invalid_argument("pooled_sinr: empty record set");
        return i == 0.0 ? std::numeric_limits<double>::infinity() : s / i;
    }
};

namespace detail {

inline MetricAccumulator accumulate(const std::vector<DetectionRecord>& records,
                                    const GenieTruth& truth) {
    if (records.empty()) throw std::invalid_argument("metrics: empty record set");
    MetricAccumulator acc(truth.users());
    for (const auto& rec : records)
        acc.add(rec, truth.g[rec.user][rec.symbol], truth.b[rec.user][rec.symbol]);
    return acc;
}

} // namespace detail

/// Average channel-estimation MSE over users and symbols.
inline double mse_channel_estimation(const std::vector<DetectionRecord>& records,
                                     const GenieTruth& truth) {
    return detail::accumulate(records, truth).mse();
}

struct SinrResult {
    std::vector<double> per_user;
    double mean = 0.0;   // (1/K) sum of per-user ratios, sentinels excluded
    double pooled = 0.0; // sum S / sum I
};

inline SinrResult empirical_sinr(const std::vector<DetectionRecord>& records,
                                 const GenieTruth& truth) {
    const auto acc = detail::accumulate(records, truth);
    return SinrResult{acc.per_user_sinr(), acc.mean_sinr(), acc.pooled_sinr()};
}

inline double ber(const std::vector<DetectionRecord>& records, const GenieTruth& truth) {
    return detail::accumulate(records, truth).ber();
}

/// Monte-Carlo ergodic capacity: mean of B log2(1 + Gamma) over SINR
/// samples.
inline double ergodic_capacity(const std::vector<double>& sinr_samples, double bandwidth = 1.0) {
    if (sinr_samples.empty()) throw std::invalid_argument("ergodic_capacity: empty sample set");
    double s = 0.0;
    for (double g : sinr_samples) {
        if (g < 0.0) throw std::invalid_argument("ergodic_capacity: negative SINR sample");
        s += bandwidth * std::log2(1.0 + g);
    }
    return s / static_cast<double>(sinr_samples.size());
}

/// Normalized sum rate (K/N) log2(1 + mean SINR); a Jensen upper bound.
inline double sum_rate(double mean_sinr, int k_users, int spreading_factor) {
    if (mean_sinr < 0.0) throw std::invalid_argument("sum_rate: mean SINR must be >= 0");
    return (static_cast<double>(k_users) / spreading_factor) * std::log2(1.0 + mean_sinr);
}

/// Heuristic stage-0 interference variance predictor:
/// (K / (M R)) * sum_m (e(m) + mu)^2 / N. Diagnostic only; the +mu branch
/// of the formula's ambiguous sign is used.
inline double predicted_variance_ba_pic_stage0(int k_users, std::size_t symbols,
                                               int spreading_factor, double mu, double doppler_corr,
                                               const std::vector<double>& error_history) {
    if (symbols < 1 || spreading_factor < 1 || doppler_corr <= 0.0)
        throw std::invalid_argument("predicted_variance_ba_pic_stage0: bad parameters");
    double s = 0.0;
    for (double e : error_history) {
        const double t = e + mu;
        s += t * t / spreading_factor;
    }
    return static_cast<double>(k_users) / (static_cast<double>(symbols) * doppler_corr) * s;
}

/// Heuristic stage-l variance predictor for user k:
/// eps2_k + sum_{j != k} eps2_j * (rho_kj^2 + rho_kk^2) * prev_var,
/// reading the formula's kappa with the second index fixed to the desired
/// user (kappa_{jk} = -1 for j != k). Diagnostic only.
inline double predicted_variance_ba_pic_stage_l(const std::vector<double>& eps2,
                                                const std::vector<std::vector<double>>& rho,
                                                std::size_t k, double prev_var) {
    const std::size_t k_users = eps2.size();
    if (rho.size() != k_users || k >= k_users)
        throw std::invalid_argument("predicted_variance_ba_pic_stage_l: dimension mismatch");
    double v = eps2[k];
    for (std::size_t j = 0; j < k_users; ++j) {
        if (j == k) continue;
        const double coeff = rho[k][j] * rho[k][j] + rho[k][k] * rho[k][k];
        v += eps2[j] * coeff * prev_var;
    }
    return v;
}

/// One aggregated CSV row per (receiver, stage, Eb/N0) cell.
struct MetricRow {
    std::string receiver;
    int stage = 0;
    double ebno_db = 0.0;
    double mse = 0.0;
    double sinr_mean_db = 0.0; // pooled SINR in dB
    double sum_rate_bps_hz = 0.0;
    double ber = 0.0;
    std::uint64_t symbols = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

inline const char* metric_csv_header() {
    return "receiver,stage,ebno_db,mse,sinr_mean_db,sum_rate_bps_hz,ber,symbols,trials,seed";
}

inline std::string metric_csv_row(const MetricRow& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%llu,%llu,%llu",
                  r.receiver.c_str(), r.stage, r.ebno_db, r.mse, r.sinr_mean_db,
                  r.sum_rate_bps_hz, r.ber, static_cast<unsigned long long>(r.symbols),
                  static_cast<unsigned long long>(r.trials),
                  static_cast<unsigned long long>(r.seed));
    return buf;
}

} // namespace mudsim
