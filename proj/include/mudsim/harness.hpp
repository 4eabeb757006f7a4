#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mudsim/channel.hpp"
#include "mudsim/metrics.hpp"
#include "mudsim/receivers.hpp"
#include "mudsim/rng.hpp"
#include "mudsim/sequences.hpp"
#include "mudsim/transmitter.hpp"
#include "mudsim/version.hpp"

namespace mudsim {

struct ReceiverSpec {
    ReceiverKind kind = ReceiverKind::mf;
    int stages = 3; // PIC variants only
};

/// Full experiment description. Defaults reproduce the reference operating
/// point: 20 equal-power users, degree-5 Gold codes (N = 31), normalized
/// Doppler 0.003, CMA step size 1e-4.
struct SimConfig {
    int users = 20;
    int degree = 5;
    double fd_tb = 0.003;
    double mu = 1e-4;
    std::vector<ReceiverSpec> receivers = {
        {ReceiverKind::mf, 0},     {ReceiverKind::sic, 0},    {ReceiverKind::pic, 3},
        {ReceiverKind::ba_sic, 0}, {ReceiverKind::ba_pic, 3},
    };
    std::vector<double> ebno_db = {0, 5, 10, 15, 20, 25, 30};
    std::size_t symbols = 20000; // measured symbols per trial
    std::size_t warmup = 0;      // adaptation symbols discarded before measuring
    int trials = 10;
    std::uint64_t seed = 1;
    std::string out = "sweep.csv";

    int spreading_factor() const { return (1 << degree) - 1; }
};

inline ReceiverKind parse_receiver_kind(const std::string& s) {
    if (s == "mf") return ReceiverKind::mf;
    if (s == "sic") return ReceiverKind::sic;
    if (s == "pic") return ReceiverKind::pic;
    if (s == "ba_sic") return ReceiverKind::ba_sic;
    if (s == "ba_pic") return ReceiverKind::ba_pic;
    throw std::invalid_argument("unknown receiver kind '" + s + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace detail

/// Line-oriented `key = value` configuration; lists are comma-separated,
/// `#` starts a comment. Unknown keys and out-of-range values are rejected
/// with the offending line number.
inline SimConfig parse_config(const std::string& text) {
    SimConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + msg);
    };

    int stages = 3;
    bool receivers_set = false;
    std::vector<std::string> receiver_names;

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty()) fail("empty value for '" + key + "'");

        try {
            if (key == "users") cfg.users = std::stoi(value);
            else if (key == "degree") cfg.degree = std::stoi(value);
            else if (key == "fd_tb") cfg.fd_tb = std::stod(value);
            else if (key == "mu") cfg.mu = std::stod(value);
            else if (key == "stages") stages = std::stoi(value);
            else if (key == "symbols") cfg.symbols = std::stoul(value);
            else if (key == "warmup") cfg.warmup = std::stoul(value);
            else if (key == "trials") cfg.trials = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "out") cfg.out = value;
            else if (key == "ebno_db") {
                cfg.ebno_db.clear();
                for (const auto& v : detail::split_list(value)) cfg.ebno_db.push_back(std::stod(v));
            } else if (key == "receivers") {
                receiver_names = detail::split_list(value);
                receivers_set = true;
            } else {
                fail("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            if (std::string(e.what()).rfind("config line", 0) == 0) throw;
            fail("bad value '" + value + "' for '" + key + "'");
        } catch (const std::out_of_range&) {
            fail("value out of range for '" + key + "'");
        }
    }

    lineno = 0; // validation diagnostics are not line-specific
    if (cfg.degree < 3 || cfg.degree > 16)
        throw std::invalid_argument("config: degree must be in [3, 16]");
    const int family_size = (1 << cfg.degree) + 1;
    if (cfg.users < 1 || cfg.users > family_size)
        throw std::invalid_argument("config: users must be in [1, " + std::to_string(family_size) +
                                    "] for degree " + std::to_string(cfg.degree));
    if (cfg.fd_tb <= 0.0 || cfg.fd_tb >= 0.5)
        throw std::invalid_argument("config: fd_tb must be in (0, 0.5)");
    if (cfg.mu <= 0.0) throw std::invalid_argument("config: mu must be > 0");
    if (stages < 1) throw std::invalid_argument("config: stages must be >= 1");
    if (cfg.symbols < 1000) throw std::invalid_argument("config: symbols must be >= 1000");
    if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (cfg.ebno_db.empty()) throw std::invalid_argument("config: ebno_db list is empty");

    if (receivers_set) {
        cfg.receivers.clear();
        for (const auto& name : receiver_names)
            cfg.receivers.push_back(ReceiverSpec{parse_receiver_kind(name), 0});
    }
    for (auto& r : cfg.receivers)
        if (r.kind == ReceiverKind::pic || r.kind == ReceiverKind::ba_pic) r.stages = stages;
    if (cfg.receivers.empty()) throw std::invalid_argument("config: receiver list is empty");
    return cfg;
}

/// Per-trial partial result for one sweep cell: one accumulator per
/// receiver stage, plus the CMA divergence flag.
struct TrialResult {
    std::vector<MetricAccumulator> per_stage;
    bool diverged = false;
};

namespace detail {

// Seed streams are split by (master, purpose, trial, user) so trial t's
// realization never depends on how many trials run or on worker count.
enum SeedPurpose : std::uint64_t { seed_fading = 1, seed_bits = 2, seed_noise = 3 };

} // namespace detail

/// Simulate one (receiver, Eb/N0, trial) work unit.
inline TrialResult simulate_trial(const SimConfig& cfg, const std::vector<SpreadingCode>& codes,
                                  const ReceiverSpec& receiver, double ebno_db, int trial) {
    const std::size_t k_users = codes.size();
    const std::size_t total = cfg.warmup + cfg.symbols;
    const NoiseSpec noise = ebn0_to_n0(ebno_db, 1, 1.0);

    std::vector<UserFrame> users(k_users);
    GenieTruth truth;
    truth.g.resize(k_users);
    truth.b.resize(k_users);
    truth.phi.resize(k_users);
    for (std::size_t k = 0; k < k_users; ++k) {
        auto& u = users[k];
        u.code = codes[k];
        u.trace = rayleigh_trace(total, cfg.fd_tb,
                                 derive_seed(cfg.seed, detail::seed_fading,
                                             static_cast<std::uint64_t>(trial), k),
                                 64, static_cast<int>(k));
        Rng bits_rng(derive_seed(cfg.seed, detail::seed_bits, static_cast<std::uint64_t>(trial), k));
        u.bits = modulate_bpsk(bits_rng, total);
        truth.g[k].resize(total);
        truth.b[k] = u.bits;
        truth.phi[k].resize(total);
        for (std::size_t m = 0; m < total; ++m) {
            truth.g[k][m] = std::abs(u.trace.gains[m]);
            truth.phi[k][m] = -std::arg(u.trace.gains[m]); // beta = g e^{-j phi}
        }
    }

    const int n_stages =
        (receiver.kind == ReceiverKind::pic || receiver.kind == ReceiverKind::ba_pic)
            ? receiver.stages + 1
            : 1;
    TrialResult result;
    result.per_stage.assign(n_stages, MetricAccumulator(k_users));

    AdaptiveState state = AdaptiveState::init(codes, cfg.mu);
    Rng noise_rng(derive_seed(cfg.seed, detail::seed_noise, static_cast<std::uint64_t>(trial)));
    std::vector<double> phases(k_users);

    for (std::size_t m = 0; m < total; ++m) {
        const ReceivedFrame frame = compose_received(users, noise, m, noise_rng);
        for (std::size_t k = 0; k < k_users; ++k) phases[k] = truth.phi[k][m];
        const bool measure = m >= cfg.warmup;

        auto feed = [&](int stage, const DetectionRecord& rec) {
            if (measure)
                result.per_stage[stage].add(rec, truth.g[rec.user][m], truth.b[rec.user][m]);
        };

        switch (receiver.kind) {
            case ReceiverKind::mf:
                for (std::size_t k = 0; k < k_users; ++k)
                    feed(0, matched_filter(frame, codes[k], phases[k], static_cast<int>(k)));
                break;
            case ReceiverKind::sic:
                for (const auto& rec : conventional_sic(frame, codes, phases)) feed(0, rec);
                break;
            case ReceiverKind::pic: {
                const auto stages = conventional_pic(frame, codes, phases, receiver.stages);
                for (std::size_t l = 0; l < stages.size(); ++l)
                    for (const auto& rec : stages[l]) feed(static_cast<int>(l), rec);
                break;
            }
            case ReceiverKind::ba_sic:
                for (const auto& rec : ba_sic(frame, codes, phases, state)) feed(0, rec);
                break;
            case ReceiverKind::ba_pic: {
                const auto stages = ba_pic(frame, codes, phases, state, receiver.stages);
                for (std::size_t l = 0; l < stages.size(); ++l)
                    for (const auto& rec : stages[l]) feed(static_cast<int>(l), rec);
                break;
            }
        }
    }
    result.diverged = state.diverged;
    return result;
}

/// One sweep cell after trial reduction.
struct CellDiagnostics {
    std::string receiver;
    double ebno_db = 0.0;
    int diverged_trials = 0;
    int total_trials = 0;
    bool invalid = false; // > 10% of trials diverged
};

struct SweepResult {
    std::vector<MetricRow> rows;
    std::vector<CellDiagnostics> diagnostics;
};

/// Run every (receiver, Eb/N0, trial) cell of the sweep. Work units are
/// independent; `workers` threads pull from a shared counter and results
/// merge in fixed (receiver, ebno, trial) order, so output is identical
/// for any worker count.
inline SweepResult run_sweep(const SimConfig& cfg, int workers = 1) {
    if (workers < 1) throw std::invalid_argument("run_sweep: workers must be >= 1");
    CodeFamily family = default_gold_family(cfg.degree);
    if (static_cast<std::size_t>(cfg.users) > family.size())
        throw std::invalid_argument("run_sweep: users exceed family size");
    std::vector<SpreadingCode> codes(family.codes.begin(), family.codes.begin() + cfg.users);

    struct WorkItem {
        std::size_t receiver;
        std::size_t ebno;
        int trial;
    };
    std::vector<WorkItem> items;
    for (std::size_t r = 0; r < cfg.receivers.size(); ++r)
        for (std::size_t e = 0; e < cfg.ebno_db.size(); ++e)
            for (int t = 0; t < cfg.trials; ++t) items.push_back({r, e, t});

    std::vector<TrialResult> results(items.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            const auto& it = items[i];
            results[i] =
                simulate_trial(cfg, codes, cfg.receivers[it.receiver], cfg.ebno_db[it.ebno], it.trial);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SweepResult out;
    std::size_t idx = 0;
    for (std::size_t r = 0; r < cfg.receivers.size(); ++r) {
        for (std::size_t e = 0; e < cfg.ebno_db.size(); ++e) {
            // merge trials in trial-index order
            std::vector<MetricAccumulator> merged;
            CellDiagnostics diag;
            diag.receiver = receiver_name(cfg.receivers[r].kind);
            diag.ebno_db = cfg.ebno_db[e];
            diag.total_trials = cfg.trials;
            for (int t = 0; t < cfg.trials; ++t, ++idx) {
                const auto& tr = results[idx];
                if (tr.diverged) {
                    ++diag.diverged_trials;
                    continue;
                }
                if (merged.empty()) {
                    merged = tr.per_stage;
                } else {
                    for (std::size_t s = 0; s < merged.size(); ++s) merged[s].merge(tr.per_stage[s]);
                }
            }
            diag.invalid = diag.diverged_trials * 10 > diag.total_trials || merged.empty();
            out.diagnostics.push_back(diag);

            const int used_trials = cfg.trials - diag.diverged_trials;
            for (std::size_t s = 0; s < (merged.empty() ? 0 : merged.size()); ++s) {
                MetricRow row;
                row.receiver = receiver_name(cfg.receivers[r].kind);
                row.stage = static_cast<int>(s);
                row.ebno_db = cfg.ebno_db[e];
                if (diag.invalid) {
                    row.mse = row.sinr_mean_db = row.sum_rate_bps_hz = row.ber =
                        std::numeric_limits<double>::quiet_NaN();
                } else {
                    const auto& acc = merged[s];
                    row.mse = acc.mse();
                    const double pooled = acc.pooled_sinr();
                    row.sinr_mean_db = 10.0 * std::log10(pooled);
                    row.sum_rate_bps_hz = sum_rate(pooled, cfg.users, cfg.spreading_factor());
                    row.ber = acc.ber();
                }
                row.symbols = cfg.symbols;
                row.trials = used_trials;
                row.seed = cfg.seed;
                out.rows.push_back(row);
            }
        }
    }
    return out;
}

inline std::string sweep_csv(const SweepResult& result) {
    std::string out = metric_csv_header();
    out += '\n';
    for (const auto& row : result.rows) {
        out += metric_csv_row(row);
        out += '\n';
    }
    return out;
}

/// 64-bit FNV-1a over the family's chip signs; identifies the code set in
/// the run manifest.
inline std::uint64_t family_fingerprint(const std::vector<SpreadingCode>& codes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& c : codes) {
        for (double x : c.chips) {
            h ^= (x > 0 ? 1u : 0u);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

inline std::string run_manifest(const SimConfig& cfg) {
    CodeFamily family = default_gold_family(cfg.degree);
    std::ostringstream os;
    os << "version = " << version_tag << "\n";
    os << "users = " << cfg.users << "\n";
    os << "degree = " << cfg.degree << "\n";
    os << "fd_tb = " << cfg.fd_tb << "\n";
    os << "mu = " << cfg.mu << "\n";
    os << "symbols = " << cfg.symbols << "\n";
    os << "warmup = " << cfg.warmup << "\n";
    os << "trials = " << cfg.trials << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "family_fingerprint = " << family_fingerprint(family.codes) << "\n";
    os << "trial_seeds =";
    for (int t = 0; t < cfg.trials; ++t)
        os << " " << derive_seed(cfg.seed, detail::seed_noise, static_cast<std::uint64_t>(t));
    os << "\n";
    return os.str();
}

/// CSV dump of a code family: one row per code, columns chip_0..chip_{N-1}.
inline std::string codes_csv(const CodeFamily& family) {
    std::ostringstream os;
    const std::size_t n = family.codes.empty() ? 0 : family.codes.front().length();
    for (std::size_t i = 0; i < n; ++i) os << (i ? "," : "") << "chip_" << i;
    os << "\n";
    char buf[32];
    for (const auto& code : family.codes) {
        for (std::size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%.10g", code.chips[i]);
            os << (i ? "," : "") << buf;
        }
        os << "\n";
    }
    return os.str();
}

/// K x K matrix of normalized cross-correlations.
inline std::string correlation_matrix_csv(const std::vector<SpreadingCode>& codes) {
    std::ostringstream os;
    char buf[32];
    for (const auto& a : codes) {
        bool first = true;
        for (const auto& b : codes) {
            std::snprintf(buf, sizeof(buf), "%.10g", cross_correlation(a, b));
            os << (first ? "" : ",") << buf;
            first = false;
        }
        os << "\n";
    }
    return os.str();
}

/// Summary statistics for the fading-validation subcommand.
struct FadingReport {
    double mean_power = 0.0;
    double max_autocorr_error = 0.0; // vs J_0(2 pi fd tau), tau <= 100
    double ks_statistic = 0.0;       // |beta| vs Rayleigh(sigma^2 = 1/2)
};

inline FadingReport fading_report(const FadingTrace& trace) {
    const auto& x = trace.gains;
    const std::size_t m = x.size();
    FadingReport rep;
    for (const auto& v : x) rep.mean_power += std::norm(v);
    rep.mean_power /= static_cast<double>(m);

    for (std::size_t tau = 1; tau <= 100 && tau < m; ++tau) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i + tau < m; ++i) acc += x[i] * std::conj(x[i + tau]);
        const double r = acc.real() / static_cast<double>(m - tau);
        const double ref = std::cyl_bessel_j(0.0, 2.0 * M_PI * trace.doppler * tau);
        rep.max_autocorr_error = std::max(rep.max_autocorr_error, std::fabs(r - ref));
    }

    std::vector<double> mags(m);
    for (std::size_t i = 0; i < m; ++i) mags[i] = std::abs(x[i]);
    std::sort(mags.begin(), mags.end());
    for (std::size_t i = 0; i < m; ++i) {
        const double cdf = 1.0 - std::exp(-mags[i] * mags[i]);
        const double lo = static_cast<double>(i) / m;
        const double hi = static_cast<double>(i + 1) / m;
        rep.ks_statistic = std::max({rep.ks_statistic, std::fabs(cdf - lo), std::fabs(cdf - hi)});
    }
    return rep;
}

/// CSV dump of a fading trace (columns: m, re, im, magnitude).
inline std::string fading_trace_csv(const FadingTrace& trace) {
    std::ostringstream os;
    os << "m,re,im,magnitude\n";
    char buf[96];
    for (std::size_t m = 0; m < trace.gains.size(); ++m) {
        const auto& v = trace.gains[m];
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g", m, v.real(), v.imag(),
                      std::abs(v));
        os << buf << "\n";
    }
    return os.str();
}

} // namespace mudsim
