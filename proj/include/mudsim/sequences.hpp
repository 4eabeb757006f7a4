#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mudsim {

/// Antipodal chip vector for one user. After normalization every chip is
/// +-1/sqrt(N) so the energy over a symbol period is exactly one.
struct SpreadingCode {
    std::vector<double> chips;

    std::size_t length() const { return chips.size(); }

    double energy() const {
        double e = 0.0;
        for (double c : chips) e += c * c;
        return e;
    }
};

struct CodeFamily {
    enum class Kind { gold, msequence };

    std::vector<SpreadingCode> codes;
    int degree = 0;
    Kind kind = Kind::gold;

    std::size_t size() const { return codes.size(); }
};

namespace detail {

// One LFSR step. `taps` holds the exponents of the feedback polynomial
// below `degree`; the x^0 term is implied. Bit i of the state is the
// sequence value i steps ahead of the output bit.
inline std::uint32_t lfsr_step(std::uint32_t state, int degree, const std::vector<int>& taps) {
    std::uint32_t fb = state & 1u;
    for (int t : taps) {
        if (t < degree) fb ^= (state >> t) & 1u;
    }
    return (state >> 1) | (fb << (degree - 1));
}

} // namespace detail

/// Maximal-length sequence from a Fibonacci LFSR. Output chips are
/// unnormalized, bit 0 -> +1 and bit 1 -> -1. Rejects tap sets whose
/// state cycle is shorter than 2^degree - 1 (non-primitive polynomial)
/// and the all-zero register fill.
inline SpreadingCode m_sequence(int degree, const std::vector<int>& taps,
                                std::uint32_t seed_state = 1) {
    if (degree < 3 || degree > 16)
        throw std::invalid_argument("m_sequence: degree must be in [3, 16]");
    const std::uint32_t mask = (1u << degree) - 1u;
    if ((seed_state & mask) == 0)
        throw std::invalid_argument("m_sequence: zero register fill is a fixed point");

    const std::size_t period = mask;
    SpreadingCode code;
    code.chips.reserve(period);
    std::uint32_t s = seed_state & mask;
    for (std::size_t i = 0; i < period; ++i) {
        code.chips.push_back((s & 1u) ? -1.0 : 1.0);
        s = detail::lfsr_step(s, degree, taps);
        if (s == (seed_state & mask) && i + 1 < period) {
            throw std::invalid_argument(
                "m_sequence: taps are not primitive (period " + std::to_string(i + 1) +
                " < " + std::to_string(period) + ")");
        }
    }
    if (s != (seed_state & mask))
        throw std::invalid_argument("m_sequence: taps are not primitive (state never recurs)");
    return code;
}

/// Inner product of two chip vectors of equal length (no normalization
/// applied here; pass normalized codes to get rho with |rho| <= 1).
inline double cross_correlation(const SpreadingCode& a, const SpreadingCode& b) {
    if (a.length() != b.length())
        throw std::invalid_argument("cross_correlation: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.length(); ++i) acc += a.chips[i] * b.chips[i];
    return acc;
}

namespace detail {

// The three admissible unnormalized cross-correlation values of a Gold
// family, {-t, -1, t-2} with t = 2^ceil((n+2)/2) + 1.
inline std::set<long> gold_value_set(int degree) {
    const long t = (1L << ((degree + 2) / 2)) + 1;
    return {-t, -1, t - 2};
}

inline long unnormalized_corr(const SpreadingCode& a, const SpreadingCode& b, std::size_t shift) {
    const std::size_t n = a.length();
    long acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double prod = a.chips[i] * b.chips[(i + shift) % n];
        acc += prod > 0 ? 1 : -1;
    }
    return acc;
}

} // namespace detail

/// Gold family from a preferred pair of m-sequences: the pair itself plus
/// the 2^degree - 1 chip-wise products of the first with all cyclic shifts
/// of the second. Codes come out normalized to unit symbol energy. The
/// pair is validated by checking the full cross-correlation spectrum
/// against the three Gold values.
inline CodeFamily gold_family(int degree, const std::vector<int>& taps_a,
                              const std::vector<int>& taps_b) {
    const SpreadingCode u = m_sequence(degree, taps_a);
    const SpreadingCode v = m_sequence(degree, taps_b);
    const std::size_t n = u.length();

    const std::set<long> allowed = detail::gold_value_set(degree);
    for (std::size_t sh = 0; sh < n; ++sh) {
        const long c = detail::unnormalized_corr(u, v, sh);
        if (!allowed.count(c))
            throw std::invalid_argument(
                "gold_family: not a preferred pair (cross-correlation " + std::to_string(c) +
                " at shift " + std::to_string(sh) + " outside the Gold value set)");
    }

    CodeFamily fam;
    fam.degree = degree;
    fam.kind = CodeFamily::Kind::gold;
    const double a = 1.0 / std::sqrt(static_cast<double>(n));

    auto normalized = [&](const SpreadingCode& c) {
        SpreadingCode out;
        out.chips.reserve(n);
        for (double x : c.chips) out.chips.push_back(x * a);
        return out;
    };

    fam.codes.push_back(normalized(u));
    fam.codes.push_back(normalized(v));
    for (std::size_t sh = 0; sh < n; ++sh) {
        SpreadingCode c;
        c.chips.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            c.chips.push_back(u.chips[i] * v.chips[(i + sh) % n] * a);
        fam.codes.push_back(std::move(c));
    }
    return fam;
}

/// Degree-5 preferred pair used by the default configuration:
/// x^5 + x^2 + 1 and x^5 + x^4 + x^3 + x^2 + 1.
inline const std::vector<int>& default_taps_a() {
    static const std::vector<int> t{2};
    return t;
}
inline const std::vector<int>& default_taps_b() {
    static const std::vector<int> t{2, 3, 4};
    return t;
}

inline CodeFamily default_gold_family(int degree = 5) {
    if (degree == 5) return gold_family(5, default_taps_a(), default_taps_b());
    throw std::invalid_argument("default_gold_family: no preferred pair configured for degree " +
                                std::to_string(degree));
}

} // namespace mudsim
