#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mudsim/channel.hpp"
#include "mudsim/harness.hpp"

using namespace mudsim;

TEST_CASE("fading trace has unit mean power at large M") {
    const auto trace = rayleigh_trace(200000, 0.003, 11);
    double p = 0.0;
    for (const auto& v : trace.gains) p += std::norm(v);
    p /= trace.length();
    CHECK(p > 0.95);
    CHECK(p < 1.05);
}

TEST_CASE("autocorrelation tracks the Clarke model J0 curve") {
    const auto trace = rayleigh_trace(200000, 0.003, 11);
    const auto rep = fading_report(trace);
    CHECK(rep.max_autocorr_error < 0.05);
}

TEST_CASE("amplitude is Rayleigh distributed (KS)") {
    const auto trace = rayleigh_trace(200000, 0.003, 11);
    const auto rep = fading_report(trace);
    CHECK(rep.ks_statistic < 0.01);
}

TEST_CASE("same seed reproduces the trace exactly") {
    const auto a = rayleigh_trace(5000, 0.003, 42);
    const auto b = rayleigh_trace(5000, 0.003, 42);
    for (std::size_t i = 0; i < a.length(); ++i) CHECK(a.gains[i] == b.gains[i]);
}

TEST_CASE("distinct seeds give statistically independent traces") {
    const auto a = rayleigh_trace(200000, 0.003, 101);
    const auto b = rayleigh_trace(200000, 0.003, 202);
    std::complex<double> acc{0.0, 0.0};
    double pa = 0.0, pb = 0.0;
    for (std::size_t i = 0; i < a.length(); ++i) {
        acc += a.gains[i] * std::conj(b.gains[i]);
        pa += std::norm(a.gains[i]);
        pb += std::norm(b.gains[i]);
    }
    CHECK(std::abs(acc) / std::sqrt(pa * pb) < 0.01);
}

TEST_CASE("coherence decreases as the Doppler rate increases") {
    const std::size_t lag = 20;
    double prev = 2.0;
    for (double fd : {0.001, 0.003, 0.01, 0.03}) {
        const auto trace = rayleigh_trace(100000, fd, 7);
        std::complex<double> acc{0.0, 0.0};
        double p = 0.0;
        for (std::size_t i = 0; i + lag < trace.length(); ++i) {
            acc += trace.gains[i] * std::conj(trace.gains[i + lag]);
            p += std::norm(trace.gains[i]);
        }
        const double r = acc.real() / p;
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("invalid Doppler is rejected; constant channels use constant_trace") {
    CHECK_THROWS_AS(rayleigh_trace(100, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(rayleigh_trace(100, -0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(rayleigh_trace(100, 0.5, 1), std::invalid_argument);
    const auto c = constant_trace(10, {0.5, -0.5});
    for (const auto& v : c.gains) CHECK(v == std::complex<double>(0.5, -0.5));
}

TEST_CASE("zero noise spec yields an all-zero frame") {
    Rng rng(1);
    const auto v = awgn_frame(NoiseSpec{0.0}, 64, rng);
    for (const auto& s : v) CHECK(s == std::complex<double>(0.0, 0.0));
}

TEST_CASE("noise variance is n0/2 per component") {
    Rng rng(3);
    const auto v = awgn_frame(NoiseSpec{2.0}, 1000000, rng);
    double vr = 0.0, vi = 0.0;
    for (const auto& s : v) {
        vr += s.real() * s.real();
        vi += s.imag() * s.imag();
    }
    vr /= v.size();
    vi /= v.size();
    CHECK(vr == doctest::Approx(1.0).epsilon(0.02));
    CHECK(vi == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("noise stream is reproducible for a fixed seed") {
    Rng r1(9), r2(9);
    const auto a = awgn_frame(NoiseSpec{1.0}, 100, r1);
    const auto b = awgn_frame(NoiseSpec{1.0}, 100, r2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("Eb/N0 conversion") {
    CHECK(ebn0_to_n0(0.0, 1, 1.0).n0 == doctest::Approx(1.0));
    CHECK(ebn0_to_n0(30.0, 1, 1.0).n0 == doctest::Approx(0.001));
    CHECK(ebn0_to_n0(10.0, 1, 1.0).n0 == doctest::Approx(0.1));
    CHECK_THROWS_AS(ebn0_to_n0(0.0, 1, 0.0), std::invalid_argument);
}
