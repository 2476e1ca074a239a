#include "doctest.h"

#include "ms2d/common.hpp"
#include "ms2d/denoise.hpp"

#include <cmath>
#include <vector>

using namespace ms2d;

namespace {

std::vector<double> tones(size_t n, double t2 = 0.0, double t3 = 0.0) {
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) {
        double t = double(i);
        v[i] = std::exp(-t / 900.0) * std::cos(0.25 * t + 0.2);
        if (t2 != 0.0) v[i] += 0.6 * std::exp(-t / 700.0) * std::cos(t2 * t + 1.0);
        if (t3 != 0.0) v[i] += 0.4 * std::exp(-t / 1200.0) * std::cos(t3 * t + 2.2);
    }
    return v;
}

double rms(const std::vector<double>& a) {
    double s = 0;
    for (double v : a) s += v * v;
    return std::sqrt(s / double(a.size()));
}

double rms_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / double(a.size()));
}

} // namespace

TEST_CASE("a signal inside the rank subspace passes through unchanged") {
    auto x = tones(512, 0.47, 0.11);  // 3 damped tones: rank 6
    DenoiseSpec spec;
    spec.rank = 6;
    auto y = cadzow(x, spec);
    REQUIRE(y.size() == x.size());
    CHECK(rms_diff(x, y) / rms(x) < 1e-6);
}

TEST_CASE("white noise shrinks by at least half over 20 seeds") {
    auto clean = tones(512, 0.47, 0.11);
    double sig_rms = rms(clean);
    DenoiseSpec spec;
    spec.rank = 6;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        GaussRng g(seed);
        double sigma = sig_rms / 10.0;  // SNR 10 in RMS terms
        auto noisy = clean;
        for (auto& v : noisy) v += sigma * g.next();
        auto out = cadzow(noisy, spec);
        double before = rms_diff(noisy, clean);
        double after = rms_diff(out, clean);
        CHECK(after <= 0.5 * before);
    }
}

TEST_CASE("energy never increases") {
    auto clean = tones(400, 0.31);
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        GaussRng g(seed * 31);
        auto noisy = clean;
        for (auto& v : noisy) v += 0.2 * g.next();
        DenoiseSpec spec;
        spec.rank = 4;
        auto out = cadzow(noisy, spec);
        CHECK(rms(out) <= rms(noisy) * (1.0 + 1e-9));
    }
}

TEST_CASE("a second application barely moves the result") {
    auto clean = tones(512, 0.47);
    GaussRng g(9);
    auto noisy = clean;
    for (auto& v : noisy) v += 0.1 * g.next();
    DenoiseSpec spec;
    spec.rank = 4;
    auto once = cadzow(noisy, spec);
    auto twice = cadzow(once, spec);
    CHECK(rms_diff(twice, once) < 0.1 * rms_diff(once, noisy));
}

TEST_CASE("rank bounds are enforced") {
    auto x = tones(64);
    DenoiseSpec spec;
    spec.rank = 32;  // == hankel rows for length 64
    CHECK_THROWS_WITH_AS(cadzow(x, spec), doctest::Contains("rank"), UsageError);
    spec.rank = 0;
    CHECK_THROWS_AS(cadzow(x, spec), UsageError);
    spec.rank = 4;
    spec.hankel_rows = 1;
    CHECK_THROWS_AS(cadzow(x, spec), UsageError);
}

TEST_CASE("multiple iterations stay on the clean signal") {
    auto x = tones(256, 0.4);
    DenoiseSpec spec;
    spec.rank = 4;
    spec.iterations = 3;
    auto y = cadzow(x, spec);
    CHECK(rms_diff(x, y) / rms(x) < 1e-6);
}

TEST_CASE("complex signals are denoised in the complex domain") {
    const size_t n = 300;
    std::vector<cplx> clean(n);
    for (size_t i = 0; i < n; ++i) {
        double t = double(i);
        clean[i] = std::exp(cplx(-t / 800.0, 0.33 * t)) +
                   0.5 * std::exp(cplx(-t / 600.0, 0.71 * t));
    }
    GaussRng g(4);
    auto noisy = clean;
    for (auto& v : noisy) v += cplx(0.05 * g.next(), 0.05 * g.next());
    DenoiseSpec spec;
    spec.rank = 2;  // 2 complex exponentials
    auto out = cadzow(noisy, spec);
    double before = 0, after = 0;
    for (size_t i = 0; i < n; ++i) {
        before += std::norm(noisy[i] - clean[i]);
        after += std::norm(out[i] - clean[i]);
    }
    CHECK(after < 0.5 * before);
}
