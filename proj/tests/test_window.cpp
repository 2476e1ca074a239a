#include "doctest.h"

#include "ms2d/common.hpp"
#include "ms2d/window.hpp"

#include <algorithm>
#include <cmath>

using namespace ms2d;

static size_t peak_index(size_t n, double f) {
    size_t nf = size_t(std::floor(double(n) * f + 0.5));
    nf = std::clamp<size_t>(nf, 2, n - 2);
    return nf;
}

TEST_CASE("asymmetric window endpoints and maximum") {
    const size_t n = 4096;
    auto w = kv_window(n, 0.25, false);
    REQUIRE(w.size() == n);
    size_t nf = peak_index(n, 0.25);
    CHECK(w[0] == 0.0);
    CHECK(w[nf - 1] == 1.0);
    CHECK(*std::max_element(w.begin(), w.end()) == 1.0);
    for (double v : w) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("asymmetric window is monotone on each side of the peak") {
    auto w = kv_window(1000, 0.25, false);
    size_t nf = peak_index(1000, 0.25);
    for (size_t i = 1; i < nf; ++i) CHECK(w[i] >= w[i - 1]);
    for (size_t i = nf + 1; i < w.size(); ++i) CHECK(w[i] <= w[i - 1]);
    CHECK(w.back() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("square-root fall passes through 0.70711 where the plain fall is half") {
    const size_t n = 4096;
    auto plain = kv_window(n, 0.25, false);
    auto rooty = kv_window(n, 0.25, true);
    size_t nf = peak_index(n, 0.25);

    // locate the fall sample closest to 0.5 on the plain window
    size_t half = nf;
    double best = 1e9;
    for (size_t i = nf; i < n; ++i) {
        double d = std::abs(plain[i] - 0.5);
        if (d < best) {
            best = d;
            half = i;
        }
    }
    CHECK(plain[half] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(rooty[half] == doctest::Approx(std::sqrt(plain[half])).epsilon(1e-12));
    CHECK(rooty[half] == doctest::Approx(0.70711).epsilon(1e-3));

    // sqrt variant never loses amplitude relative to the plain fall
    for (size_t i = nf; i < n; ++i) CHECK(rooty[i] >= plain[i] - 1e-15);
    // rise is untouched
    for (size_t i = 0; i < nf; ++i) CHECK(rooty[i] == plain[i]);
}

TEST_CASE("asymmetric window rejects bad arguments") {
    CHECK_THROWS_AS(kv_window(3, 0.25, false), UsageError);
    CHECK_THROWS_AS(kv_window(100, 0.0, false), UsageError);
    CHECK_THROWS_AS(kv_window(100, 1.0, false), UsageError);
}

TEST_CASE("sine bell matches the closed form") {
    auto w = sine_bell(3, 0.0);
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(1.0));
    CHECK(std::abs(w[2]) < 1e-12);

    auto s = sine_bell(5, 0.5);
    CHECK(s[0] == doctest::Approx(1.0));
    for (double v : s) CHECK(v <= 1.0 + 1e-15);

    CHECK_THROWS_AS(sine_bell(5, 1.5), UsageError);
    CHECK_THROWS_AS(sine_bell(1, 0.0), UsageError);
}

TEST_CASE("window application is elementwise with identity for none") {
    std::vector<double> sig{1.0, -2.0, 3.0, 0.5, 2.0, -1.0, 0.25, 4.0};
    ApodizationSpec none{WindowFamily::none, 0.25, 0.5};
    auto wn = make_window(none, sig.size());
    CHECK(wn.empty());
    auto out = sig;
    apply_window(out.data(), out.size(), wn);
    CHECK(out == sig);

    ApodizationSpec kva{WindowFamily::kv_asym, 0.25, 0.5};
    auto w = make_window(kva, 64);
    REQUIRE(w.size() == 64);
    std::vector<double> ones(64, 1.0);
    apply_window(ones.data(), ones.size(), w);
    for (size_t i = 0; i < 64; ++i) CHECK(ones[i] == w[i]);

    // first sample of any windowed signal is forced to zero
    std::vector<double> sig2(64, 2.5);
    apply_window(sig2.data(), sig2.size(), w);
    CHECK(sig2[0] == 0.0);

    // window/signal length mismatch is refused
    CHECK_THROWS_AS(apply_window(sig2.data(), 32, w), UsageError);
}

TEST_CASE("family names round-trip") {
    for (auto f : {WindowFamily::none, WindowFamily::sine_bell, WindowFamily::kv_asym,
                   WindowFamily::kv_asym_sqrt}) {
        CHECK(window_family_from_name(window_family_name(f)) == f);
    }
    CHECK_THROWS_AS(window_family_from_name("gauss"), UsageError);
}
