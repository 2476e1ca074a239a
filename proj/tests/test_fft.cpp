#include "doctest.h"

#include "ms2d/common.hpp"
#include "ms2d/fftutil.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

using namespace ms2d;

TEST_CASE("real transform puts a cosine at its bin with amplitude n/2") {
    const size_t n = 1024;
    const size_t k = 37;
    std::vector<double> x(n);
    for (size_t i = 0; i < n; ++i)
        x[i] = 3.0 * std::cos(2.0 * std::numbers::pi * double(k) * double(i) / double(n));
    std::vector<cplx> X(n / 2);
    rfft_half(x.data(), n, n, X.data());
    CHECK(std::abs(X[k]) == doctest::Approx(3.0 * n / 2.0).epsilon(1e-9));
    double off = 0;
    for (size_t i = 0; i < n / 2; ++i)
        if (i != k) off = std::max(off, std::abs(X[i]));
    CHECK(off < 1e-7 * std::abs(X[k]));
}

TEST_CASE("zero padding doubles the bin index and interpolates") {
    const size_t n = 256, k = 10;
    std::vector<double> x(n);
    for (size_t i = 0; i < n; ++i)
        x[i] = std::cos(2.0 * std::numbers::pi * double(k) * double(i) / double(n));
    std::vector<cplx> X(n);  // pad to 2n, keep n bins
    rfft_half(x.data(), n, 2 * n, X.data());
    double best = 0;
    size_t arg = 0;
    for (size_t i = 0; i < n; ++i)
        if (std::abs(X[i]) > best) {
            best = std::abs(X[i]);
            arg = i;
        }
    CHECK(arg == 2 * k);
    CHECK(best == doctest::Approx(double(n) / 2.0).epsilon(1e-9));
}

TEST_CASE("complex transform separates positive-frequency content") {
    const size_t n = 512, k = 100;
    std::vector<cplx> z(n);
    for (size_t i = 0; i < n; ++i) {
        double ph = 2.0 * std::numbers::pi * double(k) * double(i) / double(n);
        z[i] = cplx(std::cos(ph), std::sin(ph));  // e^{+i 2 pi k n / N}
    }
    std::vector<cplx> Z(n / 2);
    cfft_half(z.data(), n, n, Z.data());
    CHECK(std::abs(Z[k]) == doctest::Approx(double(n)).epsilon(1e-9));
    for (size_t i = 0; i < n / 2; ++i)
        if (i != k) CHECK(std::abs(Z[i]) < 1e-6 * n);
}

TEST_CASE("full complex transform keeps negative frequencies") {
    const size_t n = 64;
    std::vector<cplx> z(n);
    for (size_t i = 0; i < n; ++i) {
        double ph = -2.0 * std::numbers::pi * 5.0 * double(i) / double(n);
        z[i] = cplx(std::cos(ph), std::sin(ph));  // e^{-i ...} lands at bin n-5
    }
    std::vector<cplx> Z(n);
    cfft_full(z.data(), n, Z.data());
    CHECK(std::abs(Z[n - 5]) == doctest::Approx(double(n)).epsilon(1e-9));
    CHECK(std::abs(Z[5]) < 1e-9 * n);
}

TEST_CASE("transforms are bitwise deterministic") {
    const size_t n = 2048;
    SplitMix64 rng(5);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform() - 0.5;
    std::vector<cplx> a(n), b(n);
    rfft_half(x.data(), n, 2 * n, a.data());
    rfft_half(x.data(), n, 2 * n, b.data());
    CHECK(std::memcmp(a.data(), b.data(), n * sizeof(cplx)) == 0);
}

TEST_CASE("concurrent transforms agree with serial results") {
    const size_t n = 1024, rows = 32;
    std::vector<std::vector<double>> in(rows, std::vector<double>(n));
    SplitMix64 rng(11);
    for (auto& r : in)
        for (auto& v : r) v = rng.uniform() - 0.5;

    std::vector<std::vector<cplx>> serial(rows, std::vector<cplx>(n));
    for (size_t r = 0; r < rows; ++r)
        rfft_half(in[r].data(), n, 2 * n, serial[r].data());

    std::vector<std::vector<cplx>> par(rows, std::vector<cplx>(n));
    parallel_for(rows, 8, [&](size_t b, size_t e) {
        for (size_t r = b; r < e; ++r)
            rfft_half(in[r].data(), n, 2 * n, par[r].data());
    });
    for (size_t r = 0; r < rows; ++r)
        CHECK(std::memcmp(serial[r].data(), par[r].data(), n * sizeof(cplx)) == 0);
}

TEST_CASE("padding shorter inputs zero-fills the tail") {
    const size_t n = 100, pad = 256;
    std::vector<double> x(n, 1.0);
    std::vector<cplx> X(pad / 2);
    rfft_half(x.data(), n, pad, X.data());
    // DC bin equals the sum of samples
    CHECK(X[0].real() == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(X[0].imag() == doctest::Approx(0.0));
}
