#include "doctest.h"

#include "ms2d/common.hpp"
#include "ms2d/config.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

using namespace ms2d;

TEST_CASE("key-value text parses with comments and blank lines") {
    Config c = Config::from_string(
        "# leading comment\n"
        "\n"
        "alpha = 3\n"
        "  beta =  hello world  \n"
        "gamma = 2.5 # trailing note\n");
    CHECK(c.get_i64("alpha", 0) == 3);
    CHECK(c.get_str("beta", "") == "hello world");
    CHECK(c.get_f64("gamma", 0.0) == doctest::Approx(2.5));
    CHECK(c.has("alpha"));
    CHECK_FALSE(c.has("delta"));
}

TEST_CASE("missing separator reports the line number") {
    CHECK_THROWS_WITH_AS(Config::from_string("ok = 1\nbroken line\n"),
                         doctest::Contains("line 2"), UsageError);
}

TEST_CASE("numeric parsing rejects trailing garbage") {
    Config c = Config::from_string("x = 12abc\ny = 1e3\n");
    CHECK_THROWS_AS(c.get_f64("x", 0.0), UsageError);
    CHECK(c.get_f64("y", 0.0) == doctest::Approx(1000.0));
    CHECK_THROWS_AS(c.get_i64("y", 0), UsageError);
}

TEST_CASE("required keys throw when absent") {
    Config c = Config::from_string("present = 1\n");
    CHECK(c.require_i64("present") == 1);
    CHECK_THROWS_WITH_AS(c.require_f64("absent"), doctest::Contains("absent"), UsageError);
}

TEST_CASE("booleans accept common spellings") {
    Config c = Config::from_string("a = true\nb = 0\nc = yes\nd = off\n");
    CHECK(c.get_bool("a", false));
    CHECK_FALSE(c.get_bool("b", true));
    CHECK(c.get_bool("c", false));
    CHECK_FALSE(c.get_bool("d", true));
    CHECK(c.get_bool("missing", true));
}

TEST_CASE("prefix enumeration returns sorted keys") {
    Config c = Config::from_string(
        "peak_2 = b\npeak_10 = c\npeak_1 = a\nother = x\n");
    auto keys = c.keys_with_prefix("peak_");
    REQUIRE(keys.size() == 3);
    CHECK(keys[0] == "peak_1");
    CHECK(keys[1] == "peak_10");
    CHECK(keys[2] == "peak_2");
}

TEST_CASE("round trip through text preserves entries") {
    Config c;
    c.set("zeta", "9");
    c.set("alpha", "1.25");
    Config back = Config::from_string(c.to_text());
    CHECK(back.get_f64("alpha", 0.0) == doctest::Approx(1.25));
    CHECK(back.get_i64("zeta", 0) == 9);
}

TEST_CASE("file loading and missing file error") {
    std::string path = "cfg_roundtrip_test.tmp";
    {
        std::ofstream f(path);
        f << "k = v\n";
    }
    Config c = Config::from_file(path);
    CHECK(c.get_str("k", "") == "v");
    std::remove(path.c_str());
    CHECK_THROWS_AS(Config::from_file("definitely_not_here.cfg"), Error);
}

TEST_CASE("range strings parse as lo:hi") {
    auto r = parse_range("12.5:90");
    CHECK(r.first == doctest::Approx(12.5));
    CHECK(r.second == doctest::Approx(90.0));
    CHECK_THROWS_AS(parse_range("12.5"), UsageError);
    CHECK_THROWS_AS(parse_range("a:b"), UsageError);
}

TEST_CASE("deterministic rng stream is pinned") {
    SplitMix64 r(42);
    uint64_t first = r.next();
    SplitMix64 r2(42);
    CHECK(r2.next() == first);
    CHECK(first != r.next());

    // uniform stays inside (0,1)
    SplitMix64 u(7);
    for (int i = 0; i < 1000; ++i) {
        double x = u.uniform();
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("gaussian variates have sane first moments") {
    GaussRng g(123);
    double s = 0, s2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double x = g.next();
        s += x;
        s2 += x * x;
    }
    double mean = s / n;
    double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("per-row seeds differ across rows and repeat across calls") {
    uint64_t a = row_seed(99, 0);
    uint64_t b = row_seed(99, 1);
    CHECK(a != b);
    CHECK(row_seed(99, 0) == a);
    CHECK(row_seed(100, 0) != a);
}

TEST_CASE("parallel for covers the range exactly once") {
    const size_t n = 1003;
    std::vector<std::atomic<int>> hits(n);
    for (auto& h : hits) h = 0;
    parallel_for(n, 7, [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) hits[i].fetch_add(1);
    });
    for (size_t i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
}

TEST_CASE("parallel for propagates worker exceptions") {
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [&](size_t b, size_t) {
                                     if (b > 0) throw Error("boom");
                                 }),
                    Error);
}

TEST_CASE("memory tracker reports the high-water mark") {
    mem::reset_high_water();
    size_t base = mem::current();
    {
        mem::Tracked t;
        t.resize(1 << 20);
        CHECK(mem::current() >= base + (1 << 20));
        t.resize(1 << 10);
    }
    CHECK(mem::current() == base);
    CHECK(mem::high_water() >= base + (1 << 20));
}
