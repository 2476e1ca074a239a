#include "doctest.h"

#include "ms2d/common.hpp"
#include "ms2d/config.hpp"
#include "ms2d/store.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

using namespace ms2d;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path p;
    TempDir() {
        p = fs::temp_directory_path() / ("ms2d_store_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
    }
    ~TempDir() { fs::remove_all(p); }
    std::string file(const std::string& name) const { return (p / name).string(); }
};

DatasetMeta small_meta() {
    DatasetMeta m;
    m.n_rows = 6;
    m.n_cols = 10;
    m.kind = ValueKind::f32;
    m.domain = DomainTag::freq_freq;
    m.chunk_rows = 4;
    m.chunk_cols = 8;
    m.cal_A_h = 2.305e8;
    m.cal_B_h = 0.0;
    m.cal_A_v = 1.0e8;
    m.cal_B_v = 1.0;
    m.modulation_offset_hz = 5000.0;
    m.mode = 1;
    return m;
}

double read_f64_at(const std::vector<unsigned char>& b, size_t off) {
    double d;
    std::memcpy(&d, b.data() + off, 8);
    return d;
}

} // namespace

TEST_CASE("container header bytes are pinned") {
    TempDir td;
    std::string path = td.file("hdr.s2d");
    { Dataset d = Dataset::create(path, small_meta()); }

    std::ifstream f(path, std::ios::binary);
    std::vector<unsigned char> b(619);
    f.read(reinterpret_cast<char*>(b.data()), b.size());
    REQUIRE(f.gcount() == 619);

    CHECK(b[0] == 0x53);  // 'S'
    CHECK(b[1] == 0x32);  // '2'
    CHECK(b[2] == 0x44);  // 'D'
    CHECK(b[3] == 0x31);  // '1'
    CHECK(le::get_u32(b.data() + 4) == 1);      // version
    CHECK(le::get_u64(b.data() + 8) == 6);      // rows
    CHECK(le::get_u64(b.data() + 16) == 10);    // cols
    CHECK(b[24] == 0);                          // f32 samples
    CHECK(b[25] == 2);                          // frequency-frequency domain
    CHECK(le::get_u32(b.data() + 26) == 4);     // chunk rows
    CHECK(le::get_u32(b.data() + 30) == 8);     // chunk cols
    CHECK(read_f64_at(b, 34) == 2.305e8);
    CHECK(read_f64_at(b, 42) == 0.0);
    CHECK(read_f64_at(b, 50) == 1.0e8);
    CHECK(read_f64_at(b, 58) == 1.0);
    CHECK(read_f64_at(b, 66) == 5000.0);
    CHECK(b[74] == 1);                          // absorption mode tag

    // chunk offset table: 4 chunks, full-size edge chunks, data at 107
    const uint64_t chunk_bytes = 4ull * 8 * 4;
    for (uint64_t i = 0; i < 4; ++i)
        CHECK(le::get_u64(b.data() + 75 + i * 8) == 107 + i * chunk_bytes);
    CHECK(fs::file_size(path) == 107 + 4 * chunk_bytes);
}

TEST_CASE("rows, columns and blocks round-trip through chunked storage") {
    TempDir td;
    std::string path = td.file("rt.s2d");
    DatasetMeta m = small_meta();
    m.kind = ValueKind::f64;
    Dataset d = Dataset::create(path, m);

    std::vector<double> row(m.n_cols);
    for (uint64_t r = 0; r < m.n_rows; ++r) {
        for (uint64_t c = 0; c < m.n_cols; ++c) row[c] = double(r * 100 + c);
        d.write_row(r, row.data());
    }

    std::vector<double> got(m.n_cols);
    for (uint64_t r = 0; r < m.n_rows; ++r) {
        d.read_row(r, got.data());
        for (uint64_t c = 0; c < m.n_cols; ++c) CHECK(got[c] == double(r * 100 + c));
    }

    std::vector<double> col(m.n_rows);
    d.read_col(9, col.data());
    for (uint64_t r = 0; r < m.n_rows; ++r) CHECK(col[r] == double(r * 100 + 9));

    std::vector<double> blk(3 * 4);
    d.read_block(2, 5, 3, 4, blk.data());
    for (uint64_t r = 0; r < 3; ++r)
        for (uint64_t c = 0; c < 4; ++c) CHECK(blk[r * 4 + c] == double((r + 2) * 100 + c + 5));
}

TEST_CASE("unwritten regions read back as zero") {
    TempDir td;
    DatasetMeta m = small_meta();
    m.kind = ValueKind::f64;
    Dataset d = Dataset::create(td.file("z.s2d"), m);
    std::vector<double> got(m.n_cols, 99.0);
    d.read_row(3, got.data());
    for (double v : got) CHECK(v == 0.0);
}

TEST_CASE("row span writes leave neighbors untouched") {
    TempDir td;
    DatasetMeta m = small_meta();
    m.kind = ValueKind::f64;
    Dataset d = Dataset::create(td.file("span.s2d"), m);

    std::vector<double> full(m.n_cols, 1.0);
    d.write_row(2, full.data());
    // overwrite cols [6, 9) crossing the chunk boundary at 8
    std::vector<double> part{7.0, 8.0, 9.0};
    d.write_row_span(2, 6, 3, part.data());

    std::vector<double> got(m.n_cols);
    d.read_row(2, got.data());
    for (uint64_t c = 0; c < m.n_cols; ++c) {
        double want = (c >= 6 && c < 9) ? double(c + 1) : 1.0;
        CHECK(got[c] == want);
    }
    d.read_row(1, got.data());
    for (double v : got) CHECK(v == 0.0);
}

TEST_CASE("complex-valued datasets interleave re and im") {
    TempDir td;
    DatasetMeta m = small_meta();
    m.kind = ValueKind::c64;
    Dataset d = Dataset::create(td.file("c.s2d"), m);
    std::vector<double> row(2 * m.n_cols);
    for (uint64_t c = 0; c < m.n_cols; ++c) {
        row[2 * c] = double(c);
        row[2 * c + 1] = -double(c);
    }
    d.write_row(1, row.data());
    std::vector<double> col(2 * m.n_rows);
    d.read_col(4, col.data());
    CHECK(col[2 * 1] == 4.0);
    CHECK(col[2 * 1 + 1] == -4.0);
    CHECK(col[0] == 0.0);
}

TEST_CASE("reads hold at most one resident chunk") {
    TempDir td;
    DatasetMeta m;
    m.n_rows = 64;
    m.n_cols = 64;
    m.kind = ValueKind::f64;
    m.chunk_rows = 16;
    m.chunk_cols = 16;
    Dataset d = Dataset::create(td.file("cache.s2d"), m);
    std::vector<double> row(m.n_cols);
    for (uint64_t r = 0; r < m.n_rows; ++r) {
        for (uint64_t c = 0; c < m.n_cols; ++c) row[c] = double(r + c);
        d.write_row(r, row.data());
    }

    const size_t chunk_bytes = 16 * 16 * 8;
    std::vector<double> col(m.n_rows);
    for (uint64_t c = 0; c < m.n_cols; ++c) {
        d.read_col(c, col.data());
        CHECK(d.cached_bytes() <= chunk_bytes);
    }

    // a block covering one chunk-column stripe loads each chunk exactly once
    uint64_t before = d.chunk_loads();
    std::vector<double> blk(m.n_rows * 16);
    d.read_block(0, 16, m.n_rows, 16, blk.data());
    CHECK(d.chunk_loads() - before == 4);
    for (uint64_t r = 0; r < m.n_rows; ++r)
        for (uint64_t c = 0; c < 16; ++c) CHECK(blk[r * 16 + c] == double(r + c + 16));
}

TEST_CASE("metadata survives reopen and field updates persist") {
    TempDir td;
    std::string path = td.file("meta.s2d");
    { Dataset d = Dataset::create(path, small_meta()); }
    {
        Dataset d = Dataset::open(path, true);
        CHECK(d.meta().n_rows == 6);
        CHECK(d.meta().cal_A_v == 1.0e8);
        DatasetMeta m2 = d.meta();
        m2.cal_A_v = 7e7;
        m2.mode = 0;
        d.set_meta_fields(m2);
    }
    Dataset d = Dataset::open(path, false);
    CHECK(d.meta().cal_A_v == 7e7);
    CHECK(d.meta().mode == 0);
    CHECK(d.meta().n_cols == 10);
}

TEST_CASE("a truncated container is refused with sizes in the message") {
    TempDir td;
    std::string path = td.file("trunc.s2d");
    { Dataset d = Dataset::create(path, small_meta()); }
    fs::resize_file(path, fs::file_size(path) - 10);
    CHECK_THROWS_WITH_AS(Dataset::open(path, false), doctest::Contains("expected"), Error);
}

TEST_CASE("raw transient sets round-trip through the writer") {
    TempDir td;
    AcquisitionParams p;
    p.n_t1 = 4;
    p.n_t2 = 16;
    p.dt1_s = 2e-6;
    p.sample_rate_hz = 1e6;
    p.encoding = RawEncoding::f32le;
    p.cal_a = 2.305e8;
    p.modulation_offset = 5000.0;

    std::string dir = td.file("raws");
    RawWriter w(dir, p);
    std::vector<double> row(p.n_t2);
    for (uint64_t r = 0; r < p.n_t1; ++r) {
        for (uint64_t c = 0; c < p.n_t2; ++c) row[c] = double(r) - 0.25 * double(c);
        w.append_row(row.data());
    }
    w.finish();

    Dataset d = Dataset::open_raw(w.header_path());
    REQUIRE(d.params() != nullptr);
    CHECK(d.params()->sample_rate_hz == 1e6);
    CHECK(d.params()->dt1_s == doctest::Approx(2e-6));
    CHECK(d.params()->cal_a == 2.305e8);
    CHECK(d.meta().n_rows == 4);
    CHECK(d.meta().n_cols == 16);

    std::vector<double> got(p.n_t2);
    d.read_row(2, got.data());
    for (uint64_t c = 0; c < p.n_t2; ++c)
        CHECK(got[c] == doctest::Approx(2.0 - 0.25 * double(c)).epsilon(1e-6));

    std::vector<double> col(p.n_t1);
    d.read_col(3, col.data());
    for (uint64_t r = 0; r < p.n_t1; ++r)
        CHECK(col[r] == doctest::Approx(double(r) - 0.75).epsilon(1e-6));
}

TEST_CASE("integer-encoded raw data decodes to doubles") {
    TempDir td;
    AcquisitionParams p;
    p.n_t1 = 2;
    p.n_t2 = 4;
    p.dt1_s = 1e-6;
    p.sample_rate_hz = 2e6;
    p.encoding = RawEncoding::i32le;

    RawWriter w(td.file("rawi"), p);
    std::vector<double> r0{1.0, -2.0, 100000.0, -7.0};
    std::vector<double> r1{0.0, 5.0, -5.0, 2147483.0};
    w.append_row(r0.data());
    w.append_row(r1.data());
    w.finish();

    Dataset d = Dataset::open_raw(w.header_path());
    std::vector<double> got(4);
    d.read_row(1, got.data());
    CHECK(got[3] == 2147483.0);
    d.read_row(0, got.data());
    CHECK(got[1] == -2.0);
}

TEST_CASE("raw data size mismatch is refused with both sizes") {
    TempDir td;
    AcquisitionParams p;
    p.n_t1 = 4;
    p.n_t2 = 8;
    p.dt1_s = 1e-6;
    p.sample_rate_hz = 1e6;
    p.encoding = RawEncoding::f32le;
    std::string dir = td.file("rawbad");
    RawWriter w(dir, p);
    std::vector<double> row(8, 0.0);
    for (int i = 0; i < 4; ++i) w.append_row(row.data());
    w.finish();

    fs::resize_file(fs::path(dir) / "transients.bin", 100);
    CHECK_THROWS_WITH_AS(Dataset::open_raw(w.header_path()), doctest::Contains("128"), Error);
}

TEST_CASE("raw header validation catches missing and bad keys") {
    TempDir td;
    std::string hp = td.file("h.t2d");
    {
        std::ofstream f(hp);
        f << "n_t1 = 4\nn_t2 = 8\ndt1_us = 1\n";  // missing rate, encoding, data_file
    }
    CHECK_THROWS_AS(parse_raw_header(hp), Error);
    {
        std::ofstream f(hp);
        f << "n_t1 = 4\nn_t2 = 8\ndt1_us = 1\nsample_rate_hz = 1e6\n"
          << "encoding = f16le\ndata_file = x.bin\n";
    }
    CHECK_THROWS_WITH_AS(parse_raw_header(hp), doctest::Contains("encoding"), Error);
}

TEST_CASE("sidecar metadata round-trips next to the dataset") {
    TempDir td;
    std::string path = td.file("side.s2d");
    { Dataset d = Dataset::create(path, small_meta()); }
    CHECK_FALSE(sidecar_exists(path));
    Config c;
    c.set("source", "unit-test");
    c.set("threads", "4");
    write_sidecar(path, c);
    CHECK(sidecar_exists(path));
    Config back = read_sidecar(path);
    CHECK(back.get_str("source", "") == "unit-test");
    CHECK(back.get_i64("threads", 0) == 4);
}
