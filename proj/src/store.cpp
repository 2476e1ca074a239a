#include "ms2d/store.hpp"

#include "ms2d/common.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <mutex>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

// The on-disk layout is little-endian; this backend reads and writes samples
// with plain memcpy and is restricted to little-endian hosts.
static_assert(std::endian::native == std::endian::little,
              "sample IO assumes a little-endian host");

namespace ms2d {

namespace fs = std::filesystem;

size_t kind_bytes(ValueKind k) {
    switch (k) {
        case ValueKind::f32: return 4;
        case ValueKind::f64: return 8;
        case ValueKind::c64: return 16;
    }
    throw UsageError("bad value kind");
}

size_t kind_width(ValueKind k) { return k == ValueKind::c64 ? 2 : 1; }

namespace {

constexpr unsigned char kMagic[4] = {0x53, 0x32, 0x44, 0x31};
constexpr size_t kHeaderBytes = 75;
constexpr uint32_t kVersion = 1;

void pread_all(int fd, void* dst, size_t n, uint64_t off, const std::string& path) {
    unsigned char* p = static_cast<unsigned char*>(dst);
    while (n > 0) {
        ssize_t r = ::pread(fd, p, n, off_t(off));
        if (r < 0) throw Error("read failed at offset " + std::to_string(off) + ": " + path);
        if (r == 0) throw Error("unexpected end of file at offset " + std::to_string(off) + ": " + path);
        p += r;
        n -= size_t(r);
        off += uint64_t(r);
    }
}

void pwrite_all(int fd, const void* src, size_t n, uint64_t off, const std::string& path) {
    const unsigned char* p = static_cast<const unsigned char*>(src);
    while (n > 0) {
        ssize_t r = ::pwrite(fd, p, n, off_t(off));
        if (r < 0) throw Error("write failed at offset " + std::to_string(off) + ": " + path);
        p += r;
        n -= size_t(r);
        off += uint64_t(r);
    }
}

void encode_header(unsigned char* h, const DatasetMeta& m) {
    std::memcpy(h, kMagic, 4);
    le::put_u32(h + 4, kVersion);
    le::put_u64(h + 8, m.n_rows);
    le::put_u64(h + 16, m.n_cols);
    le::put_u8(h + 24, uint8_t(m.kind));
    le::put_u8(h + 25, uint8_t(m.domain));
    le::put_u32(h + 26, m.chunk_rows);
    le::put_u32(h + 30, m.chunk_cols);
    le::put_f64(h + 34, m.cal_A_h);
    le::put_f64(h + 42, m.cal_B_h);
    le::put_f64(h + 50, m.cal_A_v);
    le::put_f64(h + 58, m.cal_B_v);
    le::put_f64(h + 66, m.modulation_offset_hz);
    le::put_u8(h + 74, m.mode);
}

DatasetMeta decode_header(const unsigned char* h, const std::string& path) {
    if (std::memcmp(h, kMagic, 4) != 0)
        throw Error("bad magic at offset 0: not a container file: " + path);
    uint32_t ver = le::get_u32(h + 4);
    if (ver != kVersion)
        throw Error("unsupported container version " + std::to_string(ver) + ": " + path);
    DatasetMeta m;
    m.n_rows = le::get_u64(h + 8);
    m.n_cols = le::get_u64(h + 16);
    uint8_t kind = le::get_u8(h + 24);
    if (kind > 2) throw Error("bad value kind at offset 24: " + path);
    m.kind = ValueKind(kind);
    uint8_t dom = le::get_u8(h + 25);
    if (dom > 2) throw Error("bad domain tag at offset 25: " + path);
    m.domain = DomainTag(dom);
    m.chunk_rows = le::get_u32(h + 26);
    m.chunk_cols = le::get_u32(h + 30);
    m.cal_A_h = le::get_f64(h + 34);
    m.cal_B_h = le::get_f64(h + 42);
    m.cal_A_v = le::get_f64(h + 50);
    m.cal_B_v = le::get_f64(h + 58);
    m.modulation_offset_hz = le::get_f64(h + 66);
    m.mode = le::get_u8(h + 74);
    return m;
}

} // namespace

struct Dataset::Impl {
    enum class Backend { container, raw };
    Backend backend = Backend::container;
    int fd = -1;
    bool writable = false;
    std::string path;
    DatasetMeta meta;
    std::unique_ptr<AcquisitionParams> params;  // raw only
    std::vector<uint64_t> chunk_offsets;        // container only
    uint64_t n_chunk_rows = 0, n_chunk_cols = 0;

    // single cached chunk for gather-style reads
    mutable std::mutex cache_mx;
    mutable std::vector<unsigned char> cache;
    mutable mem::Tracked cache_mem;
    mutable uint64_t cache_cr = ~0ull, cache_cc = ~0ull;
    mutable std::atomic<uint64_t> loads{0};

    ~Impl() {
        if (fd >= 0) ::close(fd);
    }

    size_t elem_bytes() const { return kind_bytes(meta.kind); }
    size_t chunk_bytes() const {
        return size_t(meta.chunk_rows) * meta.chunk_cols * elem_bytes();
    }
    uint64_t chunk_index(uint64_t cr, uint64_t cc) const { return cr * n_chunk_cols + cc; }

    // converts `count` stored elements to doubles (width-expanded for complex)
    void decode_elems(const unsigned char* src, double* dst, size_t count) const {
        switch (meta.kind) {
            case ValueKind::f32: {
                const float* f = reinterpret_cast<const float*>(src);
                for (size_t i = 0; i < count; ++i) dst[i] = double(f[i]);
                break;
            }
            case ValueKind::f64:
                std::memcpy(dst, src, count * 8);
                break;
            case ValueKind::c64:
                std::memcpy(dst, src, count * 16);
                break;
        }
    }

    void encode_elems(const double* src, unsigned char* dst, size_t count) const {
        switch (meta.kind) {
            case ValueKind::f32: {
                float* f = reinterpret_cast<float*>(dst);
                for (size_t i = 0; i < count; ++i) f[i] = float(src[i]);
                break;
            }
            case ValueKind::f64:
                std::memcpy(dst, src, count * 8);
                break;
            case ValueKind::c64:
                std::memcpy(dst, src, count * 16);
                break;
        }
    }

    // raw transient row decode
    void decode_raw_row(const unsigned char* src, double* dst, size_t count) const {
        if (params->encoding == RawEncoding::f32le) {
            const float* f = reinterpret_cast<const float*>(src);
            for (size_t i = 0; i < count; ++i) dst[i] = double(f[i]);
        } else {
            const int32_t* f = reinterpret_cast<const int32_t*>(src);
            for (size_t i = 0; i < count; ++i) dst[i] = double(f[i]);
        }
    }

    const unsigned char* load_chunk(uint64_t cr, uint64_t cc) const {
        if (cache_cr == cr && cache_cc == cc) return cache.data();
        size_t nb = chunk_bytes();
        if (cache.size() != nb) {
            cache.resize(nb);
            cache_mem.resize(nb);
        }
        pread_all(fd, cache.data(), nb, chunk_offsets[chunk_index(cr, cc)], path);
        cache_cr = cr;
        cache_cc = cc;
        loads.fetch_add(1);
        return cache.data();
    }
};

Dataset::Dataset() = default;
Dataset::~Dataset() = default;
Dataset::Dataset(Dataset&&) noexcept = default;
Dataset& Dataset::operator=(Dataset&&) noexcept = default;

Dataset Dataset::create(const std::string& path, const DatasetMeta& meta) {
    if (meta.n_rows == 0 || meta.n_cols == 0)
        throw UsageError("dataset dimensions must be nonzero");
    if (meta.chunk_rows == 0 || meta.chunk_cols == 0)
        throw UsageError("chunk dimensions must be nonzero");
    if (meta.chunk_rows > meta.n_rows || meta.chunk_cols > meta.n_cols)
        throw UsageError("chunk larger than dataset");

    Dataset d;
    d.impl_ = std::make_unique<Impl>();
    Impl& im = *d.impl_;
    im.backend = Impl::Backend::container;
    im.path = path;
    im.meta = meta;
    im.writable = true;
    im.n_chunk_rows = (meta.n_rows + meta.chunk_rows - 1) / meta.chunk_rows;
    im.n_chunk_cols = (meta.n_cols + meta.chunk_cols - 1) / meta.chunk_cols;

    im.fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0644);
    if (im.fd < 0) throw Error("cannot create dataset file: " + path);

    uint64_t n_chunks = im.n_chunk_rows * im.n_chunk_cols;
    uint64_t table_bytes = n_chunks * 8;
    uint64_t data_start = kHeaderBytes + table_bytes;
    im.chunk_offsets.resize(n_chunks);
    for (uint64_t i = 0; i < n_chunks; ++i)
        im.chunk_offsets[i] = data_start + i * im.chunk_bytes();
    uint64_t total = data_start + n_chunks * im.chunk_bytes();
    if (::ftruncate(im.fd, off_t(total)) != 0)
        throw Error("cannot size dataset file to " + std::to_string(total) + " bytes: " + path);

    unsigned char hdr[kHeaderBytes];
    encode_header(hdr, meta);
    pwrite_all(im.fd, hdr, kHeaderBytes, 0, path);
    std::vector<unsigned char> table(table_bytes);
    for (uint64_t i = 0; i < n_chunks; ++i) le::put_u64(table.data() + i * 8, im.chunk_offsets[i]);
    pwrite_all(im.fd, table.data(), table_bytes, kHeaderBytes, path);
    return d;
}

Dataset Dataset::open(const std::string& path, bool writable) {
    Dataset d;
    d.impl_ = std::make_unique<Impl>();
    Impl& im = *d.impl_;
    im.backend = Impl::Backend::container;
    im.path = path;
    im.writable = writable;
    im.fd = ::open(path.c_str(), writable ? O_RDWR : O_RDONLY);
    if (im.fd < 0) throw Error("cannot open dataset file: " + path);

    unsigned char hdr[kHeaderBytes];
    pread_all(im.fd, hdr, kHeaderBytes, 0, path);
    im.meta = decode_header(hdr, path);
    if (im.meta.n_rows == 0 || im.meta.n_cols == 0)
        throw Error("zero dimension in header: " + path);
    if (im.meta.chunk_rows == 0 || im.meta.chunk_cols == 0 ||
        im.meta.chunk_rows > im.meta.n_rows || im.meta.chunk_cols > im.meta.n_cols)
        throw Error("invalid chunk shape in header: " + path);

    im.n_chunk_rows = (im.meta.n_rows + im.meta.chunk_rows - 1) / im.meta.chunk_rows;
    im.n_chunk_cols = (im.meta.n_cols + im.meta.chunk_cols - 1) / im.meta.chunk_cols;
    uint64_t n_chunks = im.n_chunk_rows * im.n_chunk_cols;
    std::vector<unsigned char> table(n_chunks * 8);
    pread_all(im.fd, table.data(), table.size(), kHeaderBytes, path);
    im.chunk_offsets.resize(n_chunks);
    for (uint64_t i = 0; i < n_chunks; ++i)
        im.chunk_offsets[i] = le::get_u64(table.data() + i * 8);

    struct stat st{};
    if (::fstat(im.fd, &st) != 0) throw Error("cannot stat: " + path);
    uint64_t expect = kHeaderBytes + n_chunks * 8 + n_chunks * im.chunk_bytes();
    if (uint64_t(st.st_size) != expect)
        throw Error("container truncated: expected " + std::to_string(expect) +
                    " bytes, found " + std::to_string(st.st_size) + ": " + path);
    return d;
}

AcquisitionParams parse_raw_header(const std::string& header_path) {
    Config c = Config::from_file(header_path);
    AcquisitionParams p;
    p.n_t1 = uint64_t(c.require_i64("n_t1"));
    p.n_t2 = uint64_t(c.require_i64("n_t2"));
    p.dt1_s = c.require_f64("dt1_us") * 1e-6;
    p.sample_rate_hz = c.require_f64("sample_rate_hz");
    std::string enc = c.require_str("encoding");
    if (enc == "f32le") p.encoding = RawEncoding::f32le;
    else if (enc == "i32le") p.encoding = RawEncoding::i32le;
    else throw Error("unknown sample encoding: " + enc);
    p.data_file = c.require_str("data_file");
    p.cal_a = c.get_f64("cal_a_hz_th", 0.0);
    p.cal_b = c.get_f64("cal_b_hz2_th", 0.0);
    p.modulation_offset = c.get_f64("modulation_offset_hz", 0.0);
    p.mz_max_v = c.get_f64("mz_max_v", 0.0);
    if (p.n_t1 == 0) throw Error("zero rows in raw header: " + header_path);
    if (p.n_t2 == 0) throw Error("zero columns in raw header: " + header_path);
    if (p.dt1_s <= 0.0 || p.sample_rate_hz <= 0.0)
        throw Error("non-positive timing in raw header: " + header_path);
    return p;
}

Dataset Dataset::open_raw(const std::string& header_path) {
    AcquisitionParams p = parse_raw_header(header_path);

    Dataset d;
    d.impl_ = std::make_unique<Impl>();
    Impl& im = *d.impl_;
    im.backend = Impl::Backend::raw;
    im.params = std::make_unique<AcquisitionParams>(p);

    fs::path data = fs::path(header_path).parent_path() / p.data_file;
    im.path = data.string();
    im.fd = ::open(im.path.c_str(), O_RDONLY);
    if (im.fd < 0) throw Error("cannot open raw data file: " + im.path);
    struct stat st{};
    if (::fstat(im.fd, &st) != 0) throw Error("cannot stat: " + im.path);
    uint64_t expect = p.n_t1 * p.n_t2 * 4;
    if (uint64_t(st.st_size) != expect)
        throw Error("raw data size mismatch: expected " + std::to_string(expect) +
                    " bytes, found " + std::to_string(st.st_size) + ": " + im.path);

    im.meta.n_rows = p.n_t1;
    im.meta.n_cols = p.n_t2;
    im.meta.kind = ValueKind::f32;
    im.meta.domain = DomainTag::time_time;
    im.meta.chunk_rows = 1;
    im.meta.chunk_cols = uint32_t(std::min<uint64_t>(p.n_t2, 0xffffffffull));
    im.meta.cal_A_h = p.cal_a;
    im.meta.cal_B_h = p.cal_b;
    im.meta.cal_A_v = p.cal_a;
    im.meta.cal_B_v = p.cal_b;
    im.meta.modulation_offset_hz = p.modulation_offset;
    return d;
}

const DatasetMeta& Dataset::meta() const { return impl_->meta; }
const AcquisitionParams* Dataset::params() const { return impl_->params.get(); }
const std::string& Dataset::path() const { return impl_->path; }
uint64_t Dataset::chunk_loads() const { return impl_->loads.load(); }
size_t Dataset::cached_bytes() const { return impl_->cache.size(); }

void Dataset::read_row(uint64_t row, double* dst) const {
    Impl& im = *impl_;
    if (row >= im.meta.n_rows) throw UsageError("row index out of range");
    size_t w = kind_width(im.meta.kind);

    if (im.backend == Impl::Backend::raw) {
        size_t nb = im.meta.n_cols * 4;
        std::vector<unsigned char> buf(nb);
        pread_all(im.fd, buf.data(), nb, row * nb, im.path);
        im.decode_raw_row(buf.data(), dst, im.meta.n_cols);
        return;
    }

    size_t es = im.elem_bytes();
    uint64_t cr = row / im.meta.chunk_rows;
    uint64_t rl = row % im.meta.chunk_rows;
    std::vector<unsigned char> buf;
    for (uint64_t cc = 0; cc < im.n_chunk_cols; ++cc) {
        uint64_t c0 = cc * im.meta.chunk_cols;
        uint64_t span = std::min<uint64_t>(im.meta.chunk_cols, im.meta.n_cols - c0);
        buf.resize(span * es);
        uint64_t off = im.chunk_offsets[im.chunk_index(cr, cc)] +
                       rl * im.meta.chunk_cols * es;
        pread_all(im.fd, buf.data(), span * es, off, im.path);
        im.decode_elems(buf.data(), dst + c0 * w, span);
    }
}

void Dataset::write_row(uint64_t row, const double* src) {
    write_row_span(row, 0, impl_->meta.n_cols, src);
}

void Dataset::write_row_span(uint64_t row, uint64_t col0, uint64_t n, const double* src) {
    Impl& im = *impl_;
    if (im.backend == Impl::Backend::raw) throw UsageError("raw datasets are read-only");
    if (!im.writable) throw UsageError("dataset opened read-only");
    if (row >= im.meta.n_rows || col0 + n > im.meta.n_cols)
        throw UsageError("write out of range");
    size_t es = im.elem_bytes();
    size_t w = kind_width(im.meta.kind);
    uint64_t cr = row / im.meta.chunk_rows;
    uint64_t rl = row % im.meta.chunk_rows;
    std::vector<unsigned char> buf;
    uint64_t c = col0;
    while (c < col0 + n) {
        uint64_t cc = c / im.meta.chunk_cols;
        uint64_t cl = c % im.meta.chunk_cols;
        uint64_t span = std::min<uint64_t>(im.meta.chunk_cols - cl, col0 + n - c);
        buf.resize(span * es);
        im.encode_elems(src + (c - col0) * w, buf.data(), span);
        uint64_t off = im.chunk_offsets[im.chunk_index(cr, cc)] +
                       (rl * im.meta.chunk_cols + cl) * es;
        pwrite_all(im.fd, buf.data(), span * es, off, im.path);
        c += span;
    }
}

void Dataset::read_col(uint64_t col, double* dst) const {
    Impl& im = *impl_;
    if (col >= im.meta.n_cols) throw UsageError("column index out of range");
    size_t w = kind_width(im.meta.kind);

    if (im.backend == Impl::Backend::raw) {
        // gather one element per row; raw rows are flat f32/i32
        std::vector<unsigned char> buf(4);
        for (uint64_t r = 0; r < im.meta.n_rows; ++r) {
            pread_all(im.fd, buf.data(), 4, (r * im.meta.n_cols + col) * 4, im.path);
            im.decode_raw_row(buf.data(), dst + r * w, 1);
        }
        return;
    }

    size_t es = im.elem_bytes();
    uint64_t cc = col / im.meta.chunk_cols;
    uint64_t cl = col % im.meta.chunk_cols;
    for (uint64_t cr = 0; cr < im.n_chunk_rows; ++cr) {
        std::lock_guard<std::mutex> lk(im.cache_mx);
        const unsigned char* ch = im.load_chunk(cr, cc);
        uint64_t r0 = cr * im.meta.chunk_rows;
        uint64_t rows = std::min<uint64_t>(im.meta.chunk_rows, im.meta.n_rows - r0);
        for (uint64_t r = 0; r < rows; ++r)
            im.decode_elems(ch + (r * im.meta.chunk_cols + cl) * es, dst + (r0 + r) * w, 1);
    }
}

void Dataset::write_col(uint64_t col, const double* src) {
    Impl& im = *impl_;
    if (im.backend == Impl::Backend::raw) throw UsageError("raw datasets are read-only");
    if (!im.writable) throw UsageError("dataset opened read-only");
    if (col >= im.meta.n_cols) throw UsageError("column index out of range");
    size_t es = im.elem_bytes();
    size_t w = kind_width(im.meta.kind);
    uint64_t cc = col / im.meta.chunk_cols;
    uint64_t cl = col % im.meta.chunk_cols;
    std::vector<unsigned char> buf(es);
    for (uint64_t r = 0; r < im.meta.n_rows; ++r) {
        uint64_t cr = r / im.meta.chunk_rows;
        uint64_t rl = r % im.meta.chunk_rows;
        im.encode_elems(src + r * w, buf.data(), 1);
        uint64_t off = im.chunk_offsets[im.chunk_index(cr, cc)] +
                       (rl * im.meta.chunk_cols + cl) * es;
        pwrite_all(im.fd, buf.data(), es, off, im.path);
    }
}

void Dataset::read_block(uint64_t row0, uint64_t col0, uint64_t n_rows, uint64_t n_cols,
                         double* dst) const {
    Impl& im = *impl_;
    if (row0 + n_rows > im.meta.n_rows || col0 + n_cols > im.meta.n_cols)
        throw UsageError("block out of range");
    size_t w = kind_width(im.meta.kind);

    if (im.backend == Impl::Backend::raw) {
        std::vector<unsigned char> buf(n_cols * 4);
        for (uint64_t r = 0; r < n_rows; ++r) {
            pread_all(im.fd, buf.data(), n_cols * 4,
                      ((row0 + r) * im.meta.n_cols + col0) * 4, im.path);
            im.decode_raw_row(buf.data(), dst + r * n_cols * w, n_cols);
        }
        return;
    }

    size_t es = im.elem_bytes();
    uint64_t cr0 = row0 / im.meta.chunk_rows;
    uint64_t cr1 = (row0 + n_rows - 1) / im.meta.chunk_rows;
    uint64_t cc0 = col0 / im.meta.chunk_cols;
    uint64_t cc1 = (col0 + n_cols - 1) / im.meta.chunk_cols;
    for (uint64_t cr = cr0; cr <= cr1; ++cr) {
        for (uint64_t cc = cc0; cc <= cc1; ++cc) {
            std::lock_guard<std::mutex> lk(im.cache_mx);
            const unsigned char* ch = im.load_chunk(cr, cc);
            uint64_t rlo = std::max(row0, cr * im.meta.chunk_rows);
            uint64_t rhi = std::min(row0 + n_rows, (cr + 1) * uint64_t(im.meta.chunk_rows));
            uint64_t clo = std::max(col0, cc * im.meta.chunk_cols);
            uint64_t chi = std::min(col0 + n_cols, (cc + 1) * uint64_t(im.meta.chunk_cols));
            for (uint64_t r = rlo; r < rhi; ++r) {
                uint64_t rl = r - cr * im.meta.chunk_rows;
                uint64_t cl = clo - cc * im.meta.chunk_cols;
                im.decode_elems(ch + (rl * im.meta.chunk_cols + cl) * es,
                                dst + ((r - row0) * n_cols + (clo - col0)) * w, chi - clo);
            }
        }
    }
}

void Dataset::write_block(uint64_t row0, uint64_t col0, uint64_t n_rows, uint64_t n_cols,
                          const double* src) {
    size_t w = kind_width(impl_->meta.kind);
    for (uint64_t r = 0; r < n_rows; ++r)
        write_row_span(row0 + r, col0, n_cols, src + r * n_cols * w);
}

void Dataset::set_meta_fields(const DatasetMeta& meta) {
    Impl& im = *impl_;
    if (im.backend == Impl::Backend::raw) throw UsageError("raw datasets are read-only");
    if (!im.writable) throw UsageError("dataset opened read-only");
    im.meta.cal_A_h = meta.cal_A_h;
    im.meta.cal_B_h = meta.cal_B_h;
    im.meta.cal_A_v = meta.cal_A_v;
    im.meta.cal_B_v = meta.cal_B_v;
    im.meta.modulation_offset_hz = meta.modulation_offset_hz;
    im.meta.mode = meta.mode;
    im.meta.domain = meta.domain;
    unsigned char hdr[kHeaderBytes];
    encode_header(hdr, im.meta);
    pwrite_all(im.fd, hdr, kHeaderBytes, 0, im.path);
}

void Dataset::flush() {
    if (impl_ && impl_->fd >= 0) ::fsync(impl_->fd);
}

// ---- raw transient writing ----

struct RawWriter::Impl {
    std::string header_path;
    std::string data_path;
    AcquisitionParams params;
    int fd = -1;
    uint64_t rows_written = 0;
    std::vector<unsigned char> buf;
    ~Impl() {
        if (fd >= 0) ::close(fd);
    }
};

RawWriter::RawWriter(const std::string& dir, const AcquisitionParams& params) {
    impl_ = std::make_unique<Impl>();
    impl_->params = params;
    fs::create_directories(dir);
    impl_->header_path = (fs::path(dir) / "header.t2d").string();
    std::string data_name = params.data_file.empty() ? "transients.bin" : params.data_file;
    impl_->params.data_file = data_name;
    impl_->data_path = (fs::path(dir) / data_name).string();

    std::string hdr;
    hdr += "# raw 2D transient set\n";
    hdr += "n_t1 = " + std::to_string(params.n_t1) + "\n";
    char tmp[64];
    std::snprintf(tmp, sizeof tmp, "%.10g", params.dt1_s * 1e6);
    hdr += std::string("dt1_us = ") + tmp + "\n";
    hdr += "n_t2 = " + std::to_string(params.n_t2) + "\n";
    std::snprintf(tmp, sizeof tmp, "%.10g", params.sample_rate_hz);
    hdr += std::string("sample_rate_hz = ") + tmp + "\n";
    hdr += std::string("encoding = ") +
           (params.encoding == RawEncoding::f32le ? "f32le" : "i32le") + "\n";
    hdr += "data_file = " + data_name + "\n";
    if (params.cal_a != 0.0) {
        std::snprintf(tmp, sizeof tmp, "%.17g", params.cal_a);
        hdr += std::string("cal_a_hz_th = ") + tmp + "\n";
    }
    if (params.cal_b != 0.0) {
        std::snprintf(tmp, sizeof tmp, "%.17g", params.cal_b);
        hdr += std::string("cal_b_hz2_th = ") + tmp + "\n";
    }
    if (params.modulation_offset != 0.0) {
        std::snprintf(tmp, sizeof tmp, "%.17g", params.modulation_offset);
        hdr += std::string("modulation_offset_hz = ") + tmp + "\n";
    }
    if (params.mz_max_v != 0.0) {
        std::snprintf(tmp, sizeof tmp, "%.17g", params.mz_max_v);
        hdr += std::string("mz_max_v = ") + tmp + "\n";
    }

    int hfd = ::open(impl_->header_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (hfd < 0) throw Error("cannot create raw header: " + impl_->header_path);
    pwrite_all(hfd, hdr.data(), hdr.size(), 0, impl_->header_path);
    ::close(hfd);

    impl_->fd = ::open(impl_->data_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (impl_->fd < 0) throw Error("cannot create raw data file: " + impl_->data_path);
}

RawWriter::~RawWriter() = default;

void RawWriter::append_row(const double* samples) {
    Impl& im = *impl_;
    if (im.rows_written >= im.params.n_t1) throw UsageError("raw writer: too many rows");
    size_t n = im.params.n_t2;
    im.buf.resize(n * 4);
    if (im.params.encoding == RawEncoding::f32le) {
        float* f = reinterpret_cast<float*>(im.buf.data());
        for (size_t i = 0; i < n; ++i) f[i] = float(samples[i]);
    } else {
        int32_t* f = reinterpret_cast<int32_t*>(im.buf.data());
        for (size_t i = 0; i < n; ++i) f[i] = int32_t(std::lround(samples[i]));
    }
    pwrite_all(im.fd, im.buf.data(), im.buf.size(), im.rows_written * n * 4, im.data_path);
    ++im.rows_written;
}

void RawWriter::finish() {
    Impl& im = *impl_;
    if (im.rows_written != im.params.n_t1)
        throw Error("raw writer: wrote " + std::to_string(im.rows_written) + " of " +
                    std::to_string(im.params.n_t1) + " rows");
    if (im.fd >= 0) {
        ::close(im.fd);
        im.fd = -1;
    }
}

std::string RawWriter::header_path() const { return impl_->header_path; }

// ---- sidecar ----

void write_sidecar(const std::string& dataset_path, const Config& meta) {
    std::string p = dataset_path + ".meta";
    std::string text = meta.to_text();
    int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw Error("cannot write sidecar: " + p);
    pwrite_all(fd, text.data(), text.size(), 0, p);
    ::close(fd);
}

Config read_sidecar(const std::string& dataset_path) {
    return Config::from_file(dataset_path + ".meta");
}

bool sidecar_exists(const std::string& dataset_path) {
    return fs::exists(dataset_path + ".meta");
}

} // namespace ms2d
