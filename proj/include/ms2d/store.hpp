#pragma once

#include "ms2d/config.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ms2d {

enum class ValueKind : uint8_t {
    f32 = 0,
    f64 = 1,
    c64 = 2,  // interleaved complex f64; internal scratch datasets only
};

enum class DomainTag : uint8_t {
    time_time = 0,
    time_freq = 1,
    freq_freq = 2,
};

/** Bytes per stored element. */
size_t kind_bytes(ValueKind k);
/** Doubles per element in the caller-facing API (2 for complex). */
size_t kind_width(ValueKind k);

struct DatasetMeta {
    uint64_t n_rows = 0, n_cols = 0;
    ValueKind kind = ValueKind::f64;
    DomainTag domain = DomainTag::time_time;
    uint32_t chunk_rows = 0, chunk_cols = 0;
    double cal_A_h = 0.0, cal_B_h = 0.0;
    double cal_A_v = 0.0, cal_B_v = 0.0;
    double modulation_offset_hz = 0.0;
    uint8_t mode = 0;  // 0 = magnitude, 1 = absorption
};

enum class RawEncoding { f32le, i32le };

struct AcquisitionParams {
    uint64_t n_t1 = 0, n_t2 = 0;
    double dt1_s = 0.0;           // t1 increment, seconds
    double sample_rate_hz = 0.0;  // t2 sampling rate
    RawEncoding encoding = RawEncoding::f32le;
    std::string data_file;
    // optional header keys; 0 when absent
    double cal_a = 0.0, cal_b = 0.0, modulation_offset = 0.0, mz_max_v = 0.0;

    double vertical_nyquist_hz() const { return 0.5 / dt1_s; }
};

/**
 * 2D sample store. Two backends share one handle type:
 *  - chunked binary container (created datasets), fixed-size chunks in
 *    row-major chunk order, little-endian, bit-exact layout;
 *  - flat raw transient file described by a text header (read-only import).
 *
 * Rows and columns are exchanged as f64 (complex kinds as interleaved pairs,
 * so a "row" of n_cols complex elements is 2*n_cols doubles). Concurrent
 * readers are safe; writers must cover disjoint cell ranges.
 */
class Dataset {
public:
    Dataset();
    ~Dataset();
    Dataset(Dataset&&) noexcept;
    Dataset& operator=(Dataset&&) noexcept;
    Dataset(const Dataset&) = delete;
    Dataset& operator=(const Dataset&) = delete;

    static Dataset create(const std::string& path, const DatasetMeta& meta);
    static Dataset open(const std::string& path, bool writable = false);
    /** Opens a raw transient set via its text header. */
    static Dataset open_raw(const std::string& header_path);

    const DatasetMeta& meta() const;
    /** Acquisition parameters; only present for raw imports. */
    const AcquisitionParams* params() const;
    const std::string& path() const;

    void read_row(uint64_t row, double* dst) const;
    void read_col(uint64_t col, double* dst) const;
    void read_block(uint64_t row0, uint64_t col0, uint64_t n_rows, uint64_t n_cols,
                    double* dst) const;
    void write_row(uint64_t row, const double* src);
    /** Writes a span of one row: columns [col0, col0 + n). */
    void write_row_span(uint64_t row, uint64_t col0, uint64_t n, const double* src);
    void write_col(uint64_t col, const double* src);
    void write_block(uint64_t row0, uint64_t col0, uint64_t n_rows, uint64_t n_cols,
                     const double* src);

    /** Update header calibration/mode fields (container backend only). */
    void set_meta_fields(const DatasetMeta& meta);

    /** Instrumentation for the chunked read path. */
    uint64_t chunk_loads() const;
    size_t cached_bytes() const;

    void flush();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/** Parses a raw-transient text header into acquisition parameters. */
AcquisitionParams parse_raw_header(const std::string& header_path);

/** Writes a raw header + empty data file pair; rows appended via RawWriter. */
struct RawWriter {
    RawWriter(const std::string& dir, const AcquisitionParams& params);
    ~RawWriter();
    RawWriter(const RawWriter&) = delete;
    RawWriter& operator=(const RawWriter&) = delete;
    /** Appends one transient of n_t2 samples (converted to the declared encoding). */
    void append_row(const double* samples);
    void finish();
    std::string header_path() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/** Text sidecar (axis spacings, provenance) next to a container file. */
void write_sidecar(const std::string& dataset_path, const Config& meta);
Config read_sidecar(const std::string& dataset_path);
bool sidecar_exists(const std::string& dataset_path);

} // namespace ms2d
