#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>

namespace ms2d {

/** Processing failure: bad data, numerical breakdown, storage errors. Maps to exit 1. */
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Caller misuse: bad arguments, invalid configuration. Maps to exit 2. */
struct UsageError : Error {
    using Error::Error;
};

// ---- little-endian scalar packing (byte-order independent) ----

namespace le {

inline void put_u8(unsigned char* p, uint8_t v) { p[0] = v; }
inline void put_u32(unsigned char* p, uint32_t v) {
    p[0] = v & 0xff; p[1] = (v >> 8) & 0xff; p[2] = (v >> 16) & 0xff; p[3] = (v >> 24) & 0xff;
}
inline void put_u64(unsigned char* p, uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = (v >> (8 * i)) & 0xff;
}
inline void put_f64(unsigned char* p, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(p, bits);
}
inline void put_f32(unsigned char* p, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(p, bits);
}

inline uint8_t get_u8(const unsigned char* p) { return p[0]; }
inline uint32_t get_u32(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
inline uint64_t get_u64(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
    return v;
}
inline double get_f64(const unsigned char* p) {
    uint64_t bits = get_u64(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
inline float get_f32(const unsigned char* p) {
    uint32_t bits = get_u32(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace le

// ---- deterministic parallel loop ----

/**
 * Runs fn(begin, end) over a static partition of [0, n). threads <= 1 runs inline.
 * Work items must be independent; per-item results may not depend on the partition.
 */
void parallel_for(size_t n, int threads, const std::function<void(size_t, size_t)>& fn);

/** Resolves a worker-count request: 0 = hardware concurrency, else the request. */
int resolve_threads(int requested);

// ---- seeded RNG (pinned algorithm so frozen test values survive library changes) ----

struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    /** Uniform in (0,1). */
    double uniform() { return (double(next() >> 11) + 0.5) * 0x1.0p-53; }
};

/** Gaussian deviates via Box-Muller on SplitMix64. */
struct GaussRng {
    SplitMix64 u;
    double spare = 0.0;
    bool have_spare = false;
    explicit GaussRng(uint64_t seed) : u(seed) {}
    double next();
};

/** Derives an independent per-row stream from a base seed. */
inline uint64_t row_seed(uint64_t base, uint64_t row) {
    SplitMix64 s(base ^ (0x632be59bd9b4e019ull * (row + 1)));
    return s.next();
}

// ---- working-set accounting (used by the out-of-core memory bound tests) ----

namespace mem {

void track(size_t bytes);
void untrack(size_t bytes);
size_t current();
size_t high_water();
void reset_high_water();

/** RAII registration of one buffer's footprint. */
struct Tracked {
    size_t n = 0;
    Tracked() = default;
    explicit Tracked(size_t bytes) : n(bytes) { track(n); }
    ~Tracked() { if (n) untrack(n); }
    Tracked(const Tracked&) = delete;
    Tracked& operator=(const Tracked&) = delete;
    Tracked(Tracked&& o) noexcept : n(o.n) { o.n = 0; }
    Tracked& operator=(Tracked&& o) noexcept {
        if (this != &o) { if (n) untrack(n); n = o.n; o.n = 0; }
        return *this;
    }
    void resize(size_t bytes) {
        if (n) untrack(n);
        n = bytes;
        if (n) track(n);
    }
};

} // namespace mem

} // namespace ms2d
