#pragma once

#include "ms2d/calib.hpp"
#include "ms2d/config.hpp"
#include "ms2d/store.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ms2d {

struct SimFragment {
    double mz = 0.0;
    double yield = 1.0;
};

struct SimPrecursor {
    double mz = 0.0;
    double abundance = 1.0;
    double residual = 0.0;   // fraction of the precursor's own signal surviving fragmentation
    double mod_phase = 0.0;  // modulation phase at t1 = 0, radians
    double harmonic2 = 0.0;  // optional second-harmonic coefficient of the modulation
    std::vector<SimFragment> fragments;
};

/**
 * Full description of a synthetic 2D acquisition: encoded precursors with
 * their fragments, timing, calibration, injected phase aberrations and the
 * noise model. The parsed form of a `sim.cfg` text config.
 */
struct SimSpec {
    std::vector<SimPrecursor> precursors;
    uint64_t n_t1 = 0, n_t2 = 0;
    double dt1 = 0.0;          // t1 increment, seconds
    double sample_rate = 0.0;  // t2 sampling rate, Hz
    RawEncoding encoding = RawEncoding::f32le;
    Calibration cal;                  // A, B; offset kept separately below
    double modulation_offset = 0.0;   // Hz, subtracted from cyclotron frequencies
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // horizontal aberration injected at each line
    double d0 = 0.0, d1 = 0.0;            // vertical aberration on the modulation argument
    double tau = 0.0;                     // transient decay constant, seconds
    double noise_sigma = 0.0;
    double scintillation = 0.0;  // noise amplitude as a fraction of the local clean signal
    uint64_t seed = 1;

    double vertical_nyquist_hz() const { return 0.5 / dt1; }
    /** Modulation frequency of a precursor: cyclotron minus the offset. */
    double modulation_freq(const SimPrecursor& p) const;
    /** Detected (horizontal) frequency of an ion of the given m/z. */
    double horizontal_freq(double mz) const;
};

/** Parses and validates a simulator config. Throws UsageError on bad input. */
SimSpec parse_sim_spec(const Config& cfg);

struct TruthPeak {
    size_t precursor = 0;  // index into SimSpec::precursors
    bool self_term = false;
    double mz_h = 0.0, mz_v = 0.0;
    double f_h = 0.0;   // horizontal frequency, Hz
    double nu_v = 0.0;  // vertical modulation frequency, Hz
    size_t col = 0, row = 0;  // nearest bins of the twofold zero-filled spectrum
    double rel_height = 0.0;  // product of abundance and yield (or residual)
};

struct GroundTruth {
    std::vector<TruthPeak> peaks;  // sorted by (row, col)
    double df_h = 0.0, df_v = 0.0;
};

/** Expected 2D peak table for a spec; deterministic, no synthesis involved. */
GroundTruth ground_truth(const SimSpec& spec);

/** Writes the ground-truth table as CSV with a header line. */
void write_ground_truth_csv(const GroundTruth& gt, const std::string& path);

/**
 * Generates the transient for one t1 row into out[n_t2]. Deterministic for a
 * fixed spec regardless of which rows are generated or in what order.
 */
void synth_row(const SimSpec& spec, uint64_t row, double* out);

/**
 * Synthesizes the full grid into `dir` as a raw transient set (text header +
 * data file) plus `ground_truth.csv`. Rows are generated in parallel but
 * written in order, so output bytes do not depend on the thread count.
 * Returns the header path.
 */
std::string synthesize(const SimSpec& spec, const std::string& dir, int threads = 1);

} // namespace ms2d
