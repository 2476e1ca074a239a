#pragma once

#include "ms2d/calib.hpp"
#include "ms2d/config.hpp"
#include "ms2d/denoise.hpp"
#include "ms2d/phase.hpp"
#include "ms2d/store.hpp"
#include "ms2d/window.hpp"

#include <string>

namespace ms2d {

enum class SpectrumMode : uint8_t { magnitude = 0, absorption = 1 };

struct LpSettings {
    bool enabled = false;
    size_t n_corrupt = 0;  // 0 = derive from the vertical phase rotation count
    size_t order = 6;
    double train_fraction = 0.5;  // trailing fraction of each column used for the fit
};

/** Seed ranges for the in-pipeline phase fits, in rotations across the band. */
struct PhaseOptSettings {
    bool optimize_h = false;
    bool optimize_v = false;
    SeedRange rot_c1{-30.0, 30.0};
    SeedRange rot_c2{-10.0, 10.0};
    SeedRange rot_d1{-5.0, 5.0};
    size_t fit_cols = 6;  // strongest fragment columns summed into the vertical fit
};

struct ProcessingConfig {
    SpectrumMode mode = SpectrumMode::magnitude;
    ApodizationSpec apod_h{WindowFamily::kv_asym_sqrt, 0.25, 0.5};
    ApodizationSpec apod_v{WindowFamily::sine_bell, 0.25, 0.5};
    int zerofill_h = -1, zerofill_v = -1;  // doublings; -1 = per-mode default
    PhaseModel phase;
    bool have_phase_h = false;  // explicit horizontal coefficients were given
    PhaseOptSettings opt;
    LpSettings lp;
    DenoiseSpec denoise;
    size_t chunk_bytes = 64ull << 20;
    int threads = 0;
    uint64_t config_hash = 0;  // provenance stamp for the output sidecar

    // absorption takes the extra horizontal zerofill by default
    int zf_h() const {
        return zerofill_h >= 0 ? zerofill_h : (mode == SpectrumMode::absorption ? 2 : 1);
    }
    int zf_v() const { return zerofill_v >= 0 ? zerofill_v : 1; }
};

/**
 * Reads a processing config; `MS2D_CHUNK_BYTES` in the environment overrides
 * the chunk budget. Throws UsageError for absorption mode with neither
 * horizontal coefficients nor the horizontal fit enabled.
 */
ProcessingConfig parse_processing_config(const Config& cfg);

struct ProcessResult {
    std::string path;
    DatasetMeta meta;
    PhaseModel phase;  // coefficients actually applied (zeros in magnitude mode)
    uint64_t n_rows = 0, n_cols = 0;
    double sample_rate_hz = 0.0, dt1_s = 0.0;
};

/**
 * Stage 1: every transient row is (optionally) denoised, apodized, zero-padded
 * by 2^zerofill_h and transformed; absorption keeps the real part after
 * rotating by the horizontal phase model, magnitude keeps the modulus. The
 * result is a real time-freq container at out_path with a sidecar carrying
 * the timing. When the horizontal fit is enabled the model is fitted on the
 * highest-RMS row first; `phase` returns the coefficients applied.
 */
void process_rows(Dataset& raw, const ProcessingConfig& cfg, const std::string& out_path,
                  PhaseModel& phase);

/**
 * Stage 2: every column is (optionally) repaired over its first n_corrupt
 * points, apodized, zero-padded by 2^zerofill_v and transformed; absorption
 * rotates by the vertical model and keeps the real part, magnitude keeps the
 * modulus. When the vertical fit is enabled the model is fitted first on the
 * summed strongest fragment columns. Writes the freq-freq container plus
 * sidecar and returns its description.
 */
ProcessResult process_cols(Dataset& inter, const ProcessingConfig& cfg,
                           const std::string& out_path, PhaseModel& phase);

/**
 * Full two-stage transform of a raw transient set (path to its text header).
 * The intermediate container lives next to out_path for the duration of the
 * call. Output bytes are independent of chunk budget and worker count.
 */
ProcessResult process_2d(const std::string& raw_header, const ProcessingConfig& cfg,
                         const std::string& out_path);

/**
 * One row kernel: window, zero-pad to n_time * 2^zf, real-input transform,
 * then phase rotation + real part (absorption) or modulus (magnitude).
 * `window` must be empty or n_time long; out receives n_time * 2^zf / 2 bins.
 * Exposed for tests and the scan tools.
 */
void spectrum_1d(const double* x, size_t n_time, const std::vector<double>& window,
                 int zf, SpectrumMode mode, bool apply_phase_rot, double df_hz,
                 double p0, double p1, double p2, double* out);

} // namespace ms2d
