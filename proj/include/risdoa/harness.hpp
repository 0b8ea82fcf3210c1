// Experiment orchestration: seeded Monte Carlo sweeps over SNR, element
// count, slot count, or receiver direction, with RMSE aggregation and CSV
// emission. Every random draw in a sweep is derived from
// (base seed, axis index, trial index, purpose), so results are identical
// for a fixed seed no matter how trials are scheduled across threads.

#ifndef RISDOA_HARNESS_HPP
#define RISDOA_HARNESS_HPP

#include "risdoa/anm.hpp"
#include "risdoa/io.hpp"
#include "risdoa/model.hpp"
#include "risdoa/perturb.hpp"
#include "risdoa/types.hpp"

#include <string>
#include <vector>

namespace risdoa {

// Sum of squared direction errors for one trial, in degrees squared. Both
// vectors are sorted and matched in order; unmatched true directions cost
// miss_penalty_deg each, and any matched error is capped at the same value.
// The estimate may not contain more entries than the truth (callers keep the
// tallest peaks when an estimator over-detects).
double paired_sq_error_deg(const RVec& truth_rad, const RVec& estimate_rad,
                           double miss_penalty_deg);

// Root mean square direction error over trials and targets, in degrees.
double rmse(const RVec& truth_rad, const std::vector<RVec>& estimates_rad,
            double miss_penalty_deg);

// Options objects assembled from a scene configuration.
EstimateOptions estimate_options(const SceneConfig& cfg);
AdppOptions adpp_options(const SceneConfig& cfg);

// The sweep axis value folded into a copy of the configuration.
SceneConfig apply_axis(const SceneConfig& cfg, const std::string& axis, double value);

// Scene for one (axis index, trial) cell: geometry with freshly drawn
// offsets, signals with drawn phases, reflection schedule, and the noisy
// observation. fix_schedule pins the schedule draw to cell (0, 0).
struct TrialScene {
  ArrayGeometry geometry;
  TargetSet targets;
  RisSchedule schedule;
  Snapshot snapshot;
  std::uint64_t schedule_seed = 0;
};

TrialScene make_trial_scene(const SceneConfig& cfg, int axis_index, int trial);

// A snapshot record of cell (0, 0), ready to save.
SnapshotRecord make_snapshot_record(const SceneConfig& cfg);

// One estimator invocation. method is one of adpp, anm, omp, fft; k_max
// bounds the greedy and matched-filter detectors (the gridless paths detect
// freely). For adpp, peak_heights holds the fitted amplitude magnitudes and
// d_offsets the estimated element offsets; other methods leave d_offsets
// empty.
struct MethodRun {
  RVec angles_rad;
  RVec peak_heights;
  RVec d_offsets;
  int k_detected = 0;
};

MethodRun run_method(const std::string& method, const SceneConfig& cfg,
                     const ArrayGeometry& geometry, const Snapshot& snapshot,
                     const RisSchedule& schedule, int k_max);

struct SweepRow {
  double axis_value = 0.0;
  std::string method;
  double rmse_deg = 0.0;
  int n_trials = 0;
  double mean_runtime_s = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepRow> rows;  // axis-major, methods in configuration order
};

// Runs the full sweep. The crb pseudo-method reports the square root of the
// mean direction bound (degrees) instead of an RMSE. Estimator failures in a
// trial count as zero detections. Runtimes are recorded only when
// cfg.timings is set; otherwise the column is zero so that repeated runs
// produce identical files.
SweepResult run_sweep(const SceneConfig& cfg);

std::string format_sweep_csv(const SweepResult& result);
void write_sweep_csv(const std::string& path, const SweepResult& result);

// Direction bound curve for a fixed scene (drawn from cell (0, 0)) across
// SNR values: sweep_values when the axis is snr_db and the list is
// non-empty, otherwise the single configured SNR.
struct CrbCurve {
  std::vector<double> snr_db;
  RMat crb_theta_deg;  // one row per SNR value, one column per target
};

CrbCurve crb_curve(const SceneConfig& cfg);

std::string format_crb_csv(const CrbCurve& curve);
void write_crb_csv(const std::string& path, const CrbCurve& curve);

std::string format_dual_poly_csv(const DualPolynomial& poly);
void write_dual_poly_csv(const std::string& path, const DualPolynomial& poly);

}  // namespace risdoa

#endif  // RISDOA_HARNESS_HPP
