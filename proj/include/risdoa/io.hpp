// Plain-text file formats. Both formats are versioned with a leading
// "format=1" line and use flat key=value pairs; lists are comma separated
// and '#' starts a comment.
//
// Scene / experiment configuration keys (defaults in parentheses):
//   n_elements (32)            elements in the swarm
//   n_slots (32)               observation slots
//   spacing_wavelengths (0.5)  expected element spacing
//   psi_deg (0)                receiver direction
//   angles_deg (-18.4228,16.2385)  true emitter directions
//   signal_amplitudes (1,1)    per-emitter amplitudes (phases are drawn)
//   perturbation_model (uniform)   none | uniform | uniform:<half-width wl>
//   snr_db (30)                synthesis SNR
//   seed (1)                   base seed for every draw
//   sweep_axis (snr_db)        snr_db | n_elements | n_slots | psi_deg
//   sweep_values ()            axis values, required for sweeps
//   n_trials (100)             Monte Carlo trials per axis value
//   methods (adpp,anm)         any of adpp, anm, omp, fft, crb
//   threads (0)                worker threads for sweeps, 0 = hardware
//   fix_schedule (0)           reuse one reflection schedule for all trials
//   timings (0)                write measured runtimes into sweep output
//   t_param (0)                dual program corner, 0 = SNR schedule
//   beta (0)                   dual bound, 0 = sqrt(t)
//   detection_range_deg (-45,45)   estimator field of view
//   eval_grid_size (4096)      peak evaluation grid
//   transform_oversampling (8) manifold fit grid = this * n_elements
//   omp_grid_size (1024)       matching pursuit dictionary grid
//   fft_grid_size (4096)       matched filter spectrum grid
//   relative_threshold (0.95)  peak acceptance level, fraction of beta
//   min_separation_deg (2)     minimum peak spacing
//   outer_iters (3)            alternating rounds
//   inner_iters (300)          descent iterations per round
//   step_d (1e-3)              first offset move, wavelengths
//   step_theta (1e-5)          first direction move, radians
//   use_refined_theta (1)      report descent-refined directions
//   sdp_max_iter (20000)       splitting iteration cap
//   output_path ()             default output file, overridable at the CLI
//
// Snapshot files carry the scene needed to rebuild the reflection schedule,
// the noise level, optional ground truth, then a "data" line followed by one
// "re,im" line per slot.

#ifndef RISDOA_IO_HPP
#define RISDOA_IO_HPP

#include "risdoa/model.hpp"
#include "risdoa/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace risdoa {

struct SceneConfig {
  int n_elements = 32;
  int n_slots = 32;
  double spacing_wavelengths = 0.5;
  double psi_deg = 0.0;
  std::vector<double> angles_deg{-18.4228, 16.2385};
  std::vector<double> signal_amplitudes{1.0, 1.0};
  std::string perturbation_model = "uniform";
  double perturbation_half_width = 1.0 / 16.0;  // wavelengths, from the model string
  double snr_db = 30.0;
  std::uint64_t seed = 1;

  std::string sweep_axis = "snr_db";
  std::vector<double> sweep_values;
  int n_trials = 100;
  std::vector<std::string> methods{"adpp", "anm"};
  int threads = 0;
  bool fix_schedule = false;
  bool timings = false;

  double t_param = 0.0;
  double beta = 0.0;
  double detection_lo_deg = -45.0;
  double detection_hi_deg = 45.0;
  int eval_grid_size = 4096;
  int transform_oversampling = 8;
  int omp_grid_size = 1024;
  int fft_grid_size = 4096;
  double relative_threshold = 0.95;
  double min_separation_deg = 2.0;
  int outer_iters = 3;
  int inner_iters = 300;
  double step_d = 1e-3;
  double step_theta = 1e-5;
  bool use_refined_theta = true;
  int sdp_max_iter = 20000;
  std::string output_path;
};

// Parses the documented schema. Unknown keys, malformed values, a missing or
// wrong format line, and inconsistent lists raise std::runtime_error with
// the offending line number.
SceneConfig parse_config(const std::string& text);
SceneConfig load_config(const std::string& path);

// One observation window plus everything needed to rebuild its scene.
struct SnapshotRecord {
  int n_elements = 0;
  int n_slots = 0;
  double spacing_wavelengths = 0.5;
  double psi_deg = 0.0;
  std::uint64_t schedule_seed = 0;
  double amplitude = 1.0;
  std::vector<double> phase_set{0.0, EIGEN_PI};
  double noise_variance = 0.0;
  double snr_db = 0.0;
  bool has_truth = false;
  std::vector<double> true_angles_deg;
  std::vector<double> true_perturbations_wl;
  CVec received;
};

void save_snapshot(const std::string& path, const SnapshotRecord& record);
SnapshotRecord load_snapshot(const std::string& path);

// Scene objects reconstructed from a record. The geometry carries the true
// perturbations only when the record has them.
ArrayGeometry record_geometry(const SnapshotRecord& record);
RisSchedule record_schedule(const SnapshotRecord& record);
Snapshot record_snapshot(const SnapshotRecord& record);

}  // namespace risdoa

#endif  // RISDOA_IO_HPP
