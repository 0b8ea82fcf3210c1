// Gridless direction estimation built on the dual semidefinite program. The
// solved certificate h defines the dual polynomial f(theta) =
// |h^H T^H a(theta)|, which stays at or below beta everywhere and touches it
// at the emitter directions; peak picking with parabolic refinement reads the
// directions off a dense evaluation grid.

#ifndef RISDOA_ANM_HPP
#define RISDOA_ANM_HPP

#include "risdoa/model.hpp"
#include "risdoa/sdp.hpp"
#include "risdoa/transform.hpp"
#include "risdoa/types.hpp"

namespace risdoa {

struct HyperParams {
  double t = 0.0;
  double beta = 0.0;
};

// Piecewise log-linear schedule mapping SNR (dB) to the corner parameter t,
// with beta = sqrt(t). Calibrated so that t is near 200 at 5 dB and grows
// again above 10 dB. Scenes far from the calibration setup may need an
// explicit override through EstimateOptions.
HyperParams hyperparameter_t(double snr_db);

struct DualPolynomial {
  RVec grid_angles;
  RVec values;  // |h^H T^H a(theta)| per grid angle
  double beta = 0.0;
};

// Evaluates the dual polynomial of a solved problem on the given grid.
DualPolynomial dual_polynomial(const SdpSolution& solution, const AnmSdpProblem& problem,
                               const RVec& grid_angles);

struct PeakOptions {
  double relative_threshold = 0.95;  // accept maxima above threshold * beta
  double min_separation_rad = 2.0 * EIGEN_PI / 180.0;
  int max_peaks = 0;  // 0 keeps every accepted peak
};

struct DoaEstimate {
  RVec angles_rad;    // ascending
  RVec peak_heights;  // aligned with angles_rad
  int k_detected = 0;
};

// Local maxima of the polynomial above the threshold, separated by at least
// min_separation_rad (taller peaks win), refined by fitting a parabola
// through the three samples around each maximum.
DoaEstimate find_peaks(const DualPolynomial& poly, const PeakOptions& options);

struct EstimateOptions {
  double t_param = 0.0;  // 0 derives t from the snapshot SNR via the schedule
  double beta = 0.0;     // 0 uses sqrt(t)
  double range_lo_rad = -45.0 * EIGEN_PI / 180.0;
  double range_hi_rad = 45.0 * EIGEN_PI / 180.0;
  int eval_grid_size = 4096;        // peak evaluation grid over the range
  int transform_oversampling = 8;   // fitting grid has oversampling * N points
  PeakOptions peaks;
  SdpOptions sdp;
};

// Optional access to the intermediate products of estimate_doa.
struct AnmDiagnostics {
  AnmSdpProblem problem;
  SdpSolution solution;
  double transform_fit_residual = 0.0;
  HyperParams hyper;
};

// Full pipeline: fit the manifold transform for the given perturbation
// estimate (the identity when the estimate is exactly zero), solve the dual
// program, and pick the peaks of the dual polynomial over the detection
// range. The true perturbations stored in the geometry are never read.
DoaEstimate estimate_doa(const ArrayGeometry& geometry, const Snapshot& snapshot,
                         const RisSchedule& schedule, const RVec& perturbation_estimate,
                         const EstimateOptions& options = {},
                         AnmDiagnostics* diagnostics = nullptr);

}  // namespace risdoa

#endif  // RISDOA_ANM_HPP
