// Joint refinement of element offsets and emitter directions by gradient
// descent on the data misfit
//
//   eta(d, theta) = || r - B^T sum_k diag(e(theta_k)) a(theta_k) s_k ||^2,
//
// where e_n(theta_k) = exp(j*2*pi*d_n*(sin(theta_k) + sin(psi))/lambda)
// carries the offset-dependent phases of both hops and a(theta_k) is the
// nominal steering vector. The signal amplitudes are re-estimated by least
// squares before every descent step. The outer driver alternates the
// gridless estimator (which consumes the current offset estimate through the
// manifold transform) with this refinement until both estimates settle.

#ifndef RISDOA_PERTURB_HPP
#define RISDOA_PERTURB_HPP

#include "risdoa/anm.hpp"
#include "risdoa/model.hpp"
#include "risdoa/types.hpp"

#include <vector>

namespace risdoa {

struct SignalEstimate {
  CVec signals;
  bool rank_warning = false;  // fewer observations than sources, or rank loss
};

// Least-squares amplitudes for fixed directions and offsets.
SignalEstimate estimate_signal(const Snapshot& snapshot, const RisSchedule& schedule,
                               const ArrayGeometry& geometry, const RVec& theta,
                               const RVec& offsets);

// Data misfit eta at the given parameters.
double objective_eta(const Snapshot& snapshot, const RisSchedule& schedule,
                     const ArrayGeometry& geometry, const RVec& theta,
                     const RVec& offsets, const CVec& signals);

// Analytic gradient of eta with respect to the element offsets. Assembled
// from the correlation matrices
//   V = conj(B) B^T diag(v),  v = sum_k j c_k s_k resp[:,k],
//   G = diag(conj(s)) resp^H V,   H = diag(j c o s) resp^T diag(B conj(r)),
// with c_k = 2*pi*(sin(theta_k) + sin(psi))/lambda; the n-th component is
// 2 Re sum_k (G - H)[k, n].
RVec grad_perturbation(const Snapshot& snapshot, const RisSchedule& schedule,
                       const ArrayGeometry& geometry, const RVec& theta,
                       const RVec& offsets, const CVec& signals);

// Analytic gradient of eta with respect to the directions; component k is
// 2 Re{ j*2*pi/lambda * cos(theta_k) * s_k * sum_n resp[n,k] *
//       (de_n + off_n) * (B conj(mu - r))_n }.
RVec grad_angles(const Snapshot& snapshot, const RisSchedule& schedule,
                 const ArrayGeometry& geometry, const RVec& theta,
                 const RVec& offsets, const CVec& signals);

struct GdOptions {
  double step_d = 1e-3;      // first offset move, in wavelengths
  double step_theta = 1e-5;  // first direction move, radians
  int max_iter = 300;
  double rel_tol = 1e-3;        // stop when eta changes less than this, relatively
  int divergence_window = 10;   // consecutive increases before halving steps
  double min_step_factor = 1e-12;  // give up once steps shrink below this factor
};

struct RefinementTrace {
  RVec d_estimate;      // best-misfit offsets
  RVec theta_estimate;  // best-misfit directions
  CVec s_estimate;      // amplitudes fitted at the best iterate
  std::vector<double> eta_raw;       // misfit after every iteration
  std::vector<double> eta_accepted;  // running best, non-increasing
  double best_eta = 0.0;
  int iterations = 0;
  bool stopped_early = false;   // relative-change stop fired
  bool step_underflow = false;  // backoff shrank the steps to nothing
};

// Gradient descent from the given directions with offsets starting at zero.
// Step sizes are normalized so the first update moves the largest offset by
// step_d wavelengths and the largest direction by step_theta radians. When
// eta grows for divergence_window consecutive iterations both steps are
// halved and descent continues; the best iterate seen is returned.
RefinementTrace refine(const Snapshot& snapshot, const RisSchedule& schedule,
                       const ArrayGeometry& geometry, const RVec& theta_init,
                       const GdOptions& options = {});

struct AdppOptions {
  EstimateOptions anm;
  GdOptions gd;
  int outer_iters = 3;
  double tol_theta_rad = 0.01 * EIGEN_PI / 180.0;  // outer stop on directions
  double tol_d = 1e-3;                             // outer stop on offsets, wavelengths
  bool use_refined_theta = true;  // report refined directions (the offset
                                  // estimate always feeds the next round)
};

struct EstimationResult {
  RVec theta;  // ascending
  RVec d_offsets;
  CVec signals;
  std::vector<double> eta_trace;   // concatenated refinement traces
  std::vector<int> round_bounds;   // eta_trace index where each round starts
  double best_eta = 0.0;
  int rounds = 0;
  int k_detected = 0;
  bool converged = false;  // outer tolerances met before the round limit
};

// Alternating estimation: gridless directions with the current offset
// estimate, then gradient refinement of offsets and directions; the best
// iterate across rounds (by misfit) is returned.
EstimationResult run_adpp(const ArrayGeometry& geometry, const Snapshot& snapshot,
                          const RisSchedule& schedule, const AdppOptions& options = {});

}  // namespace risdoa

#endif  // RISDOA_PERTURB_HPP
