// Dual semidefinite program of the atomic-norm denoising step. The primal
// seeks the sparsest mixture of steering atoms explaining the de-hopped
// observation; its dual reduces to
//
//   minimize    (q - h)^H M^{-1} (q - h)
//   subject to  [ W      T h ]
//               [ (Th)^H  t  ]  >= 0,   W Hermitian,
//               trace(W) = beta^2 / t,
//               sum_n W[n, n+v] = 0 for every off-diagonal v,
//
// with q the conjugate-weighted correlation of the observation and M the
// Gram matrix of the de-hopping weights. For a uniformly spaced nominal
// array, a(theta)^H W a(theta) collapses to trace(W) under the diagonal-sum
// constraints, so any feasible pair certifies |h^H T^H a(theta)| <= beta at
// every angle. The dual polynomial of the solution touches beta exactly at
// the emitter directions.
//
// The solver is a self-contained operator-splitting method (ADMM): the
// bordered matrix is duplicated into a cone variable, the affine block
// constraints and the quadratic objective are handled in closed form, and
// the cone step is a Hermitian eigenvalue clamp. Iterates are certified on
// a dense angle grid and the best certified iterate is returned, so the
// reported objective trace is non-increasing by construction. The problem
// is internally rescaled to t = beta = 1, and the residuals reported below
// are relative to that normalized problem.

#ifndef RISDOA_SDP_HPP
#define RISDOA_SDP_HPP

#include "risdoa/model.hpp"
#include "risdoa/types.hpp"

#include <vector>

namespace risdoa {

struct AnmSdpProblem {
  CVec q;                  // de-hopped correlation vector, length N
  CMat m;                  // Hermitian PSD weight matrix, N x N
  CMat transform;          // T, applied to h inside the bordered block
  double t_param = 1.0;    // corner of the bordered matrix, > 0
  double beta = 1.0;       // dual polynomial bound, > 0
  double regularization = 0.0;  // diagonal loading added to m, 0 when none
  RVec positions;          // expected element positions (certificate grid)
  double wavelength = 1.0;
};

// Assembles q, M and metadata from one observation window. The perturbation
// estimate enters through diag(conj(a(psi, d_hat))), which removes the
// receiver-side phase of the estimated offsets from both operands. When M is
// numerically singular (condition above 1e12) a small diagonal loading
// proportional to its mean eigenvalue is added and recorded. Passing beta <=
// 0 selects the default beta = sqrt(t).
AnmSdpProblem formulate(const ArrayGeometry& geometry, const Snapshot& snapshot,
                        const RisSchedule& schedule, const RVec& perturbation_estimate,
                        const CMat& transform, double t_param, double beta);

struct SdpOptions {
  int max_iter = 20000;
  double tol_psd = 1e-7;       // acceptable cone violation, relative
  double tol_lin = 1e-7;       // acceptable affine violation, relative
  double tol_rel_obj = 1e-6;   // certified objective plateau tolerance
  int cert_every = 25;         // grid-certification cadence, iterations
  int cert_grid_size = 4096;   // full-range certification grid
  double rho = 0.0;            // penalty parameter, 0 picks a scale-aware value
  double over_relaxation = 1.6;
  bool collect_trace = false;  // keep the per-check certified objective trace
};

struct KktResiduals {
  double psd_violation = 0.0;     // max(0, -lambda_min) of the bordered matrix
  double trace_gap = 0.0;         // |trace(W) - beta^2/t|, relative
  double offdiag_sum_max = 0.0;   // largest |sum of an off-diagonal of W|
  double stationarity_norm = 0.0; // gradient of the Lagrangian at the solution
};

struct SdpSolution {
  CVec h;                  // dual certificate coefficients, length N
  CMat w;                  // Hermitian block of the bordered matrix
  double objective_value = 0.0;
  KktResiduals kkt;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // certified best objective per check
};

SdpSolution solve(const AnmSdpProblem& problem, const SdpOptions& options = {});

// Angle grid of n points covering (-pi/2, pi/2], upper endpoint included.
RVec full_angle_grid(int n);

}  // namespace risdoa

#endif  // RISDOA_SDP_HPP
