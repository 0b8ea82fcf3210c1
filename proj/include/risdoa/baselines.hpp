// Classical reference estimators operating on the nominal (unperturbed)
// manifold: a matched-filter angular spectrum, greedy orthogonal matching
// pursuit over a steering dictionary, and the gridless estimator run with a
// zero offset estimate. All three ignore element offsets by construction,
// which is exactly the behavior the perturbation-aware pipeline is compared
// against.

#ifndef RISDOA_BASELINES_HPP
#define RISDOA_BASELINES_HPP

#include "risdoa/anm.hpp"
#include "risdoa/model.hpp"
#include "risdoa/types.hpp"

namespace risdoa {

// Matched-filter spectrum: value at theta is |<phi(theta), r>| / ||phi(theta)||
// with phi(theta) = B^T (a(psi, de) o a(theta, de)).
RVec beamform_spectrum(const Snapshot& snapshot, const RisSchedule& schedule,
                       const ArrayGeometry& geometry, const RVec& grid_angles);

// Peaks of the matched-filter spectrum, tallest first capped at k_max when
// k_max > 0, returned ascending.
DoaEstimate beamform_estimate(const Snapshot& snapshot, const RisSchedule& schedule,
                              const ArrayGeometry& geometry, const RVec& grid_angles,
                              int k_max, double min_separation_rad);

// Orthogonal matching pursuit over the dictionary with columns
// B^T (a(psi, de) o a(theta_g, de)). Selection uses normalized correlation,
// coefficients are refit by least squares after every pick, and the loop
// stops at k_max atoms or once the residual energy falls below the expected
// noise energy. Estimates are grid angles; no off-grid refinement.
DoaEstimate omp_estimate(const Snapshot& snapshot, const RisSchedule& schedule,
                         const ArrayGeometry& geometry, const RVec& grid_angles,
                         int k_max);

// Gridless estimation that assumes an ideal array (zero offset estimate,
// identity manifold transform).
DoaEstimate plain_anm(const ArrayGeometry& geometry, const Snapshot& snapshot,
                      const RisSchedule& schedule, const EstimateOptions& options = {},
                      AnmDiagnostics* diagnostics = nullptr);

}  // namespace risdoa

#endif  // RISDOA_BASELINES_HPP
