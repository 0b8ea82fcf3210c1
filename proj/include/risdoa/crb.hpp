// Cramer-Rao bounds for jointly estimating the element offsets and the
// emitter directions from one observation window with known signal
// amplitudes and circular white Gaussian noise. With mean mu(d, theta), the
// Fisher information is F = (2/sigma^2) Re{ J^H J } for the stacked Jacobian
// J = [ dmu/dd  dmu/dtheta ]; the bounds are the diagonal of F^{-1}.

#ifndef RISDOA_CRB_HPP
#define RISDOA_CRB_HPP

#include "risdoa/model.hpp"
#include "risdoa/types.hpp"

namespace risdoa {

struct FisherInfo {
  RMat f;  // (N + K) x (N + K), offsets first, then directions
  int n_elements = 0;
  int k_targets = 0;
};

// Fisher information evaluated at the true scene parameters (the geometry's
// perturbations are the evaluation point).
FisherInfo fisher(const ArrayGeometry& geometry, const TargetSet& targets,
                  const RisSchedule& schedule, double noise_variance);

struct CrbBounds {
  RVec crb_d;      // per-element offset variance bounds, position units squared
  RVec crb_theta;  // per-target direction variance bounds, radians squared
  bool used_pseudo_inverse = false;  // information matrix was singular
};

CrbBounds crb_bounds(const FisherInfo& info);

}  // namespace risdoa

#endif  // RISDOA_CRB_HPP
