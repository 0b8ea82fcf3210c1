// Mapping between the nominal array manifold and the manifold of the
// perturbed array. Over a dense angle grid we collect the nominal steering
// vectors Xi and the steering vectors Xi_p of the array shifted by a
// perturbation estimate, then fit a square matrix T so that T^H * Xi matches
// Xi_p in least squares. Applying T^H to a nominal steering vector then
// approximates the perturbed one at any angle inside the fitted range, which
// lets the gridless estimator keep its Toeplitz structure while accounting
// for element offsets.

#ifndef RISDOA_TRANSFORM_HPP
#define RISDOA_TRANSFORM_HPP

#include "risdoa/model.hpp"
#include "risdoa/types.hpp"

namespace risdoa {

struct GridDictionary {
  RVec grid_angles;  // fitting grid, ascending, within (-pi/2, pi/2]
  CMat nominal;      // Xi, N x Gamma, steering at the expected positions
  CMat perturbed;    // Xi_p, N x Gamma, steering at expected + estimate
};

struct TransformMatrix {
  CMat t;              // N x N
  double fit_residual; // ||T^H Xi - Xi_p||_F / ||Xi_p||_F
};

// Uniform inclusive grid of n angles over [lo, hi].
RVec make_angle_grid(double lo_rad, double hi_rad, int n);

// Steering dictionaries over the given grid. Requires at least as many grid
// points as elements, otherwise the fit below is ill posed.
GridDictionary build_dictionaries(const ArrayGeometry& geometry,
                                  const RVec& perturbation_estimate,
                                  const RVec& grid_angles);

// Minimum-norm least-squares fit of T^H Xi = Xi_p, solved column-wise via a
// rank-revealing orthogonal decomposition of Xi^H.
TransformMatrix estimate_transform(const GridDictionary& dictionary);

}  // namespace risdoa

#endif  // RISDOA_TRANSFORM_HPP
