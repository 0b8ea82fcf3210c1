#include "risdoa/transform.hpp"

#include <stdexcept>

namespace risdoa {

RVec make_angle_grid(double lo_rad, double hi_rad, int n) {
  if (n < 2) throw std::invalid_argument("make_angle_grid: need at least two points");
  if (!(lo_rad < hi_rad)) throw std::invalid_argument("make_angle_grid: empty range");
  return RVec::LinSpaced(n, lo_rad, hi_rad);
}

GridDictionary build_dictionaries(const ArrayGeometry& geometry,
                                  const RVec& perturbation_estimate,
                                  const RVec& grid_angles) {
  if (perturbation_estimate.size() != geometry.n_elements)
    throw std::invalid_argument("build_dictionaries: perturbation estimate size mismatch");
  if (grid_angles.size() < geometry.n_elements)
    throw std::invalid_argument("build_dictionaries: fewer grid points than elements (ill-posed fit)");

  GridDictionary d;
  d.grid_angles = grid_angles;
  d.nominal = steering_matrix(grid_angles, geometry.expected_positions, geometry.wavelength);
  const RVec shifted = geometry.expected_positions + perturbation_estimate;
  d.perturbed = steering_matrix(grid_angles, shifted, geometry.wavelength);
  return d;
}

TransformMatrix estimate_transform(const GridDictionary& dictionary) {
  const Eigen::Index n = dictionary.nominal.rows();
  if (dictionary.perturbed.rows() != n || dictionary.perturbed.cols() != dictionary.nominal.cols())
    throw std::invalid_argument("estimate_transform: dictionary shape mismatch");
  if (dictionary.nominal.cols() < n)
    throw std::invalid_argument("estimate_transform: fewer grid points than elements (ill-posed fit)");

  // T^H Xi = Xi_p is equivalent to Xi^H T = Xi_p^H, a tall least-squares
  // problem solved one column of T at a time. The complete orthogonal
  // decomposition returns the minimum-norm solution when Xi is rank
  // deficient.
  const CMat lhs = dictionary.nominal.adjoint();
  const CMat rhs = dictionary.perturbed.adjoint();
  Eigen::CompleteOrthogonalDecomposition<CMat> cod(lhs);

  TransformMatrix result;
  result.t = cod.solve(rhs);
  const double denom = dictionary.perturbed.norm();
  const double num = (result.t.adjoint() * dictionary.nominal - dictionary.perturbed).norm();
  result.fit_residual = denom > 0.0 ? num / denom : num;
  return result;
}

}  // namespace risdoa
