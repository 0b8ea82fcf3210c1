#include "risdoa/crb.hpp"

#include <cmath>
#include <stdexcept>

namespace risdoa {

namespace {
constexpr double kPi = EIGEN_PI;
}

FisherInfo fisher(const ArrayGeometry& geometry, const TargetSet& targets,
                  const RisSchedule& schedule, double noise_variance) {
  if (!(noise_variance > 0.0))
    throw std::invalid_argument("fisher: noise variance must be positive");
  const Eigen::Index n = geometry.n_elements;
  const Eigen::Index k = targets.angles_rad.size();
  if (targets.signals.size() != k)
    throw std::invalid_argument("fisher: angles/signals size mismatch");
  if (schedule.b_matrix.rows() != n)
    throw std::invalid_argument("fisher: schedule/geometry element count mismatch");

  const RVec offsets = geometry.perturbations.size() == 0
                           ? RVec::Zero(n).eval()
                           : geometry.perturbations;
  const CMat resp = offset_response(geometry, offsets, targets.angles_rad, schedule.psi_rad);
  const double sin_psi = std::sin(schedule.psi_rad);
  const double two_pi_over_lambda = 2.0 * kPi / geometry.wavelength;
  const RVec total_pos = geometry.expected_positions + offsets;

  // dmu/dd_n = B^T e_n * sum_k j c_k s_k resp[n,k]; all columns at once via a
  // diagonal scaling of B^T.
  CVec v(n);
  v.setZero();
  for (Eigen::Index kk = 0; kk < k; ++kk) {
    const double c = two_pi_over_lambda * (std::sin(targets.angles_rad[kk]) + sin_psi);
    v += (kImag * c) * targets.signals[kk] * resp.col(kk);
  }
  const Eigen::Index m = schedule.b_matrix.cols();
  CMat jac(m, n + k);
  jac.leftCols(n) = schedule.b_matrix.transpose() * CMat(v.asDiagonal());

  // dmu/dtheta_k = j*2*pi/lambda * cos(theta_k) * s_k * B^T (resp[:,k] o pos).
  for (Eigen::Index kk = 0; kk < k; ++kk) {
    const cd factor = kImag * two_pi_over_lambda * std::cos(targets.angles_rad[kk]) *
                      targets.signals[kk];
    const CVec col = resp.col(kk).cwiseProduct(total_pos.cast<cd>());
    jac.col(n + kk) = factor * (schedule.b_matrix.transpose() * col);
  }

  FisherInfo info;
  info.n_elements = static_cast<int>(n);
  info.k_targets = static_cast<int>(k);
  info.f = (2.0 / noise_variance) * (jac.adjoint() * jac).real();
  info.f = 0.5 * (info.f + info.f.transpose()).eval();
  return info;
}

CrbBounds crb_bounds(const FisherInfo& info) {
  const Eigen::Index dim = info.f.rows();
  if (dim != info.n_elements + info.k_targets || info.f.cols() != dim)
    throw std::invalid_argument("crb_bounds: information matrix shape mismatch");

  Eigen::SelfAdjointEigenSolver<RMat> es(info.f);
  const RVec lam = es.eigenvalues();
  const double lam_max = lam.maxCoeff();
  if (!(lam_max > 0.0)) throw std::invalid_argument("crb_bounds: information matrix is zero");
  const double cut = lam_max * 1e-12;

  CrbBounds b;
  b.used_pseudo_inverse = lam.minCoeff() <= cut;
  RVec inv_lam(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    inv_lam[i] = lam[i] > cut ? 1.0 / lam[i] : 0.0;
  const RMat f_inv = es.eigenvectors() * inv_lam.asDiagonal() * es.eigenvectors().transpose();

  b.crb_d = f_inv.diagonal().head(info.n_elements);
  b.crb_theta = f_inv.diagonal().tail(info.k_targets);
  return b;
}

}  // namespace risdoa
