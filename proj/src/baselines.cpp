#include "risdoa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace risdoa {

namespace {

// Dictionary column for angle theta on the nominal manifold, including the
// receiver-side phase of the expected positions.
CMat nominal_dictionary(const RisSchedule& schedule, const ArrayGeometry& geometry,
                        const RVec& grid_angles) {
  const CVec a_psi =
      steering_vector(schedule.psi_rad, geometry.expected_positions, geometry.wavelength);
  const CMat steer =
      steering_matrix(grid_angles, geometry.expected_positions, geometry.wavelength);
  return schedule.b_matrix.transpose() * (a_psi.asDiagonal() * steer);
}

}  // namespace

RVec beamform_spectrum(const Snapshot& snapshot, const RisSchedule& schedule,
                       const ArrayGeometry& geometry, const RVec& grid_angles) {
  if (snapshot.received.size() != schedule.b_matrix.cols())
    throw std::invalid_argument("beamform_spectrum: snapshot/schedule slot count mismatch");
  if (grid_angles.size() == 0)
    throw std::invalid_argument("beamform_spectrum: empty grid");
  const CMat dict = nominal_dictionary(schedule, geometry, grid_angles);
  RVec spec(grid_angles.size());
  for (Eigen::Index i = 0; i < grid_angles.size(); ++i) {
    const double norm = dict.col(i).norm();
    spec[i] = norm > 0.0 ? std::abs(dict.col(i).dot(snapshot.received)) / norm : 0.0;
  }
  return spec;
}

DoaEstimate beamform_estimate(const Snapshot& snapshot, const RisSchedule& schedule,
                              const ArrayGeometry& geometry, const RVec& grid_angles,
                              int k_max, double min_separation_rad) {
  DualPolynomial poly;
  poly.grid_angles = grid_angles;
  poly.values = beamform_spectrum(snapshot, schedule, geometry, grid_angles);
  poly.beta = poly.values.maxCoeff();
  if (poly.beta <= 0.0) return DoaEstimate{};
  PeakOptions opts;
  opts.relative_threshold = 0.0;  // rank all local maxima, keep the tallest
  opts.min_separation_rad = min_separation_rad;
  opts.max_peaks = k_max;
  return find_peaks(poly, opts);
}

DoaEstimate omp_estimate(const Snapshot& snapshot, const RisSchedule& schedule,
                         const ArrayGeometry& geometry, const RVec& grid_angles,
                         int k_max) {
  if (k_max < 1) throw std::invalid_argument("omp_estimate: k_max must be positive");
  if (grid_angles.size() < k_max)
    throw std::invalid_argument("omp_estimate: grid smaller than k_max");
  if (snapshot.received.size() != schedule.b_matrix.cols())
    throw std::invalid_argument("omp_estimate: snapshot/schedule slot count mismatch");

  const CMat dict = nominal_dictionary(schedule, geometry, grid_angles);
  const Eigen::Index m = dict.rows();
  RVec col_norms(dict.cols());
  for (Eigen::Index i = 0; i < dict.cols(); ++i)
    col_norms[i] = std::max(dict.col(i).norm(), 1e-300);

  // Expected noise energy over the window; residuals at or below it carry no
  // usable structure. The relative term keeps noiseless runs from chasing
  // rounding dust.
  const double noise_floor = std::max(snapshot.noise_variance * static_cast<double>(m),
                                      1e-24 * snapshot.received.squaredNorm());

  CVec residual = snapshot.received;
  std::vector<Eigen::Index> picked;
  std::vector<double> pick_corr;
  CVec coeffs;

  while (static_cast<int>(picked.size()) < k_max &&
         residual.squaredNorm() > noise_floor) {
    Eigen::Index best = -1;
    double best_corr = 0.0;
    for (Eigen::Index i = 0; i < dict.cols(); ++i) {
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      const double corr = std::abs(dict.col(i).dot(residual)) / col_norms[i];
      if (corr > best_corr) {
        best_corr = corr;
        best = i;
      }
    }
    if (best < 0 || best_corr <= 0.0) break;
    picked.push_back(best);
    pick_corr.push_back(best_corr);

    CMat sub(m, picked.size());
    for (size_t i = 0; i < picked.size(); ++i) sub.col(i) = dict.col(picked[i]);
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(sub);
    coeffs = cod.solve(snapshot.received);
    residual = snapshot.received - sub * coeffs;
  }

  std::vector<int> order(picked.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return grid_angles[picked[a]] < grid_angles[picked[b]]; });

  DoaEstimate est;
  est.k_detected = static_cast<int>(picked.size());
  est.angles_rad.resize(est.k_detected);
  est.peak_heights.resize(est.k_detected);
  for (int i = 0; i < est.k_detected; ++i) {
    est.angles_rad[i] = grid_angles[picked[order[i]]];
    est.peak_heights[i] = pick_corr[order[i]];
  }
  return est;
}

DoaEstimate plain_anm(const ArrayGeometry& geometry, const Snapshot& snapshot,
                      const RisSchedule& schedule, const EstimateOptions& options,
                      AnmDiagnostics* diagnostics) {
  const RVec zero = RVec::Zero(geometry.n_elements);
  return estimate_doa(geometry, snapshot, schedule, zero, options, diagnostics);
}

}  // namespace risdoa
