#include "risdoa/anm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace risdoa {

namespace {

constexpr double kPi = EIGEN_PI;

// SNR of the snapshot in dB, reconstructed from the sample power when the
// synthesis-time value is unavailable. Capped so the hyperparameter schedule
// stays finite for noiseless data.
double effective_snr_db(const Snapshot& snapshot) {
  if (std::isfinite(snapshot.snr_db)) return snapshot.snr_db;
  const double cap = 60.0;
  if (snapshot.noise_variance <= 0.0) return cap;
  const double total = mean_power(snapshot.received);
  const double sig = std::max(total - snapshot.noise_variance, 1e-12 * total);
  return std::min(cap, 10.0 * std::log10(sig / snapshot.noise_variance));
}

}  // namespace

HyperParams hyperparameter_t(double snr_db) {
  HyperParams hp;
  if (snr_db <= 10.0)
    hp.t = std::exp(-0.5991 * snr_db + 8.294);
  else
    hp.t = std::exp(0.2593 * snr_db - 0.2889);
  hp.beta = std::sqrt(hp.t);
  return hp;
}

DualPolynomial dual_polynomial(const SdpSolution& solution, const AnmSdpProblem& problem,
                               const RVec& grid_angles) {
  DualPolynomial poly;
  poly.grid_angles = grid_angles;
  poly.beta = problem.beta;
  const CVec coeff = problem.transform * solution.h;  // f = |(Th)^H a(theta)|
  poly.values.resize(grid_angles.size());
  for (Eigen::Index i = 0; i < grid_angles.size(); ++i) {
    const CVec a = steering_vector(grid_angles[i], problem.positions, problem.wavelength);
    poly.values[i] = std::abs(coeff.dot(a));
  }
  return poly;
}

DoaEstimate find_peaks(const DualPolynomial& poly, const PeakOptions& options) {
  const Eigen::Index g = poly.values.size();
  if (g != poly.grid_angles.size())
    throw std::invalid_argument("find_peaks: grid/value size mismatch");
  if (g < 3) throw std::invalid_argument("find_peaks: grid too small");

  const double floor = options.relative_threshold * poly.beta;
  struct Candidate {
    double angle;
    double height;
  };
  std::vector<Candidate> cands;

  for (Eigen::Index i = 0; i < g; ++i) {
    const double v = poly.values[i];
    if (v < floor) continue;
    const bool left_ok = (i == 0) ? (v > poly.values[1]) : (v >= poly.values[i - 1]);
    const bool right_ok = (i == g - 1) ? (v > poly.values[g - 2]) : (v >= poly.values[i + 1]);
    if (!left_ok || !right_ok) continue;
    // Flat plateaus never beat a neighbor strictly, drop them.
    if (i > 0 && i < g - 1 && !(v > poly.values[i - 1] || v > poly.values[i + 1])) continue;

    Candidate c{poly.grid_angles[i], v};
    if (i > 0 && i < g - 1) {
      // Parabola through the three samples around the maximum.
      const double ym = poly.values[i - 1], y0 = v, yp = poly.values[i + 1];
      const double denom = ym - 2.0 * y0 + yp;
      if (denom < 0.0) {
        double delta = 0.5 * (ym - yp) / denom;
        delta = std::clamp(delta, -0.5, 0.5);
        const double step = poly.grid_angles[i + 1] - poly.grid_angles[i];
        c.angle = poly.grid_angles[i] + delta * step;
        c.height = y0 - 0.25 * (ym - yp) * delta;
      }
    }
    cands.push_back(c);
  }

  // Taller peaks claim their separation window first.
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.height > b.height; });
  std::vector<Candidate> kept;
  for (const auto& c : cands) {
    bool clear = true;
    for (const auto& k : kept)
      if (std::abs(c.angle - k.angle) < options.min_separation_rad) {
        clear = false;
        break;
      }
    if (clear) kept.push_back(c);
    if (options.max_peaks > 0 && static_cast<int>(kept.size()) >= options.max_peaks) break;
  }
  std::sort(kept.begin(), kept.end(),
            [](const Candidate& a, const Candidate& b) { return a.angle < b.angle; });

  DoaEstimate est;
  est.k_detected = static_cast<int>(kept.size());
  est.angles_rad.resize(est.k_detected);
  est.peak_heights.resize(est.k_detected);
  for (int i = 0; i < est.k_detected; ++i) {
    est.angles_rad[i] = kept[i].angle;
    est.peak_heights[i] = kept[i].height;
  }
  return est;
}

DoaEstimate estimate_doa(const ArrayGeometry& geometry, const Snapshot& snapshot,
                         const RisSchedule& schedule, const RVec& perturbation_estimate,
                         const EstimateOptions& options, AnmDiagnostics* diagnostics) {
  if (!(options.range_lo_rad < options.range_hi_rad))
    throw std::invalid_argument("estimate_doa: empty detection range");
  if (options.eval_grid_size < 8)
    throw std::invalid_argument("estimate_doa: evaluation grid too small");

  // Manifold transform for the current perturbation estimate. A zero
  // estimate maps the manifold to itself, for which the identity is the
  // exact least-squares solution; the fit is skipped in that case.
  CMat tf;
  double fit_residual = 0.0;
  if (perturbation_estimate.size() != geometry.n_elements)
    throw std::invalid_argument("estimate_doa: perturbation estimate size mismatch");
  if (perturbation_estimate.isZero(0.0)) {
    tf = CMat::Identity(geometry.n_elements, geometry.n_elements);
  } else {
    const int gamma = std::max(options.transform_oversampling, 1) * geometry.n_elements;
    const RVec grid = make_angle_grid(options.range_lo_rad, options.range_hi_rad, gamma);
    const GridDictionary dict = build_dictionaries(geometry, perturbation_estimate, grid);
    const TransformMatrix tm = estimate_transform(dict);
    tf = tm.t;
    fit_residual = tm.fit_residual;
  }

  HyperParams hp;
  if (options.t_param > 0.0) {
    hp.t = options.t_param;
    hp.beta = options.beta > 0.0 ? options.beta : std::sqrt(options.t_param);
  } else {
    hp = hyperparameter_t(effective_snr_db(snapshot));
    if (options.beta > 0.0) hp.beta = options.beta;
  }

  const AnmSdpProblem problem =
      formulate(geometry, snapshot, schedule, perturbation_estimate, tf, hp.t, hp.beta);
  const SdpSolution solution = solve(problem, options.sdp);

  const RVec eval_grid =
      make_angle_grid(options.range_lo_rad, options.range_hi_rad, options.eval_grid_size);
  const DualPolynomial poly = dual_polynomial(solution, problem, eval_grid);
  DoaEstimate est = find_peaks(poly, options.peaks);

  if (diagnostics) {
    diagnostics->problem = problem;
    diagnostics->solution = solution;
    diagnostics->transform_fit_residual = fit_residual;
    diagnostics->hyper = hp;
  }
  return est;
}

}  // namespace risdoa
