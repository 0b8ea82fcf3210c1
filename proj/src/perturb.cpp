#include "risdoa/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace risdoa {

namespace {

constexpr double kPi = EIGEN_PI;

// Model matrix whose k-th column is B^T (resp column k); the mean of the
// received samples is Phi * s.
CMat model_matrix(const RisSchedule& schedule, const ArrayGeometry& geometry,
                  const RVec& theta, const RVec& offsets) {
  const CMat resp = offset_response(geometry, offsets, theta, schedule.psi_rad);
  return schedule.b_matrix.transpose() * resp;
}

// Per-direction phase rates c_k = 2*pi*(sin(theta_k) + sin(psi))/lambda.
RVec phase_rates(const ArrayGeometry& geometry, const RisSchedule& schedule,
                 const RVec& theta) {
  RVec c(theta.size());
  const double sin_psi = std::sin(schedule.psi_rad);
  for (Eigen::Index k = 0; k < theta.size(); ++k)
    c[k] = 2.0 * kPi * (std::sin(theta[k]) + sin_psi) / geometry.wavelength;
  return c;
}

void check_inputs(const Snapshot& snapshot, const RisSchedule& schedule,
                  const ArrayGeometry& geometry, const RVec& theta, const RVec& offsets) {
  if (schedule.b_matrix.rows() != geometry.n_elements)
    throw std::invalid_argument("perturb: schedule/geometry element count mismatch");
  if (snapshot.received.size() != schedule.b_matrix.cols())
    throw std::invalid_argument("perturb: snapshot/schedule slot count mismatch");
  if (offsets.size() != geometry.n_elements)
    throw std::invalid_argument("perturb: offsets size mismatch");
  if (theta.size() == 0) throw std::invalid_argument("perturb: no directions given");
}

}  // namespace

SignalEstimate estimate_signal(const Snapshot& snapshot, const RisSchedule& schedule,
                               const ArrayGeometry& geometry, const RVec& theta,
                               const RVec& offsets) {
  check_inputs(snapshot, schedule, geometry, theta, offsets);
  const CMat phi = model_matrix(schedule, geometry, theta, offsets);
  Eigen::CompleteOrthogonalDecomposition<CMat> cod(phi);
  SignalEstimate est;
  est.signals = cod.solve(snapshot.received);
  est.rank_warning = phi.rows() < phi.cols() || cod.rank() < phi.cols();
  return est;
}

double objective_eta(const Snapshot& snapshot, const RisSchedule& schedule,
                     const ArrayGeometry& geometry, const RVec& theta,
                     const RVec& offsets, const CVec& signals) {
  check_inputs(snapshot, schedule, geometry, theta, offsets);
  if (signals.size() != theta.size())
    throw std::invalid_argument("objective_eta: signals/directions size mismatch");
  const CMat phi = model_matrix(schedule, geometry, theta, offsets);
  return (snapshot.received - phi * signals).squaredNorm();
}

RVec grad_perturbation(const Snapshot& snapshot, const RisSchedule& schedule,
                       const ArrayGeometry& geometry, const RVec& theta,
                       const RVec& offsets, const CVec& signals) {
  check_inputs(snapshot, schedule, geometry, theta, offsets);
  if (signals.size() != theta.size())
    throw std::invalid_argument("grad_perturbation: signals/directions size mismatch");
  const Eigen::Index n = geometry.n_elements;
  const Eigen::Index k = theta.size();

  const CMat resp = offset_response(geometry, offsets, theta, schedule.psi_rad);
  const RVec c = phase_rates(geometry, schedule, theta);
  CVec v(n);
  v.setZero();
  for (Eigen::Index kk = 0; kk < k; ++kk)
    v += (kImag * c[kk]) * signals[kk] * resp.col(kk);

  const CMat b_conj = schedule.b_matrix.conjugate();
  const CMat big_v = (b_conj * schedule.b_matrix.transpose()) * v.asDiagonal();
  const CMat g_mat = signals.conjugate().asDiagonal() * (resp.adjoint() * big_v);

  const CVec br = schedule.b_matrix * snapshot.received.conjugate();
  CMat h_mat(k, n);
  for (Eigen::Index kk = 0; kk < k; ++kk)
    for (Eigen::Index nn = 0; nn < n; ++nn)
      h_mat(kk, nn) = (kImag * c[kk]) * signals[kk] * resp(nn, kk) * br[nn];

  RVec grad(n);
  for (Eigen::Index nn = 0; nn < n; ++nn)
    grad[nn] = 2.0 * (g_mat.col(nn).sum() - h_mat.col(nn).sum()).real();
  return grad;
}

RVec grad_angles(const Snapshot& snapshot, const RisSchedule& schedule,
                 const ArrayGeometry& geometry, const RVec& theta,
                 const RVec& offsets, const CVec& signals) {
  check_inputs(snapshot, schedule, geometry, theta, offsets);
  if (signals.size() != theta.size())
    throw std::invalid_argument("grad_angles: signals/directions size mismatch");
  const Eigen::Index k = theta.size();

  const CMat resp = offset_response(geometry, offsets, theta, schedule.psi_rad);
  const CVec mu = schedule.b_matrix.transpose() * (resp * signals);
  const CVec z = schedule.b_matrix * (mu - snapshot.received).conjugate();
  const RVec scaled_pos = geometry.expected_positions + offsets;

  RVec grad(k);
  for (Eigen::Index kk = 0; kk < k; ++kk) {
    const cd factor = kImag * (2.0 * kPi / geometry.wavelength) * std::cos(theta[kk]) * signals[kk];
    cd acc(0.0, 0.0);
    for (Eigen::Index nn = 0; nn < geometry.n_elements; ++nn)
      acc += resp(nn, kk) * scaled_pos[nn] * z[nn];
    grad[kk] = 2.0 * (factor * acc).real();
  }
  return grad;
}

RefinementTrace refine(const Snapshot& snapshot, const RisSchedule& schedule,
                       const ArrayGeometry& geometry, const RVec& theta_init,
                       const GdOptions& options) {
  const Eigen::Index n = geometry.n_elements;
  RVec d = RVec::Zero(n);
  RVec theta = theta_init;
  check_inputs(snapshot, schedule, geometry, theta, d);
  if (options.max_iter < 1) throw std::invalid_argument("refine: max_iter must be positive");

  const double theta_cap = kPi / 2.0 - 1e-9;

  RefinementTrace tr;
  CVec s = estimate_signal(snapshot, schedule, geometry, theta, d).signals;
  double eta = objective_eta(snapshot, schedule, geometry, theta, d, s);
  tr.eta_raw.push_back(eta);
  tr.eta_accepted.push_back(eta);
  tr.best_eta = eta;
  tr.d_estimate = d;
  tr.theta_estimate = theta;
  tr.s_estimate = s;

  // Normalize the raw steps so the first update has a known size.
  const RVec g_d0 = grad_perturbation(snapshot, schedule, geometry, theta, d, s);
  const RVec g_t0 = grad_angles(snapshot, schedule, geometry, theta, d, s);
  const double g_d0_max = g_d0.cwiseAbs().maxCoeff();
  const double g_t0_max = g_t0.cwiseAbs().maxCoeff();
  double rho_d = g_d0_max > 0.0 ? options.step_d * geometry.wavelength / g_d0_max : 0.0;
  double rho_t = g_t0_max > 0.0 ? options.step_theta / g_t0_max : 0.0;
  const double rho_d_init = rho_d, rho_t_init = rho_t;

  int grow_count = 0;
  double eta_prev = eta;
  for (int it = 1; it <= options.max_iter; ++it) {
    tr.iterations = it;
    const RVec g_d = grad_perturbation(snapshot, schedule, geometry, theta, d, s);
    d -= rho_d * g_d;
    const RVec g_t = grad_angles(snapshot, schedule, geometry, theta, d, s);
    theta -= rho_t * g_t;
    for (Eigen::Index kk = 0; kk < theta.size(); ++kk)
      theta[kk] = std::clamp(theta[kk], -theta_cap, theta_cap);

    s = estimate_signal(snapshot, schedule, geometry, theta, d).signals;
    eta = objective_eta(snapshot, schedule, geometry, theta, d, s);
    tr.eta_raw.push_back(eta);
    if (eta < tr.best_eta) {
      tr.best_eta = eta;
      tr.d_estimate = d;
      tr.theta_estimate = theta;
      tr.s_estimate = s;
    }
    tr.eta_accepted.push_back(tr.best_eta);

    if (eta > eta_prev) {
      if (++grow_count >= options.divergence_window) {
        rho_d *= 0.5;
        rho_t *= 0.5;
        grow_count = 0;
        if ((rho_d_init > 0.0 && rho_d < options.min_step_factor * rho_d_init) ||
            (rho_t_init > 0.0 && rho_t < options.min_step_factor * rho_t_init)) {
          tr.step_underflow = true;
          break;
        }
      }
    } else {
      grow_count = 0;
    }

    const double denom = std::max(eta_prev, 1e-300);
    if (std::abs(eta - eta_prev) <= options.rel_tol * denom) {
      tr.stopped_early = true;
      break;
    }
    eta_prev = eta;
  }
  return tr;
}

EstimationResult run_adpp(const ArrayGeometry& geometry, const Snapshot& snapshot,
                          const RisSchedule& schedule, const AdppOptions& options) {
  if (options.outer_iters < 1) throw std::invalid_argument("run_adpp: outer_iters must be positive");

  EstimationResult res;
  res.best_eta = std::numeric_limits<double>::infinity();
  RVec d_cur = RVec::Zero(geometry.n_elements);
  RVec theta_prev;
  RVec d_prev;

  for (int round = 0; round < options.outer_iters; ++round) {
    const DoaEstimate est = estimate_doa(geometry, snapshot, schedule, d_cur, options.anm);
    if (est.k_detected == 0) break;  // nothing to refine against, keep the best so far

    const RefinementTrace tr = refine(snapshot, schedule, geometry, est.angles_rad, options.gd);
    res.rounds = round + 1;
    res.round_bounds.push_back(static_cast<int>(res.eta_trace.size()));
    res.eta_trace.insert(res.eta_trace.end(), tr.eta_raw.begin(), tr.eta_raw.end());

    // Order directions ascending and carry the fitted amplitudes along.
    const RVec& theta_pick = options.use_refined_theta ? tr.theta_estimate : est.angles_rad;
    std::vector<int> order(theta_pick.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return theta_pick[a] < theta_pick[b]; });
    RVec theta_new(theta_pick.size());
    CVec s_new(theta_pick.size());
    for (size_t i = 0; i < order.size(); ++i) {
      theta_new[static_cast<Eigen::Index>(i)] = theta_pick[order[i]];
      s_new[static_cast<Eigen::Index>(i)] = tr.s_estimate[order[i]];
    }
    const RVec d_new = tr.d_estimate;

    if (tr.best_eta < res.best_eta) {
      res.best_eta = tr.best_eta;
      res.theta = theta_new;
      res.d_offsets = d_new;
      res.signals = s_new;
      res.k_detected = est.k_detected;
    }

    const bool comparable = theta_prev.size() == theta_new.size();
    if (comparable) {
      const double d_theta = (theta_new - theta_prev).cwiseAbs().maxCoeff();
      const double d_d = (d_new - d_prev).cwiseAbs().maxCoeff();
      if (d_theta <= options.tol_theta_rad && d_d <= options.tol_d * geometry.wavelength) {
        res.converged = true;
        theta_prev = theta_new;
        d_prev = d_new;
        break;
      }
    }
    theta_prev = theta_new;
    d_prev = d_new;
    d_cur = d_new;
  }
  return res;
}

}  // namespace risdoa
