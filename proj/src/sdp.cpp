#include "risdoa/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace risdoa {

namespace {

constexpr double kPi = EIGEN_PI;

// Hermitian projection of the top-left block onto the affine set
// {trace = 1, every off-diagonal sums to zero}. Orthogonal in the Frobenius
// inner product: each constraint touches one diagonal of the matrix, so the
// projection subtracts the per-diagonal mean (shifted by 1/N on the main
// diagonal).
void affine_project(CMat& w) {
  const Eigen::Index n = w.rows();
  w = 0.5 * (w + w.adjoint()).eval();
  double tr = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) tr += w(i, i).real();
  const double shift = (tr - 1.0) / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i, i) = cd(w(i, i).real() - shift, 0.0);
  for (Eigen::Index v = 1; v < n; ++v) {
    cd mean(0.0, 0.0);
    for (Eigen::Index i = 0; i + v < n; ++i) mean += w(i, i + v);
    mean /= static_cast<double>(n - v);
    for (Eigen::Index i = 0; i + v < n; ++i) {
      w(i, i + v) -= mean;
      w(i + v, i) = std::conj(w(i, i + v));
    }
  }
}

// Nearest positive semidefinite matrix in Frobenius norm: clamp negative
// eigenvalues of the Hermitian part.
void psd_project(CMat& z, Eigen::SelfAdjointEigenSolver<CMat>& es) {
  z = 0.5 * (z + z.adjoint()).eval();
  es.compute(z);
  RVec lam = es.eigenvalues().cwiseMax(0.0);
  z.noalias() = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

double min_eigenvalue(const CMat& z) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (z + z.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

RVec full_angle_grid(int n) {
  if (n < 2) throw std::invalid_argument("full_angle_grid: need at least two points");
  RVec g(n);
  for (int i = 0; i < n; ++i)
    g[i] = -kPi / 2.0 + (static_cast<double>(i + 1) / n) * kPi;
  return g;
}

AnmSdpProblem formulate(const ArrayGeometry& geometry, const Snapshot& snapshot,
                        const RisSchedule& schedule, const RVec& perturbation_estimate,
                        const CMat& transform, double t_param, double beta) {
  const Eigen::Index n = geometry.n_elements;
  if (schedule.b_matrix.rows() != n)
    throw std::invalid_argument("formulate: schedule/geometry element count mismatch");
  if (snapshot.received.size() != schedule.b_matrix.cols())
    throw std::invalid_argument("formulate: snapshot/schedule slot count mismatch");
  if (perturbation_estimate.size() != n)
    throw std::invalid_argument("formulate: perturbation estimate size mismatch");
  if (transform.rows() != n || transform.cols() != n)
    throw std::invalid_argument("formulate: transform must be N x N");
  if (!(t_param > 0.0)) throw std::invalid_argument("formulate: t must be positive");

  AnmSdpProblem p;
  p.t_param = t_param;
  p.beta = beta > 0.0 ? beta : std::sqrt(t_param);
  p.transform = transform;
  p.positions = geometry.expected_positions;
  p.wavelength = geometry.wavelength;

  // Receiver-side phase of the estimated offsets: a(psi, d_hat).
  const CVec a_psi = steering_vector(schedule.psi_rad, perturbation_estimate, geometry.wavelength);
  const CVec weights = a_psi.conjugate();

  const CMat b_conj = schedule.b_matrix.conjugate();
  p.q = weights.asDiagonal() * (b_conj * snapshot.received);
  CMat gram = b_conj * schedule.b_matrix.transpose();
  p.m = weights.asDiagonal() * gram * a_psi.asDiagonal();
  p.m = 0.5 * (p.m + p.m.adjoint()).eval();

  const double tr = p.m.real().trace();
  if (!(tr > 0.0)) throw std::invalid_argument("formulate: weight matrix has zero trace");
  Eigen::SelfAdjointEigenSolver<CMat> es(p.m, Eigen::EigenvaluesOnly);
  const double lam_min = es.eigenvalues().minCoeff();
  const double lam_max = es.eigenvalues().maxCoeff();
  if (!(lam_max > 0.0)) throw std::invalid_argument("formulate: weight matrix is not positive");
  if (lam_min <= lam_max * 1e-12) {
    p.regularization = 1e-8 * tr / static_cast<double>(n);
    p.m.diagonal().array() += p.regularization;
    if (min_eigenvalue(p.m) <= 0.0)
      throw std::invalid_argument("formulate: weight matrix singular beyond repair");
  }
  return p;
}

SdpSolution solve(const AnmSdpProblem& problem, const SdpOptions& options) {
  const Eigen::Index n = problem.q.size();
  if (problem.m.rows() != n || problem.m.cols() != n)
    throw std::invalid_argument("solve: q and m dimensions disagree");
  if (!(problem.t_param > 0.0) || !(problem.beta > 0.0))
    throw std::invalid_argument("solve: hyperparameters must be positive");
  if (options.max_iter < 1) throw std::invalid_argument("solve: max_iter must be positive");

  const double beta = problem.beta;
  const double t = problem.t_param;

  // Work on the normalized problem with t = beta = 1: substitute h = beta*h',
  // W = (beta^2/t)*W'. The bordered matrix of the original problem is a
  // congruence transform of the normalized one, so feasibility carries over.
  const CVec qu = problem.q / beta;
  const CMat& tf = problem.transform;

  Eigen::LLT<CMat> m_llt(problem.m);
  if (m_llt.info() != Eigen::Success)
    throw std::runtime_error("solve: weight matrix is not positive definite");
  CMat m_inv = m_llt.solve(CMat::Identity(n, n));
  m_inv = 0.5 * (m_inv + m_inv.adjoint()).eval();

  const CMat tft = tf.adjoint() * tf;
  const CVec rhs_const = m_inv * qu;
  const double m_inv_scale = std::max(1.0, rhs_const.norm());

  double rho = options.rho > 0.0 ? options.rho : m_inv.real().trace() / static_cast<double>(n);
  Eigen::LLT<CMat> p_llt;
  auto refactor = [&]() {
    p_llt.compute(m_inv + rho * tft);
    if (p_llt.info() != Eigen::Success)
      throw std::runtime_error("solve: failed to factor the h-step system");
  };
  refactor();

  // Certification grid over the full field of view.
  const CMat a_grid = steering_matrix(full_angle_grid(options.cert_grid_size),
                                      problem.positions, problem.wavelength);

  const Eigen::Index nb = n + 1;
  CMat z = CMat::Zero(nb, nb);
  z.topLeftCorner(n, n) = CMat::Identity(n, n) / static_cast<double>(n);
  z(n, n) = 1.0;
  CMat u_dual = CMat::Zero(nb, nb);
  CMat s_mat = CMat::Zero(nb, nb);
  s_mat(n, n) = 1.0;
  CMat w_blk(n, n), z_prev(nb, nb), v_work(nb, nb);
  CVec h = CVec::Zero(n), tu(n), xu(n);
  Eigen::SelfAdjointEigenSolver<CMat> es;

  const double stop_tol = 0.1 * std::min(options.tol_psd, options.tol_lin);
  const double alpha = options.over_relaxation;

  SdpSolution sol;
  // trace_best tracks the certified objective for the monotone trace; the
  // captured pair is the lowest-objective iterate whose bordered matrix is
  // positive semidefinite to within tol_psd, with the least-violating
  // iterate seen as the fallback when none qualifies yet.
  double trace_best = std::numeric_limits<double>::infinity();
  double cap_obj = std::numeric_limits<double>::infinity();
  double cap_viol = std::numeric_limits<double>::infinity();
  bool cap_feasible = false;
  CVec best_h = CVec::Zero(n);
  CMat best_w = z.topLeftCorner(n, n);
  CVec best_y = CVec::Zero(n);
  CMat s_cand = CMat::Zero(nb, nb);
  Eigen::SelfAdjointEigenSolver<CMat> es_cert;

  auto unit_objective = [&](const CVec& hh) {
    const CVec d = qu - hh;
    return (d.adjoint() * (m_inv * d))(0, 0).real();
  };

  // Certify the current iterate on the grid: radially scale h into the dual
  // ball, measure the positive-semidefiniteness of the scaled candidate
  // pair, and consider it for capture.
  auto certify = [&]() {
    tu.noalias() = tf * h;
    const double s_val = (a_grid.adjoint() * tu).cwiseAbs().maxCoeff();
    const double c = s_val > 1.0 ? (1.0 - 1e-12) / s_val : 1.0;
    const CVec hc = c * h;
    const double obj = unit_objective(hc);
    trace_best = std::min(trace_best, obj);

    s_cand.topLeftCorner(n, n) = w_blk;
    s_cand.col(n).head(n) = c * tu;
    s_cand.row(n).head(n) = (c * tu).adjoint();
    s_cand(n, n) = 1.0;
    es_cert.compute(s_cand, Eigen::EigenvaluesOnly);
    const double viol = std::max(0.0, -es_cert.eigenvalues().minCoeff()) /
                        std::max(1.0, s_cand.norm());

    const bool good = viol <= options.tol_psd;
    const bool take = good ? (!cap_feasible || obj < cap_obj)
                           : (!cap_feasible && viol < cap_viol);
    if (take) {
      cap_obj = obj;
      cap_viol = viol;
      cap_feasible = good;
      best_h = hc;
      best_w = w_blk;
      best_y = rho * u_dual.col(n).head(n);
    }
    if (options.collect_trace) sol.objective_trace.push_back(trace_best);
  };

  // Plateau detector for the certified objective: once the captured pair is
  // feasible and the certified value has stopped improving across a window
  // of certifications, further iterations only polish residuals.
  std::vector<double> cert_history;
  const int plateau_window = 8;

  int iter = 0;
  double rel_p = std::numeric_limits<double>::infinity();
  for (iter = 1; iter <= options.max_iter; ++iter) {
    // Affine step: project the W block, solve the regularized h system.
    v_work = z - u_dual;
    w_blk = v_work.topLeftCorner(n, n);
    affine_project(w_blk);
    xu = v_work.col(n).head(n);
    h = p_llt.solve(rhs_const + rho * (tf.adjoint() * xu));
    tu.noalias() = tf * h;

    s_mat.topLeftCorner(n, n) = w_blk;
    s_mat.col(n).head(n) = tu;
    s_mat.row(n).head(n) = tu.adjoint();

    // Cone step on the over-relaxed average, then the dual update.
    z_prev = z;
    v_work = alpha * s_mat + (1.0 - alpha) * z + u_dual;
    z = v_work;
    psd_project(z, es);
    u_dual = v_work - z;

    const double r_p = (s_mat - z).norm();
    const double r_d = rho * (z - z_prev).norm();
    const double sp = std::max({1.0, s_mat.norm(), z.norm()});
    const double sd = std::max(1.0, rho * u_dual.norm());
    rel_p = r_p / sp;
    const double rel_d = r_d / sd;

    if (iter % options.cert_every == 0) {
      certify();
      cert_history.push_back(trace_best);
      const size_t hist = cert_history.size();
      if (cap_feasible && hist > static_cast<size_t>(plateau_window)) {
        const double before = cert_history[hist - 1 - plateau_window];
        if (before - trace_best <= options.tol_rel_obj * std::max(1.0, std::abs(trace_best))) {
          sol.converged = true;
          break;
        }
      }
    }

    if (rel_p <= stop_tol && rel_d <= stop_tol) {
      sol.converged = true;
      break;
    }

    // Residual balancing keeps the primal and dual rates comparable.
    if (iter % 100 == 0 && iter >= 200) {
      if (rel_p > 10.0 * rel_d && rho < 1e10) {
        rho *= 2.0;
        u_dual *= 0.5;
        refactor();
      } else if (rel_d > 10.0 * rel_p && rho > 1e-10) {
        rho *= 0.5;
        u_dual *= 2.0;
        refactor();
      }
    }
  }
  certify();  // consider the final iterate
  sol.iterations = std::min(iter, options.max_iter);

  // Map the captured solution back to the original scale.
  sol.h = beta * best_h;
  sol.w = (beta * beta / t) * best_w;
  sol.objective_value = beta * beta * cap_obj;

  // Residuals of the returned pair, relative to the normalized problem.
  CMat s_best = CMat::Zero(nb, nb);
  s_best.topLeftCorner(n, n) = best_w;
  s_best.col(n).head(n) = tf * best_h;
  s_best.row(n).head(n) = (tf * best_h).adjoint();
  s_best(n, n) = 1.0;
  const double lam_min = min_eigenvalue(s_best);
  sol.kkt.psd_violation = std::max(0.0, -lam_min) / std::max(1.0, s_best.norm());
  sol.kkt.trace_gap = std::abs(best_w.real().trace() - 1.0);
  double od = 0.0;
  for (Eigen::Index v = 1; v < n; ++v) {
    cd acc(0.0, 0.0);
    for (Eigen::Index i = 0; i + v < n; ++i) acc += best_w(i, i + v);
    od = std::max(od, std::abs(acc));
  }
  sol.kkt.offdiag_sum_max = od;
  sol.kkt.stationarity_norm =
      (m_inv * (best_h - qu) + tf.adjoint() * best_y).norm() / m_inv_scale;
  return sol;
}

}  // namespace risdoa
