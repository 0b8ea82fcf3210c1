#include "risdoa/harness.hpp"

#include "risdoa/baselines.hpp"
#include "risdoa/crb.hpp"
#include "risdoa/transform.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace risdoa {

namespace {

constexpr double kPi = EIGEN_PI;
constexpr double kDeg = 180.0 / EIGEN_PI;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// At most k angles, keeping the tallest peaks, returned ascending. Falls
// back to plain truncation when no heights are available.
RVec top_k_angles(const MethodRun& run, int k) {
  const Eigen::Index n = run.angles_rad.size();
  if (n <= k) return run.angles_rad;
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  if (run.peak_heights.size() == n) {
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return run.peak_heights[a] > run.peak_heights[b];
    });
  }
  idx.resize(static_cast<size_t>(k));
  std::vector<double> kept;
  kept.reserve(idx.size());
  for (const Eigen::Index i : idx) kept.push_back(run.angles_rad[i]);
  std::sort(kept.begin(), kept.end());
  RVec out(k);
  for (int i = 0; i < k; ++i) out[i] = kept[static_cast<size_t>(i)];
  return out;
}

}  // namespace

double paired_sq_error_deg(const RVec& truth_rad, const RVec& estimate_rad,
                           double miss_penalty_deg) {
  const int kt = static_cast<int>(truth_rad.size());
  const int ke = static_cast<int>(estimate_rad.size());
  if (kt == 0) throw std::invalid_argument("paired_sq_error_deg: empty truth");
  if (ke > kt) throw std::invalid_argument("paired_sq_error_deg: more estimates than targets");
  if (!(miss_penalty_deg > 0.0))
    throw std::invalid_argument("paired_sq_error_deg: penalty must be positive");

  std::vector<double> t(truth_rad.data(), truth_rad.data() + kt);
  std::vector<double> e(estimate_rad.data(), estimate_rad.data() + ke);
  std::sort(t.begin(), t.end());
  std::sort(e.begin(), e.end());

  // Order-preserving assignment: every estimate is matched, skipped truths
  // cost the penalty, matched errors are capped at the penalty. dp[j] holds
  // the best cost of matching the first j estimates to the truths seen so
  // far.
  const double pen2 = miss_penalty_deg * miss_penalty_deg;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(static_cast<size_t>(ke) + 1, inf);
  dp[0] = 0.0;
  for (int i = 0; i < kt; ++i) {
    for (int j = std::min(i + 1, ke); j >= 1; --j) {
      const double err = (t[static_cast<size_t>(i)] - e[static_cast<size_t>(j - 1)]) * kDeg;
      const double cost = std::min(err * err, pen2);
      dp[static_cast<size_t>(j)] =
          std::min(dp[static_cast<size_t>(j)] + pen2, dp[static_cast<size_t>(j - 1)] + cost);
    }
    dp[0] += pen2;
  }
  return dp[static_cast<size_t>(ke)];
}

double rmse(const RVec& truth_rad, const std::vector<RVec>& estimates_rad,
            double miss_penalty_deg) {
  if (estimates_rad.empty()) throw std::invalid_argument("rmse: no trials");
  double total = 0.0;
  for (const auto& est : estimates_rad)
    total += paired_sq_error_deg(truth_rad, est, miss_penalty_deg);
  const double denom =
      static_cast<double>(estimates_rad.size()) * static_cast<double>(truth_rad.size());
  return std::sqrt(total / denom);
}

EstimateOptions estimate_options(const SceneConfig& cfg) {
  EstimateOptions o;
  o.t_param = cfg.t_param;
  o.beta = cfg.beta;
  o.range_lo_rad = cfg.detection_lo_deg / kDeg;
  o.range_hi_rad = cfg.detection_hi_deg / kDeg;
  o.eval_grid_size = cfg.eval_grid_size;
  o.transform_oversampling = cfg.transform_oversampling;
  o.peaks.relative_threshold = cfg.relative_threshold;
  o.peaks.min_separation_rad = cfg.min_separation_deg / kDeg;
  o.sdp.max_iter = cfg.sdp_max_iter;
  return o;
}

AdppOptions adpp_options(const SceneConfig& cfg) {
  AdppOptions o;
  o.anm = estimate_options(cfg);
  o.gd.step_d = cfg.step_d;
  o.gd.step_theta = cfg.step_theta;
  o.gd.max_iter = cfg.inner_iters;
  o.outer_iters = cfg.outer_iters;
  o.use_refined_theta = cfg.use_refined_theta;
  return o;
}

SceneConfig apply_axis(const SceneConfig& cfg, const std::string& axis, double value) {
  SceneConfig out = cfg;
  if (axis == "snr_db") {
    out.snr_db = value;
  } else if (axis == "n_elements" || axis == "n_slots") {
    const long long n = std::llround(value);
    if (std::abs(value - static_cast<double>(n)) > 1e-9 || n <= 0)
      throw std::runtime_error("sweep axis " + axis + " needs positive integers, got " + fmt(value));
    (axis == "n_elements" ? out.n_elements : out.n_slots) = static_cast<int>(n);
  } else if (axis == "psi_deg") {
    out.psi_deg = value;
  } else {
    throw std::runtime_error("unknown sweep_axis '" + axis + "'");
  }
  return out;
}

TrialScene make_trial_scene(const SceneConfig& cfg, int axis_index, int trial) {
  TrialScene scene;
  scene.geometry = make_uniform_geometry(cfg.n_elements, cfg.spacing_wavelengths);
  if (cfg.perturbation_half_width > 0.0) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(axis_index),
                        static_cast<std::uint64_t>(trial), 2));
    const double hw = cfg.perturbation_half_width * scene.geometry.wavelength;
    for (int n = 0; n < cfg.n_elements; ++n)
      scene.geometry.perturbations[n] = rng.uniform_half_open(-hw, hw);
  }

  const int k = static_cast<int>(cfg.angles_deg.size());
  scene.targets.angles_rad.resize(k);
  scene.targets.signals.resize(k);
  Rng sig_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(axis_index),
                          static_cast<std::uint64_t>(trial), 3));
  for (int i = 0; i < k; ++i) {
    scene.targets.angles_rad[i] = cfg.angles_deg[static_cast<size_t>(i)] / kDeg;
    const double phase = 2.0 * kPi * sig_rng.uniform01();
    scene.targets.signals[i] =
        cfg.signal_amplitudes[static_cast<size_t>(i)] * std::exp(kImag * phase);
  }

  scene.schedule_seed =
      cfg.fix_schedule ? derive_seed(cfg.seed, 0, 0, 1)
                       : derive_seed(cfg.seed, static_cast<std::uint64_t>(axis_index),
                                     static_cast<std::uint64_t>(trial), 1);
  scene.schedule = make_ris_schedule(scene.geometry, cfg.n_slots, cfg.psi_deg / kDeg,
                                     {0.0, kPi}, 1.0, scene.schedule_seed);
  scene.snapshot =
      synthesize(scene.geometry, scene.targets, scene.schedule, cfg.snr_db,
                 derive_seed(cfg.seed, static_cast<std::uint64_t>(axis_index),
                             static_cast<std::uint64_t>(trial), 4));
  return scene;
}

SnapshotRecord make_snapshot_record(const SceneConfig& cfg) {
  const TrialScene scene = make_trial_scene(cfg, 0, 0);
  SnapshotRecord rec;
  rec.n_elements = cfg.n_elements;
  rec.n_slots = cfg.n_slots;
  rec.spacing_wavelengths = cfg.spacing_wavelengths;
  rec.psi_deg = cfg.psi_deg;
  rec.schedule_seed = scene.schedule_seed;
  rec.amplitude = scene.schedule.amplitude;
  rec.phase_set = scene.schedule.phase_set;
  rec.noise_variance = scene.snapshot.noise_variance;
  rec.snr_db = cfg.snr_db;
  rec.has_truth = true;
  rec.true_angles_deg = cfg.angles_deg;
  rec.true_perturbations_wl.resize(static_cast<size_t>(cfg.n_elements));
  for (int n = 0; n < cfg.n_elements; ++n)
    rec.true_perturbations_wl[static_cast<size_t>(n)] = scene.geometry.perturbations[n];
  rec.received = scene.snapshot.received;
  return rec;
}

MethodRun run_method(const std::string& method, const SceneConfig& cfg,
                     const ArrayGeometry& geometry, const Snapshot& snapshot,
                     const RisSchedule& schedule, int k_max) {
  MethodRun out;
  const EstimateOptions opts = estimate_options(cfg);
  if (method == "adpp") {
    const EstimationResult r = run_adpp(geometry, snapshot, schedule, adpp_options(cfg));
    out.angles_rad = r.theta;
    out.peak_heights = r.signals.cwiseAbs();
    out.d_offsets = r.d_offsets;
    out.k_detected = r.k_detected;
  } else if (method == "anm") {
    const DoaEstimate r = plain_anm(geometry, snapshot, schedule, opts);
    out.angles_rad = r.angles_rad;
    out.peak_heights = r.peak_heights;
    out.k_detected = r.k_detected;
  } else if (method == "omp") {
    const RVec grid = make_angle_grid(opts.range_lo_rad, opts.range_hi_rad, cfg.omp_grid_size);
    const DoaEstimate r = omp_estimate(snapshot, schedule, geometry, grid, k_max);
    out.angles_rad = r.angles_rad;
    out.peak_heights = r.peak_heights;
    out.k_detected = r.k_detected;
  } else if (method == "fft") {
    const RVec grid = make_angle_grid(opts.range_lo_rad, opts.range_hi_rad, cfg.fft_grid_size);
    const DoaEstimate r = beamform_estimate(snapshot, schedule, geometry, grid, k_max,
                                            opts.peaks.min_separation_rad);
    out.angles_rad = r.angles_rad;
    out.peak_heights = r.peak_heights;
    out.k_detected = r.k_detected;
  } else {
    throw std::runtime_error("unknown method '" + method + "'");
  }
  return out;
}

SweepResult run_sweep(const SceneConfig& cfg) {
  if (cfg.sweep_values.empty()) throw std::runtime_error("sweep_values is empty");
  const int n_axis = static_cast<int>(cfg.sweep_values.size());
  const int n_methods = static_cast<int>(cfg.methods.size());
  const int n_trials = cfg.n_trials;
  const int k_targets = static_cast<int>(cfg.angles_deg.size());
  const double penalty_deg = 0.5 * (cfg.detection_hi_deg - cfg.detection_lo_deg);

  SweepResult result;
  result.axis = cfg.sweep_axis;

  for (int ai = 0; ai < n_axis; ++ai) {
    const SceneConfig cell = apply_axis(cfg, cfg.sweep_axis, cfg.sweep_values[static_cast<size_t>(ai)]);
    // err2 holds squared degree errors for estimators and raw direction
    // bounds (radians squared) for the crb pseudo-method.
    RMat err2 = RMat::Zero(n_trials, n_methods);
    RMat runtime = RMat::Zero(n_trials, n_methods);

    auto run_trial = [&](int trial) {
      TrialScene scene;
      bool scene_ok = true;
      try {
        scene = make_trial_scene(cell, ai, trial);
      } catch (const std::exception&) {
        scene_ok = false;
      }
      for (int mi = 0; mi < n_methods; ++mi) {
        const std::string& method = cfg.methods[static_cast<size_t>(mi)];
        const double t0 = now_seconds();
        double value = 0.0;
        if (!scene_ok) {
          value = (method == "crb") ? 0.0
                                    : static_cast<double>(k_targets) * penalty_deg * penalty_deg;
        } else if (method == "crb") {
          try {
            if (scene.snapshot.noise_variance > 0.0) {
              const CrbBounds b = crb_bounds(fisher(scene.geometry, scene.targets,
                                                    scene.schedule,
                                                    scene.snapshot.noise_variance));
              value = b.crb_theta.sum();
            }
          } catch (const std::exception&) {
            value = 0.0;
          }
        } else {
          try {
            const MethodRun run =
                run_method(method, cell, scene.geometry, scene.snapshot, scene.schedule, k_targets);
            value = paired_sq_error_deg(scene.targets.angles_rad,
                                        top_k_angles(run, k_targets), penalty_deg);
          } catch (const std::exception&) {
            value = static_cast<double>(k_targets) * penalty_deg * penalty_deg;
          }
        }
        err2(trial, mi) = value;
        runtime(trial, mi) = now_seconds() - t0;
      }
    };

    unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_trials));
    if (n_threads <= 1) {
      for (int t = 0; t < n_trials; ++t) run_trial(t);
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      pool.reserve(n_threads);
      for (unsigned w = 0; w < n_threads; ++w)
        pool.emplace_back([&] {
          for (int t = next.fetch_add(1); t < n_trials; t = next.fetch_add(1)) run_trial(t);
        });
      for (auto& th : pool) th.join();
    }

    for (int mi = 0; mi < n_methods; ++mi) {
      SweepRow row;
      row.axis_value = cfg.sweep_values[static_cast<size_t>(ai)];
      row.method = cfg.methods[static_cast<size_t>(mi)];
      const double mean = err2.col(mi).sum() /
                          (static_cast<double>(n_trials) * static_cast<double>(k_targets));
      row.rmse_deg = (row.method == "crb") ? std::sqrt(mean) * kDeg : std::sqrt(mean);
      row.n_trials = n_trials;
      row.mean_runtime_s =
          cfg.timings ? runtime.col(mi).sum() / static_cast<double>(n_trials) : 0.0;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::string format_sweep_csv(const SweepResult& result) {
  std::string out = "axis_value,method,rmse_deg,n_trials,mean_runtime_s\n";
  char buf[64];
  for (const auto& row : result.rows) {
    out += fmt(row.axis_value);
    out += ',';
    out += row.method;
    out += ',';
    out += fmt(row.rmse_deg);
    out += ',';
    out += std::to_string(row.n_trials);
    out += ',';
    std::snprintf(buf, sizeof buf, "%.6f", row.mean_runtime_s);
    out += buf;
    out += '\n';
  }
  return out;
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  write_text(path, format_sweep_csv(result));
}

CrbCurve crb_curve(const SceneConfig& cfg) {
  const TrialScene scene = make_trial_scene(cfg, 0, 0);
  const CVec noiseless =
      synthesize(scene.geometry, scene.targets, scene.schedule,
                 std::numeric_limits<double>::infinity(), 0)
          .received;

  CrbCurve curve;
  if (cfg.sweep_axis == "snr_db" && !cfg.sweep_values.empty())
    curve.snr_db = cfg.sweep_values;
  else
    curve.snr_db = {cfg.snr_db};

  const int k = static_cast<int>(scene.targets.angles_rad.size());
  curve.crb_theta_deg = RMat::Zero(static_cast<Eigen::Index>(curve.snr_db.size()), k);
  for (size_t i = 0; i < curve.snr_db.size(); ++i) {
    const double var = snr_to_noise_variance(curve.snr_db[i], noiseless);
    if (!(var > 0.0)) continue;
    const CrbBounds b =
        crb_bounds(fisher(scene.geometry, scene.targets, scene.schedule, var));
    for (int j = 0; j < k; ++j)
      curve.crb_theta_deg(static_cast<Eigen::Index>(i), j) = std::sqrt(b.crb_theta[j]) * kDeg;
  }
  return curve;
}

std::string format_crb_csv(const CrbCurve& curve) {
  std::string out = "snr_db";
  for (Eigen::Index j = 0; j < curve.crb_theta_deg.cols(); ++j)
    out += ",crb_theta_deg_" + std::to_string(j);
  out += '\n';
  for (size_t i = 0; i < curve.snr_db.size(); ++i) {
    out += fmt(curve.snr_db[i]);
    for (Eigen::Index j = 0; j < curve.crb_theta_deg.cols(); ++j) {
      out += ',';
      out += fmt(curve.crb_theta_deg(static_cast<Eigen::Index>(i), j));
    }
    out += '\n';
  }
  return out;
}

void write_crb_csv(const std::string& path, const CrbCurve& curve) {
  write_text(path, format_crb_csv(curve));
}

std::string format_dual_poly_csv(const DualPolynomial& poly) {
  std::string out = "angle_deg,f_value,beta\n";
  for (Eigen::Index i = 0; i < poly.grid_angles.size(); ++i) {
    out += fmt(poly.grid_angles[i] * kDeg);
    out += ',';
    out += fmt(poly.values[i]);
    out += ',';
    out += fmt(poly.beta);
    out += '\n';
  }
  return out;
}

void write_dual_poly_csv(const std::string& path, const DualPolynomial& poly) {
  write_text(path, format_dual_poly_csv(poly));
}

}  // namespace risdoa
