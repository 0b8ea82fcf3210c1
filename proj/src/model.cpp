#include "risdoa/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace risdoa {

namespace {

constexpr double kPi = EIGEN_PI;
constexpr double kAngleSlack = 1e-12;

void check_geometry(const ArrayGeometry& g) {
  if (g.n_elements <= 0) throw std::invalid_argument("geometry: n_elements must be positive");
  if (g.wavelength <= 0.0) throw std::invalid_argument("geometry: wavelength must be positive");
  if (g.expected_positions.size() != g.n_elements)
    throw std::invalid_argument("geometry: expected_positions size mismatch");
  if (g.perturbations.size() != 0 && g.perturbations.size() != g.n_elements)
    throw std::invalid_argument("geometry: perturbations size mismatch");
}

void check_angle(double angle_rad) {
  if (!(angle_rad > -kPi / 2.0 - kAngleSlack && angle_rad <= kPi / 2.0 + kAngleSlack))
    throw std::invalid_argument("angle outside (-pi/2, pi/2]");
}

}  // namespace

ArrayGeometry make_uniform_geometry(int n_elements, double spacing_wavelengths) {
  if (n_elements <= 0) throw std::invalid_argument("make_uniform_geometry: n_elements must be positive");
  if (spacing_wavelengths <= 0.0)
    throw std::invalid_argument("make_uniform_geometry: spacing must be positive");
  ArrayGeometry g;
  g.n_elements = n_elements;
  g.spacing_wavelengths = spacing_wavelengths;
  g.wavelength = 1.0;
  g.expected_positions = spacing_wavelengths * RVec::LinSpaced(n_elements, 0.0, n_elements - 1.0);
  g.perturbations = RVec::Zero(n_elements);
  return g;
}

CVec steering_vector(double angle_rad, const RVec& positions, double wavelength) {
  if (wavelength <= 0.0) throw std::invalid_argument("steering_vector: wavelength must be positive");
  check_angle(angle_rad);
  const double factor = 2.0 * kPi * std::sin(angle_rad) / wavelength;
  CVec a(positions.size());
  for (Eigen::Index n = 0; n < positions.size(); ++n)
    a[n] = std::polar(1.0, factor * positions[n]);
  return a;
}

CMat steering_matrix(const RVec& angles_rad, const RVec& positions, double wavelength) {
  CMat a(positions.size(), angles_rad.size());
  for (Eigen::Index k = 0; k < angles_rad.size(); ++k)
    a.col(k) = steering_vector(angles_rad[k], positions, wavelength);
  return a;
}

CMat offset_response(const ArrayGeometry& geometry, const RVec& offsets,
                     const RVec& angles_rad, double psi_rad) {
  check_geometry(geometry);
  if (offsets.size() != geometry.n_elements)
    throw std::invalid_argument("offset_response: offsets size mismatch");
  check_angle(psi_rad);
  const double two_pi_over_lambda = 2.0 * kPi / geometry.wavelength;
  const double sin_psi = std::sin(psi_rad);
  CMat resp(geometry.n_elements, angles_rad.size());
  for (Eigen::Index k = 0; k < angles_rad.size(); ++k) {
    check_angle(angles_rad[k]);
    const double sin_theta = std::sin(angles_rad[k]);
    for (Eigen::Index n = 0; n < geometry.n_elements; ++n) {
      const double phase = two_pi_over_lambda *
                           ((geometry.expected_positions[n] + offsets[n]) * sin_theta +
                            offsets[n] * sin_psi);
      resp(n, k) = std::polar(1.0, phase);
    }
  }
  return resp;
}

RisSchedule make_ris_schedule(const ArrayGeometry& geometry, int n_slots,
                              double psi_rad, const std::vector<double>& phase_set,
                              double amplitude, std::uint64_t seed) {
  check_geometry(geometry);
  check_angle(psi_rad);
  if (n_slots <= 0) throw std::invalid_argument("make_ris_schedule: n_slots must be positive");
  if (phase_set.empty()) throw std::invalid_argument("make_ris_schedule: phase_set must be non-empty");
  if (amplitude <= 0.0) throw std::invalid_argument("make_ris_schedule: amplitude must be positive");

  RisSchedule sched;
  sched.psi_rad = psi_rad;
  sched.phase_set = phase_set;
  sched.amplitude = amplitude;

  const CVec a_psi =
      steering_vector(psi_rad, geometry.expected_positions, geometry.wavelength);
  Rng rng(seed);
  sched.b_matrix.resize(geometry.n_elements, n_slots);
  for (int m = 0; m < n_slots; ++m) {
    for (int n = 0; n < geometry.n_elements; ++n) {
      const double phi = phase_set[rng.index(phase_set.size())];
      sched.b_matrix(n, m) = a_psi[n] * amplitude * std::polar(1.0, phi);
    }
  }
  return sched;
}

double mean_power(const CVec& samples) {
  if (samples.size() == 0) throw std::invalid_argument("mean_power: empty vector");
  return samples.squaredNorm() / static_cast<double>(samples.size());
}

double snr_to_noise_variance(double snr_db, const CVec& noiseless) {
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  if (std::isnan(snr_db)) throw std::invalid_argument("snr_to_noise_variance: snr is NaN");
  const double p = mean_power(noiseless);
  if (p <= 0.0)
    throw std::invalid_argument("snr_to_noise_variance: zero signal power with finite SNR");
  return p * std::pow(10.0, -snr_db / 10.0);
}

Snapshot synthesize(const ArrayGeometry& geometry, const TargetSet& targets,
                    const RisSchedule& schedule, double snr_db, std::uint64_t seed) {
  check_geometry(geometry);
  const Eigen::Index k_targets = targets.angles_rad.size();
  if (k_targets == 0) throw std::invalid_argument("synthesize: no targets");
  if (targets.signals.size() != k_targets)
    throw std::invalid_argument("synthesize: angles/signals size mismatch");
  if (schedule.b_matrix.rows() != geometry.n_elements)
    throw std::invalid_argument("synthesize: schedule/geometry element count mismatch");

  RVec offsets = geometry.perturbations.size() == 0
                     ? RVec::Zero(geometry.n_elements).eval()
                     : geometry.perturbations;
  const CMat resp = offset_response(geometry, offsets, targets.angles_rad, schedule.psi_rad);
  const CVec noiseless = schedule.b_matrix.transpose() * (resp * targets.signals);

  Snapshot snap;
  snap.noise_variance = snr_to_noise_variance(snr_db, noiseless);
  snap.snr_db = snr_db;
  snap.received = noiseless;
  if (snap.noise_variance > 0.0) {
    Rng rng(seed);
    const double sigma = std::sqrt(snap.noise_variance);
    for (Eigen::Index m = 0; m < snap.received.size(); ++m)
      snap.received[m] += sigma * rng.complex_normal();
  }
  snap.has_truth = true;
  snap.true_angles_rad = targets.angles_rad;
  snap.true_perturbations = offsets;
  return snap;
}

}  // namespace risdoa
