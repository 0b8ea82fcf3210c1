// Signal model for a linear UAV swarm acting as a reflective relay between
// far-field emitters and a single receiver. Element n sits at position
// d_n = expected_positions[n] + perturbations[n] along the array line. A
// narrowband emitter at angle theta reaches element n with phase
// 2*pi*d_n*sin(theta)/lambda; the hop to the receiver at angle psi adds
// 2*pi*d_n*sin(psi)/lambda. Each element applies a per-slot reflection
// coefficient amplitude*exp(j*phi[n,m]), and the receiver collects one sample
// per slot:
//
//   r = B^T * diag(a(psi, dt)) * (A(theta, de) o A(theta, dt)) * s + w
//
// where de are the expected positions, dt the offsets, o the elementwise
// product, and column m of B is a(psi, de) scaled by the slot-m reflection
// coefficients.

#ifndef RISDOA_MODEL_HPP
#define RISDOA_MODEL_HPP

#include "risdoa/types.hpp"

#include <cstdint>
#include <vector>

namespace risdoa {

struct ArrayGeometry {
  int n_elements = 0;
  double spacing_wavelengths = 0.5;  // expected spacing, in wavelengths
  double wavelength = 1.0;           // carrier wavelength (positions use the same unit)
  RVec expected_positions;           // nominal element positions, ascending
  RVec perturbations;                // true offsets, zero when the array is ideal
};

// Uniform linear geometry with expected_positions[n] = n * spacing and zero
// perturbations.
ArrayGeometry make_uniform_geometry(int n_elements, double spacing_wavelengths = 0.5);

struct TargetSet {
  RVec angles_rad;  // emitter directions, each in (-pi/2, pi/2]
  CVec signals;     // complex amplitudes, one per emitter
};

struct RisSchedule {
  CMat b_matrix;                  // N x M, column m = a(psi, de) o c(m)
  double psi_rad = 0.0;           // receiver direction seen from the array
  std::vector<double> phase_set;  // discrete reflection phases drawn from
  double amplitude = 1.0;         // common reflection amplitude
};

// Draws the per-slot reflection phases uniformly from phase_set (slot by
// slot, element 0 first) and assembles B. Deterministic for a given seed.
RisSchedule make_ris_schedule(const ArrayGeometry& geometry, int n_slots,
                              double psi_rad, const std::vector<double>& phase_set,
                              double amplitude, std::uint64_t seed);

struct Snapshot {
  CVec received;           // r, one complex sample per slot
  double noise_variance = 0.0;
  double snr_db = 0.0;     // SNR used at synthesis time (may be +inf)
  bool has_truth = false;  // the fields below are only meaningful when set
  RVec true_angles_rad;
  RVec true_perturbations;
};

// Steering vector a(theta, d): entry n is exp(j*2*pi*d_n*sin(theta)/lambda).
CVec steering_vector(double angle_rad, const RVec& positions, double wavelength);

// One steering vector per column.
CMat steering_matrix(const RVec& angles_rad, const RVec& positions, double wavelength);

// Response of the array with element offsets applied: column k holds
// exp(j*2*pi/lambda * ((de_n + off_n)*sin(theta_k) + off_n*sin(psi))).
// This is the per-element factor multiplying s_k in the model above.
CMat offset_response(const ArrayGeometry& geometry, const RVec& offsets,
                     const RVec& angles_rad, double psi_rad);

// Noise variance that realizes the requested SNR against the mean power of
// the noiseless samples. Infinite SNR maps to zero variance.
double snr_to_noise_variance(double snr_db, const CVec& noiseless);

// Mean of the noiseless received samples' squared magnitudes.
double mean_power(const CVec& samples);

// Simulates one observation window: builds the noiseless samples from the
// geometry (including its true perturbations), then adds circular white
// Gaussian noise sized for snr_db. Deterministic for a given seed.
Snapshot synthesize(const ArrayGeometry& geometry, const TargetSet& targets,
                    const RisSchedule& schedule, double snr_db, std::uint64_t seed);

}  // namespace risdoa

#endif  // RISDOA_MODEL_HPP
