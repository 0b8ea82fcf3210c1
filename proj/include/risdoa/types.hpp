// Shared aliases and the deterministic random number generator used across
// the library. All randomness flows through Rng so that results are
// reproducible bit for bit for a given seed, independent of the standard
// library's distribution implementations.

#ifndef RISDOA_TYPES_HPP
#define RISDOA_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>

namespace risdoa {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr cd kImag{0.0, 1.0};

// splitmix64 step, used to derive independent stream seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Combine a base seed with stream indices (axis index, trial index, purpose
// tag) into one well-mixed seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix_seed(base ^ 0x6a09e667f3bcc909ULL);
  s = mix_seed(s ^ mix_seed(a));
  s = mix_seed(s ^ mix_seed(b));
  return mix_seed(s ^ mix_seed(c));
}

// Deterministic generator. Uniform and normal variates are produced with
// explicit arithmetic (53-bit uniforms, Box-Muller normals) instead of
// std:: distributions, whose output is implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on the half-open interval (lo, hi].
  double uniform_half_open(double lo, double hi) {
    return hi - (hi - lo) * uniform01();
  }

  // Standard normal via Box-Muller; the spare variate is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * EIGEN_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Circularly symmetric complex normal with E|z|^2 = 1.
  cd complex_normal() {
    const double re = normal();
    const double im = normal();
    return cd(re, im) * std::sqrt(0.5);
  }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace risdoa

#endif  // RISDOA_TYPES_HPP
