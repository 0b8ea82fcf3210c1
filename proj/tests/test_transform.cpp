#include "risdoa/transform.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <stdexcept>

using namespace risdoa;

TEST_CASE("angle grid is inclusive, ascending, and equally spaced") {
  const RVec grid = make_angle_grid(-0.5, 0.5, 11);
  REQUIRE(grid.size() == 11);
  CHECK(grid[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(grid[10] == doctest::Approx(0.5).epsilon(1e-15));
  for (int i = 1; i < 11; ++i)
    CHECK(grid[i] - grid[i - 1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("dictionaries hold nominal and shifted steering vectors") {
  const ArrayGeometry g = make_uniform_geometry(5, 0.5);
  RVec est(5);
  est << 0.01, -0.03, 0.02, 0.0, -0.01;
  const RVec grid = make_angle_grid(-1.0, 1.0, 9);
  const GridDictionary dict = build_dictionaries(g, est, grid);
  REQUIRE(dict.nominal.cols() == 9);
  REQUIRE(dict.perturbed.cols() == 9);
  const RVec shifted = g.expected_positions + est;
  for (int c = 0; c < 9; ++c) {
    CHECK((dict.nominal.col(c) -
           steering_vector(grid[c], g.expected_positions, g.wavelength))
              .norm() < 1e-14);
    CHECK((dict.perturbed.col(c) - steering_vector(grid[c], shifted, g.wavelength)).norm() <
          1e-14);
  }
}

TEST_CASE("a grid smaller than the element count is rejected") {
  const ArrayGeometry g = make_uniform_geometry(6, 0.5);
  CHECK_THROWS_AS(build_dictionaries(g, RVec::Zero(6), make_angle_grid(-1.0, 1.0, 5)),
                  std::invalid_argument);
}

TEST_CASE("zero perturbation estimate fits the identity transform") {
  const ArrayGeometry g = make_uniform_geometry(6, 0.5);
  const GridDictionary dict =
      build_dictionaries(g, RVec::Zero(6), make_angle_grid(-1.2, 1.2, 48));
  const TransformMatrix tm = estimate_transform(dict);
  CHECK((tm.t - CMat::Identity(6, 6)).norm() < 1e-10);
  CHECK(tm.fit_residual < 1e-12);
}

TEST_CASE("least-squares fit matches the explicit Kronecker solve") {
  for (int n : {4, 6}) {
    for (std::uint64_t seed : {21u, 22u}) {
      const ArrayGeometry g = make_uniform_geometry(n, 0.5);
      Rng rng(seed);
      RVec est(n);
      for (int i = 0; i < n; ++i) est[i] = rng.uniform_half_open(-1.0 / 16.0, 1.0 / 16.0);
      const RVec grid = make_angle_grid(-1.4, 1.4, 8 * n);
      const GridDictionary dict = build_dictionaries(g, est, grid);
      const TransformMatrix tm = estimate_transform(dict);
      const CMat ref = testing::oracle_transform_kronecker(dict);
      CHECK((tm.t - ref).norm() / ref.norm() < 1e-8);
    }
  }
}

TEST_CASE("fitted transform reproduces perturbed steering off the fit grid") {
  const ArrayGeometry g = make_uniform_geometry(8, 0.5);
  Rng rng(5);
  RVec est(8);
  for (int i = 0; i < 8; ++i) est[i] = rng.uniform_half_open(-1.0 / 16.0, 1.0 / 16.0);
  const GridDictionary dict = build_dictionaries(g, est, make_angle_grid(-1.3, 1.3, 64));
  const TransformMatrix tm = estimate_transform(dict);
  CHECK(tm.fit_residual < 0.12);

  // Probe angles strictly between grid nodes. Aggregated over the probes,
  // mapped vectors must land clearly closer to the perturbed manifold than
  // the unmapped nominal ones do.
  const RVec shifted = g.expected_positions + est;
  double mapped_err = 0.0, unmapped_err = 0.0;
  for (double angle : {-0.93, -0.171, 0.377, 1.02}) {
    const CVec nominal = steering_vector(angle, g.expected_positions, g.wavelength);
    const CVec target = steering_vector(angle, shifted, g.wavelength);
    const CVec mapped = tm.t.adjoint() * nominal;
    CHECK((mapped - target).norm() / target.norm() < 0.12);
    mapped_err += (mapped - target).squaredNorm();
    unmapped_err += (nominal - target).squaredNorm();
  }
  CHECK(mapped_err < 0.25 * unmapped_err);
}
