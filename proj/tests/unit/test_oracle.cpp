#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "capillary/domain.hpp"
#include "capillary/energy.hpp"
#include "capillary/minimize.hpp"
#include "capillary/oracle.hpp"

using namespace capillary;

TEST_CASE("radial profile is flat for a neutral wall") {
  const RadialProfile prof = radial_solve(1.0, 0.0);
  for (double u : prof.u) CHECK(u == Catch::Approx(1.0).margin(1e-12));
  for (double du : prof.du) CHECK(std::abs(du) <= 1e-12);
  CHECK(prof.u.front() == 1.0);
  CHECK(prof.du.front() == 0.0);
}

TEST_CASE("wetting wall raises the profile monotonically") {
  const RadialProfile prof = radial_solve(1.0, 0.4, 1e-10);
  CHECK(std::abs(prof.contact_residual) <= 1e-10);
  CHECK(prof.u.back() > prof.u.front());
  for (std::size_t i = 1; i < prof.u.size(); ++i) CHECK(prof.u[i] >= prof.u[i - 1] - 1e-14);
  // wall condition
  const double pw = prof.du.back();
  CHECK(pw / std::sqrt(1.0 + pw * pw) == Catch::Approx(0.4).margin(1e-10));
}

TEST_CASE("dewetting wall lowers the profile and keeps the density above 1/e") {
  const RadialProfile prof = radial_solve(1.0, -0.4, 1e-10);
  CHECK(prof.u.back() < prof.u.front());
  for (std::size_t i = 1; i < prof.u.size(); ++i) CHECK(prof.u[i] <= prof.u[i - 1] + 1e-14);
  for (double u : prof.u) CHECK(std::exp(-u) >= std::exp(-1.0) - 1e-9);
}

TEST_CASE("halving the integrator step barely moves the center height") {
  const double tol = 1e-10;
  const RadialProfile coarse = radial_solve(1.0, 0.4, tol, 2048);
  const RadialProfile fine = radial_solve(1.0, 0.4, tol, 4096);
  CHECK(std::abs(coarse.u.front() - fine.u.front()) <= 10.0 * tol * 1e3);
}

TEST_CASE("reference minimizer finds the flat solution") {
  const Grid g = build_grid(DomainSpec::make_rectangle(1.0, 1.0), 8);
  const BoundaryData b = BoundaryData::constant(g, 0.0);
  const ScalarField v = coarse_reference_minimize(g, b);
  for (double x : v.values) CHECK(x == Catch::Approx(std::exp(-1.0)).margin(1e-6));
}

TEST_CASE("reference minimizer is insensitive to the starting point") {
  const Grid g = build_grid(DomainSpec::make_rectangle(1.0, 1.0), 8);
  const BoundaryData b = BoundaryData::constant(g, 0.25);
  const ScalarField far = ScalarField::constant(g, 10.0);
  const ScalarField a = coarse_reference_minimize(g, b);
  const ScalarField c = coarse_reference_minimize(g, b, {}, 1e-10, &far);
  const BoundaryData bd = b;
  CHECK(total_energy(a, bd, g).total == Catch::Approx(total_energy(c, bd, g).total).margin(1e-8));
}

TEST_CASE("reference minimizer agrees with the gradient solver") {
  // the acceptance suite runs the full 12x12 comparison; a 10x10 grid keeps
  // the unit suite quick
  const Grid g = build_grid(DomainSpec::make_rectangle(1.0, 1.0), 10);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  BoundaryData b = BoundaryData::constant(g, 0.0);
  for (double& beta : b.beta) beta = dist(rng);

  SolverConfig cfg;
  cfg.grad_tolerance = 1e-11;
  const MinimizeResult mr = minimize(g, b, cfg);
  REQUIRE(mr.converged);
  const ScalarField ref = coarse_reference_minimize(g, b, {}, 1e-10);

  CHECK(total_energy(mr.v_star, b, g).total ==
        Catch::Approx(total_energy(ref, b, g).total).margin(1e-8));
  double dev = 0.0;
  for (std::size_t i = 0; i < ref.values.size(); ++i)
    dev = std::max(dev, std::abs(ref.values[i] - mr.v_star.values[i]));
  CHECK(dev <= 1e-5);
}

TEST_CASE("reference minimizer refuses large grids") {
  const Grid g = build_grid(DomainSpec::make_rectangle(1.0, 1.0), 32);
  CHECK_THROWS_AS(coarse_reference_minimize(g, BoundaryData::constant(g, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("mollifier preserves constants and range") {
  const Grid g = build_grid(DomainSpec::make_disk(1.0), 16);
  const ScalarField c = ScalarField::constant(g, 0.8);
  const ScalarField mc = mollify(c, g, 3.0 * g.cell_size());
  for (double x : mc.values) CHECK(x == Catch::Approx(0.8).epsilon(1e-14));

  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> dist(0.3, 2.0);
  ScalarField v = ScalarField::constant(g, 1.0);
  for (double& x : v.values) x = dist(rng);
  double lo = v.values[0], hi = v.values[0];
  for (double x : v.values) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const ScalarField mv = mollify(v, g, 2.5 * g.cell_size());
  for (double x : mv.values) {
    CHECK(x >= lo - 1e-14);
    CHECK(x <= hi + 1e-14);
  }

  CHECK_THROWS_AS(mollify(v, g, 0.5 * g.cell_size()), std::invalid_argument);
}

TEST_CASE("radial and 2-D minimizers approach each other under refinement") {
  const RadialProfile prof = radial_solve(1.0, 0.4, 1e-11);
  double prev = -1.0;
  for (int res : {32, 64}) {
    const Grid g = build_grid(DomainSpec::make_disk(1.0), res);
    const BoundaryData b = BoundaryData::constant(g, 0.4);
    SolverConfig cfg;
    cfg.grad_tolerance = 1e-9;
    const MinimizeResult mr = minimize(g, b, cfg);
    REQUIRE(mr.converged);
    double dev = 0.0;
    for (int c = 0; c < g.inside_count(); ++c) {
      const double r = std::hypot(g.cell_x(c), g.cell_y(c));
      const double v_oracle = std::exp(-profile_value(prof, r));
      dev = std::max(dev, std::abs(v_oracle - mr.v_star.values[static_cast<std::size_t>(c)]));
    }
    if (prev >= 0.0) CHECK(dev < prev);
    prev = dev;
  }
}
