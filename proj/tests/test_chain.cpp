#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "xhv/chain.hpp"
#include "xhv/errors.hpp"
#include "xhv/units.hpp"

using namespace xhv;
using namespace xhv::chain;

namespace {

TrapConfig paper_trap(int n = 20) {
  TrapConfig cfg;
  cfg.omega_x = 2 * std::numbers::pi * 1.06e6;
  cfg.omega_y = 2 * std::numbers::pi * 1.04e6;
  cfg.omega_z = 2 * std::numbers::pi * 0.116e6;
  cfg.n_ions = n;
  return cfg;
}

// Reference tail probability of the Maxwell-Boltzmann energy distribution
// f(x) = 2/sqrt(pi) sqrt(x) e^{-x}, x = E/kT: adaptive Simpson for the
// head integral, complement for the tail.
double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double mb_density(double x) {
  return 2.0 / std::sqrt(std::numbers::pi) * std::sqrt(x) * std::exp(-x);
}

double adaptive(double a, double b, double fa, double fm, double fb, double whole,
                double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = mb_density(lm), frm = mb_density(rm);
  double left = simpson(a, m, fa, flm, fm);
  double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double mb_tail_oracle(double x_b) {
  if (x_b <= 0) return 1.0;
  double fa = mb_density(0), fm = mb_density(0.5 * x_b), fb = mb_density(x_b);
  double whole = simpson(0, x_b, fa, fm, fb);
  double head = adaptive(0, x_b, fa, fm, fb, whole, 1e-10, 40);
  return 1.0 - head;
}

}  // namespace

TEST_CASE("single ion sits at the origin with zero energy") {
  TrapConfig cfg = paper_trap(1);
  ChainState st = equilibrium(cfg);
  REQUIRE(st.positions.size() == 1);
  CHECK(norm(st.positions[0]) == doctest::Approx(0.0));
  CHECK(st.energy_j == doctest::Approx(0.0));
}

TEST_CASE("two-ion spacing matches the closed form") {
  TrapConfig cfg = paper_trap(2);
  ChainState st = equilibrium(cfg);
  REQUIRE(st.positions.size() == 2);
  double d = st.positions[1].z - st.positions[0].z;
  double q = cfg.charge_c;
  double expected =
      std::cbrt(q * q / (2.0 * std::numbers::pi * epsilon0 * cfg.mass_kg *
                         cfg.omega_z * cfg.omega_z));
  CHECK(d == doctest::Approx(expected).epsilon(1e-8));
  // symmetric about the origin, no radial displacement
  CHECK(st.positions[0].z == doctest::Approx(-st.positions[1].z).epsilon(1e-8));
  CHECK(std::abs(st.positions[0].x) < 1e-12 * expected);
  CHECK(std::abs(st.positions[0].y) < 1e-12 * expected);
}

TEST_CASE("twenty-ion equilibrium is a z-ordered linear chain") {
  TrapConfig cfg = paper_trap();
  ChainState st = equilibrium(cfg);
  REQUIRE(st.positions.size() == 20);
  double length = st.positions.back().z - st.positions.front().z;
  CHECK(length > 0);
  double min_dz = 1e300;
  int min_at = -1;
  for (int i = 0; i + 1 < 20; ++i) {
    double dz = st.positions[i + 1].z - st.positions[i].z;
    CHECK(dz > 0);  // sorted and non-degenerate
    if (dz < min_dz) {
      min_dz = dz;
      min_at = i;
    }
  }
  // densest near the center, radial excursions negligible
  CHECK(min_at >= 8);
  CHECK(min_at <= 10);
  for (const auto& p : st.positions) {
    CHECK(std::abs(p.x) < 1e-9 * length);
    CHECK(std::abs(p.y) < 1e-9 * length);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  TrapConfig cfg = paper_trap(5);
  ChainState st = equilibrium(cfg);
  // displace off equilibrium so the gradient is nonzero
  std::vector<Vec3> pos = st.positions;
  double l = cfg.length_scale();
  for (size_t i = 0; i < pos.size(); ++i) {
    pos[i].x += 0.013 * l * (i % 3 == 0 ? 1 : -1);
    pos[i].y += 0.007 * l * (i % 2 == 0 ? 1 : -1);
    pos[i].z += 0.011 * l * (i % 2 == 0 ? -1 : 1);
  }
  std::vector<Vec3> grad;
  energy_and_gradient(cfg, pos, &grad);
  double h = 1e-7 * l;
  for (size_t i = 0; i < pos.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      std::vector<Vec3> plus = pos, minus = pos;
      double* pp = c == 0 ? &plus[i].x : c == 1 ? &plus[i].y : &plus[i].z;
      double* pm = c == 0 ? &minus[i].x : c == 1 ? &minus[i].y : &minus[i].z;
      *pp += h;
      *pm -= h;
      double fd = (energy_and_gradient(cfg, plus, nullptr) -
                   energy_and_gradient(cfg, minus, nullptr)) /
                  (2 * h);
      double g = c == 0 ? grad[i].x : c == 1 ? grad[i].y : grad[i].z;
      CHECK(g == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("two-ion barrier matches a direct one-dimensional minimization") {
  TrapConfig cfg = paper_trap(2);
  double got = barrier_energy(cfg, 0);

  // With both ions at one z, symmetry puts them at (0, +-y, 0) along the
  // softer radial axis; scaled energy u(y) = a_y y^2 + 1/(2y).
  double ay = (cfg.omega_y / cfg.omega_z) * (cfg.omega_y / cfg.omega_z);
  double lo = 1e-4, hi = 10.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto u = [&](double y) { return ay * y * y + 0.5 / y; };
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    if (u(c) < u(d)) hi = d; else lo = c;
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
  }
  double u_top = u(0.5 * (lo + hi));
  double u_eq = std::pow(2.0, 2.0 / 3.0) / 4.0 + std::pow(2.0, -1.0 / 3.0);
  double expected = (u_top - u_eq) * cfg.energy_scale() / ev_to_joule;
  CHECK(got == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("twenty-ion barrier profile peaks at the chain ends") {
  TrapConfig cfg = paper_trap();
  BarrierProfile prof = barrier_profile(cfg);
  REQUIRE(prof.barrier_ev.size() == 19);
  CHECK(prof.max_ev * 1e3 == doctest::Approx(0.35).epsilon(0.06));
  CHECK((prof.argmax == 0 || prof.argmax == 18));
  // mirror symmetry of the trap implies a symmetric profile
  for (int i = 0; i < 19; ++i) {
    CHECK(prof.barrier_ev[i] > 0);
    CHECK(prof.barrier_ev[i] ==
          doctest::Approx(prof.barrier_ev[18 - i]).epsilon(0.01));
  }
  // barriers grow from the soft center toward the stiff ends
  CHECK(prof.barrier_ev[9] < prof.barrier_ev[0]);
}

TEST_CASE("observable-fraction combinatorics") {
  CHECK(p_obs(20, 3) == doctest::Approx(1.0 - 1.0 / 1140.0).epsilon(1e-12));
  CHECK(p_obs(4, 2) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(p_obs(20, 0) == doctest::Approx(0.0));
  CHECK(p_obs(20, 20) == doctest::Approx(0.0));
  CHECK_THROWS_AS(p_obs(3, 4), ValidationError);
  CHECK_THROWS_AS(p_obs(3, -1), ValidationError);
}

TEST_CASE("thermal hop probability matches the energy-tail integral") {
  // paper-scale inputs: 0.35 meV barrier, 0.87 meV mean transfer
  double p = p_reorder(0.35e-3, 0.87e-3);
  CHECK(p == doctest::Approx(0.75).epsilon(0.015));

  // closed form vs independent adaptive quadrature of the tail
  for (double eb : {0.05e-3, 0.2e-3, 0.35e-3, 1.0e-3, 3.0e-3}) {
    double kt = 2.0 / 3.0 * 0.87e-3;
    CHECK(p_reorder(eb, 0.87e-3) ==
          doctest::Approx(mb_tail_oracle(eb / kt)).epsilon(1e-6));
  }

  CHECK(p_reorder(0.0, 0.87e-3) == doctest::Approx(1.0));
  // monotone: higher barrier less likely, warmer collisions more likely
  CHECK(p_reorder(0.5e-3, 0.87e-3) < p_reorder(0.3e-3, 0.87e-3));
  CHECK(p_reorder(0.35e-3, 1.2e-3) > p_reorder(0.35e-3, 0.87e-3));
  CHECK_THROWS_AS(p_reorder(-1.0, 0.87e-3), ValidationError);
  CHECK_THROWS_AS(p_reorder(0.1e-3, 0.0), ValidationError);
}

TEST_CASE("Langevin rate coefficient for H2 on Yb+") {
  CollisionModel model;
  CHECK(langevin_rate_coefficient(model) == doctest::Approx(1.48e-15).epsilon(0.01));
}

TEST_CASE("rate-to-pressure inversion round-trips") {
  CollisionModel model;
  ChainObservation obs;
  obs.total_ions = 20;
  obs.dark_ions = 3;
  double eb = 0.35e-3;

  double p0 = 4.0e-12;
  double rate = rate_from_pressure(p0, obs, model, eb);
  PressureEstimate est = pressure_from_rate(rate, obs, model, eb);
  CHECK(est.pressure_mbar == doctest::Approx(p0).epsilon(1e-12));
  CHECK(est.p_obs == doctest::Approx(p_obs(20, 3)).epsilon(1e-12));
  CHECK(est.p_reorder == doctest::Approx(p_reorder(eb, model.mean_transfer_ev)).epsilon(1e-12));
  CHECK(est.per_ion_interval_hr ==
        doctest::Approx(obs.total_ions / est.collision_rate / 3600.0).epsilon(1e-12));

  // linear in the observed rate
  PressureEstimate est2 = pressure_from_rate(2.0 * rate, obs, model, eb);
  CHECK(est2.pressure_mbar == doctest::Approx(2.0 * p0).epsilon(1e-12));

  // zero rate: zero pressure, unbounded interval
  PressureEstimate zero = pressure_from_rate(0.0, obs, model, eb);
  CHECK(zero.pressure_mbar == doctest::Approx(0.0));
  CHECK(std::isinf(zero.per_ion_interval_hr));
}

TEST_CASE("per-ion collision interval maps to pressure") {
  CollisionModel model;
  double p = pressure_from_interval(1.9, model);
  CHECK(p == doctest::Approx(3.9e-12).epsilon(0.1));
  // inverse proportionality
  CHECK(pressure_from_interval(3.8, model) == doctest::Approx(p / 2).epsilon(1e-12));
  CHECK_THROWS_AS(pressure_from_interval(0.0, model), ValidationError);
}

TEST_CASE("trap configuration validation") {
  TrapConfig bad = paper_trap(2);
  bad.omega_z = bad.omega_x * 2;  // not a linear chain
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = paper_trap(0);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = paper_trap(2);
  bad.omega_y = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
