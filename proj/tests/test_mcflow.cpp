#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles/clausing.hpp"
#include "xhv/errors.hpp"
#include "xhv/geom.hpp"
#include "xhv/mcflow.hpp"
#include "xhv/rng.hpp"
#include "xhv/units.hpp"

using namespace xhv;

namespace {

// Box with uniform wall outgassing and one perfectly absorbing flush port.
Scene outgassing_box(double q_si, double port_diameter) {
  PortSpec port;
  port.diameter = port_diameter;
  port.sticking = 1.0;
  port.tag = "pump";
  BoxOptions opt;
  opt.wall_outgassing = q_si;
  return build_box({0.1, 0.1, 0.1}, {port}, opt);
}

}  // namespace

TEST_CASE("cosine emission matches the Knudsen law") {
  Prng rng(42, 0);
  const int n = 1000000;
  double sum_cos = 0;
  int above_half = 0;
  std::vector<double> phis;
  phis.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec3 d = sample_cosine_direction(rng);
    CHECK(d.z > 0.0);
    sum_cos += d.z;
    if (d.z > 0.5) ++above_half;
    phis.push_back(std::atan2(d.y, d.x));
  }
  // E[cos t] for density 2 sin t cos t is 2/3
  CHECK(sum_cos / n == doctest::Approx(2.0 / 3.0).epsilon(0.003));
  // P(cos t > 1/2) = 1 - (1/2)^2 ... CDF of cos^2 law
  CHECK(static_cast<double>(above_half) / n == doctest::Approx(0.75).epsilon(0.003));

  // Kolmogorov-Smirnov against the uniform azimuth, alpha = 0.001
  std::sort(phis.begin(), phis.end());
  double d_stat = 0;
  for (int i = 0; i < n; ++i) {
    double cdf = (phis[i] + std::numbers::pi) / (2.0 * std::numbers::pi);
    d_stat = std::max(d_stat, std::abs(cdf - (i + 1.0) / n));
    d_stat = std::max(d_stat, std::abs(cdf - static_cast<double>(i) / n));
  }
  CHECK(d_stat < 1.95 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("closed-box pressure matches the orifice-limit balance") {
  double q = 1e-12 * q_mbar_l_cm2_to_si;
  Scene s = outgassing_box(q, 0.04);
  SimConfig cfg;
  cfg.n_particles = 100000;
  cfg.seed = 3;
  SimResult r = trace(s, cfg);

  // Steady state: all generated molecules leave through the port, so the
  // port-disk pressure is Q / (A v/4); Eq. 1 with the orifice-limit speed.
  double q_total = s.total_outgassing();
  double a_port = s.group_area("pump");
  double s_orifice = mean_speed(s.gas.mass_kg, s.gas.temperature_k) / 4.0 * a_port;
  double p_expected = q_total / s_orifice;
  const auto& pump = r.groups.at("pump");
  CHECK(pump.pressure == doctest::Approx(p_expected).epsilon(0.02));
  CHECK(std::abs(pump.pressure - p_expected) < 3.0 * pump.pressure_se + 1e-18);

  // cross-check: absorbed throughput equals the generation rate
  CHECK(pump.absorbed_rate == doctest::Approx(r.generation_rate).epsilon(1e-9));
}

TEST_CASE("particle conservation is exact") {
  Scene s = outgassing_box(1e-9, 0.04);
  SimConfig cfg;
  cfg.n_particles = 20000;
  cfg.seed = 5;
  SimResult r = trace(s, cfg);
  CHECK(r.absorbed_total + r.capped + r.backside_terminated + r.leaked ==
        cfg.n_particles);
  CHECK(r.backside_terminated == 0);
  CHECK(r.leaked == 0);
  std::int64_t absorbed = 0;
  for (const auto& f : r.facets) absorbed += f.absorbed;
  CHECK(absorbed == r.absorbed_total);
}

TEST_CASE("trace error conditions") {
  SimConfig cfg;
  cfg.n_particles = 100;

  SUBCASE("no outgassing facet") {
    Scene s = outgassing_box(0.0, 0.04);
    CHECK_THROWS_AS(trace(s, cfg), SimulationError);
  }
  SUBCASE("no absorbing facet") {
    Scene s = build_box({0.1, 0.1, 0.1}, {}, {32, 0.0, 1e-9});
    CHECK_THROWS_AS(trace(s, cfg), SimulationError);
  }
  SUBCASE("bounce cap is reported, not hidden") {
    PortSpec port;
    port.diameter = 0.002;  // tiny absorber: most particles hit the cap
    port.sticking = 1.0;
    port.tag = "pump";
    BoxOptions opt;
    opt.wall_outgassing = 1e-9;
    Scene s = build_box({0.1, 0.1, 0.1}, {port}, opt);
    cfg.max_bounces = 10;
    SimResult r = trace(s, cfg);
    CHECK(r.capped > 0);
    CHECK(r.cap_warning);
    CHECK(r.absorbed_total + r.capped == cfg.n_particles);
  }
  SUBCASE("invalid config") {
    Scene s = outgassing_box(1e-9, 0.04);
    cfg.n_particles = 0;
    CHECK_THROWS_AS(trace(s, cfg), ValidationError);
  }
}

TEST_CASE("determinism across worker counts") {
  Scene s = outgassing_box(1e-9, 0.04);
  SimConfig cfg;
  cfg.n_particles = 50000;
  cfg.seed = 11;
  cfg.workers = 1;
  SimResult r1 = trace(s, cfg);
  cfg.workers = 2;
  SimResult r2 = trace(s, cfg);
  cfg.workers = 8;
  SimResult r8 = trace(s, cfg);
  REQUIRE(r1.facets.size() == r2.facets.size());
  for (size_t i = 0; i < r1.facets.size(); ++i) {
    CHECK(r1.facets[i].hits == r2.facets[i].hits);
    CHECK(r1.facets[i].hits == r8.facets[i].hits);
    CHECK(r1.facets[i].pressure == r2.facets[i].pressure);
    CHECK(r1.facets[i].pressure_se == r8.facets[i].pressure_se);
  }
  CHECK(r1.absorbed_total == r8.absorbed_total);
}

TEST_CASE("standard errors shrink like 1/sqrt(n)") {
  Scene s = outgassing_box(1e-9, 0.04);
  SimConfig cfg;
  cfg.n_particles = 40000;
  cfg.seed = 13;
  cfg.batches = 256;
  SimResult small = trace(s, cfg);
  cfg.n_particles = 160000;
  SimResult big = trace(s, cfg);
  // average the per-facet SEs: individually noisy, jointly a tight 1/sqrt(n)
  double se_small = 0, se_big = 0;
  for (const auto& f : small.facets) se_small += f.pressure_se;
  for (const auto& f : big.facets) se_big += f.pressure_se;
  CHECK(se_small / se_big == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("transmission of a short tube stays near one") {
  TubeOptions opt;
  opt.cap_near.sticking = 1.0;
  opt.cap_near.tag = "in";
  opt.cap_far.sticking = 1.0;
  opt.cap_far.tag = "out";
  Scene s = build_tube(0.1, 0.0001, opt);
  SimConfig cfg;
  cfg.n_particles = 100000;
  cfg.seed = 2;
  Transmission t = transmission_probability(s, "in", "out", cfg);
  CHECK(t.probability > 0.995);
  CHECK(t.transmitted + t.returned + t.absorbed_elsewhere + t.capped == cfg.n_particles);
}

TEST_CASE("unit-aspect tube matches the integral-equation oracle") {
  double oracle = clausing_oracle::transmission(1.0, 60, 100);
  CHECK(oracle == doctest::Approx(0.5142).epsilon(0.002));  // Clausing's value

  TubeOptions opt;
  opt.cap_near.sticking = 1.0;
  opt.cap_near.tag = "in";
  opt.cap_far.sticking = 1.0;
  opt.cap_far.tag = "out";
  Scene s = build_tube(0.1, 0.1, opt);
  SimConfig cfg;
  cfg.n_particles = 200000;
  cfg.seed = 2;
  Transmission t = transmission_probability(s, "in", "out", cfg);
  CHECK(std::abs(t.probability - oracle) < 0.01);
}

TEST_CASE("transmission ports must be disjoint") {
  TubeOptions opt;
  opt.cap_near.sticking = 1.0;
  opt.cap_near.tag = "in";
  opt.cap_far.sticking = 1.0;
  opt.cap_far.tag = "in";
  Scene s = build_tube(0.1, 0.1, opt);
  SimConfig cfg;
  cfg.n_particles = 100;
  CHECK_THROWS_AS(transmission_probability(s, "in", "in", cfg), ValidationError);
}

TEST_CASE("reciprocity between equal-area ports") {
  // asymmetric path between two equal bores on adjacent faces
  PortSpec a, b;
  a.diameter = b.diameter = 0.05;
  a.face = 0;
  a.tag = "a";
  a.stub_length = 0.04;
  b.face = 2;
  b.tag = "b";
  Scene s = build_box({0.15, 0.12, 0.1}, {a, b});
  SimConfig cfg;
  cfg.n_particles = 150000;
  cfg.seed = 17;
  Transmission ab = transmission_probability(s, "a", "b", cfg);
  Transmission ba = transmission_probability(s, "b", "a", cfg);
  double se = std::hypot(ab.std_error, ba.std_error);
  CHECK(std::abs(ab.probability - ba.probability) < 3.0 * se);
}

TEST_CASE("bare orifice pumping speed is v/4 A") {
  // 1 cm^2 absorbing port measured from the port itself
  double d = std::sqrt(4.0 * 1e-4 / std::numbers::pi);
  TubeOptions opt;
  opt.cap_near.sticking = 1.0;
  opt.cap_near.tag = "port";
  opt.cap_far.sticking = 1.0;
  opt.cap_far.tag = "sink";
  opt.wall_sticking = 1.0;
  opt.wall_tag = "sink";
  Scene s = build_tube(d, 0.05, opt);
  SimConfig cfg;
  cfg.n_particles = 100000;
  cfg.seed = 19;
  PumpingSpeed sp = effective_pumping_speed(s, "port", cfg);
  // every injected particle is absorbed by the sink wall or far cap
  CHECK(sp.capture_probability == doctest::Approx(1.0));
  CHECK(sp.speed_ls == doctest::Approx(43.9).epsilon(0.02));
}

TEST_CASE("dead pump yields a degenerate measurement error") {
  TubeOptions opt;
  opt.cap_near.sticking = 1.0;
  opt.cap_near.tag = "port";
  Scene s = build_tube(0.05, 0.05, opt);  // nothing else absorbs
  SimConfig cfg;
  cfg.n_particles = 1000;
  CHECK_THROWS_AS(effective_pumping_speed(s, "port", cfg), SimulationError);
}

TEST_CASE("sticking calibration against a flat absorber") {
  SimConfig cfg;
  cfg.n_particles = 60000;
  cfg.seed = 23;
  Scene disk = make_capsule(0.05, 0.002, 24, 1.0, "pump");
  GasModel gas;
  double area = 0;
  for (const auto& f : disk.facets) area += f.area();
  double orifice_ls = mean_speed(gas.mass_kg, gas.temperature_k) / 4.0 * area * m3s_to_ls;

  SUBCASE("half the orifice limit needs sticking one half") {
    PumpCalibration cal = calibrate_sticking(disk, orifice_ls / 2.0, gas, cfg);
    CHECK(cal.sticking == doctest::Approx(0.5).epsilon(0.05));
    CHECK(cal.achieved_speed_ls == doctest::Approx(orifice_ls / 2.0).epsilon(0.02));
  }
  SUBCASE("the full limit needs sticking near one") {
    PumpCalibration cal = calibrate_sticking(disk, 0.985 * orifice_ls, gas, cfg);
    CHECK(cal.sticking > 0.9);
  }
  SUBCASE("an unattainable speed is refused with the maximum") {
    try {
      calibrate_sticking(disk, 10.0 * orifice_ls, gas, cfg);
      FAIL("expected a calibration error");
    } catch (const SimulationError& e) {
      CHECK(std::string(e.what()).find("maximum attainable") != std::string::npos);
    }
  }
}

TEST_CASE("virtual plane does not disturb the flow") {
  double q = 1e-9;
  Scene s = outgassing_box(q, 0.04);
  SimConfig cfg;
  cfg.n_particles = 80000;
  cfg.seed = 29;
  SimResult bare = trace(s, cfg);
  Scene with_plane = outgassing_box(q, 0.04);
  append(with_plane, make_sampling_plane({0, 0, 0}, {0, 0, 1}, 0.03, "roi"));
  SimResult probed = trace(with_plane, cfg);
  CHECK(probed.groups.at("pump").pressure ==
        doctest::Approx(bare.groups.at("pump").pressure).epsilon(0.02));
  // the plane's own pressure estimate agrees with the port-balance value
  double p_port = bare.groups.at("pump").pressure;
  const auto& roi = probed.groups.at("roi");
  CHECK(roi.pressure == doctest::Approx(p_port).epsilon(0.1));
  std::int64_t crossings = 0;
  for (int i : with_plane.group("roi"))
    crossings += probed.facets[i].crossings_fwd + probed.facets[i].crossings_back;
  CHECK(crossings > 0);
}
