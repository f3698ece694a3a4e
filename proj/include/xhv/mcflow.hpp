#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xhv/geom.hpp"
#include "xhv/rng.hpp"

namespace xhv {

class Prng;

struct SimConfig {
  long n_particles = 100000;
  std::uint64_t seed = 0;
  int max_bounces = 100000;
  int workers = 1;   // 0 = hardware concurrency
  int batches = 64;  // batch-means groups for standard errors
};

struct FacetStats {
  std::int64_t hits = 0;
  std::int64_t absorbed = 0;
  std::int64_t back_hits = 0;      // geometry defect diagnostic
  std::int64_t crossings_fwd = 0;  // virtual facets only: along -normal
  std::int64_t crossings_back = 0;
  double impingement = 0.0;  // Z, m^-2 s^-1
  double pressure = 0.0;     // Pa
  double pressure_se = 0.0;
};

struct GroupStats {
  double area = 0.0;            // m^2
  std::int64_t hits = 0;
  std::int64_t absorbed = 0;
  double pressure = 0.0;        // Pa
  double pressure_se = 0.0;
  double absorbed_rate = 0.0;   // molecules/s
};

struct SimResult {
  std::vector<FacetStats> facets;
  std::map<std::string, GroupStats> groups;
  double generation_rate = 0.0;  // molecules/s
  long n_particles = 0;
  std::int64_t absorbed_total = 0;
  std::int64_t capped = 0;              // hit the bounce cap
  std::int64_t backside_terminated = 0;
  std::int64_t leaked = 0;              // escaped the geometry (defect)
  bool cap_warning = false;  // > 0.1% of particles capped
  std::uint64_t seed = 0;
};

// Cosine-law (Knudsen) direction in the local facet frame; z is the
// surface normal. Polar angle density 2 sin(t) cos(t).
Vec3 sample_cosine_direction(Prng& rng);

// Steady-state test-particle trace: emits from outgassing facets in
// proportion to q*area, follows diffuse wall reflections to absorption.
// Deterministic for fixed (scene, config) for any worker count.
SimResult trace(const Scene& scene, const SimConfig& config);

struct Transmission {
  double probability = 0.0;
  double std_error = 0.0;
  std::int64_t transmitted = 0;
  std::int64_t returned = 0;
  std::int64_t absorbed_elsewhere = 0;
  std::int64_t capped = 0;
};

// Fraction of molecules entering across `entry_tag` with cosine-law flux
// that leave across `exit_tag`.
Transmission transmission_probability(const Scene& scene,
                                      const std::string& entry_tag,
                                      const std::string& exit_tag,
                                      const SimConfig& config);

struct PumpingSpeed {
  double speed_ls = 0.0;     // l/s
  double std_error_ls = 0.0;
  double capture_probability = 0.0;
};

// Effective pumping speed seen at port `port_tag`:
// S_eff = capture_fraction * (vbar/4) * A_port.
PumpingSpeed effective_pumping_speed(const Scene& scene,
                                     const std::string& port_tag,
                                     const SimConfig& config);

struct PumpCalibration {
  double sticking = 0.0;
  double achieved_speed_ls = 0.0;
  double max_speed_ls = 0.0;
  int iterations = 0;
};

// Finds the sticking coefficient such that `pump` (a closed body scene)
// in open space absorbs `nominal_ls` of the ambient gas. Monotone
// bisection against an enclosing cosine-emitting box.
PumpCalibration calibrate_sticking(const Scene& pump, double nominal_ls,
                                   const GasModel& gas, const SimConfig& config);

}  // namespace xhv
