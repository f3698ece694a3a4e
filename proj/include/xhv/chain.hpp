#pragma once

#include <vector>

#include "xhv/geom.hpp"
#include "xhv/units.hpp"

namespace xhv::chain {

struct TrapConfig {
  double omega_x = 0.0, omega_y = 0.0, omega_z = 0.0;  // rad/s
  int n_ions = 1;
  double mass_kg = 170.936 * amu;   // 171Yb+
  double charge_c = elementary_charge;

  void validate() const;  // linear-chain regime: omega_z < omega_x, omega_y
  // Natural length scale (Q^2 / (4 pi eps0 m omega_z^2))^(1/3), m.
  double length_scale() const;
  double energy_scale() const;  // m omega_z^2 l^2, J
};

struct ChainState {
  std::vector<Vec3> positions;  // m, ordered by z
  double energy_j = 0.0;
  double grad_norm = 0.0;       // scaled units, at convergence
};

// Total potential (harmonic + Coulomb) and gradient at arbitrary
// positions, SI units. Exposed for finite-difference checks.
double energy_and_gradient(const TrapConfig& cfg, const std::vector<Vec3>& positions,
                           std::vector<Vec3>* grad);

// Minimum-energy configuration of the chain.
ChainState equilibrium(const TrapConfig& cfg);

// Energy cost of forcing ions `pair` and `pair`+1 (0-based) to a common
// axial position, relative to the unconstrained minimum. eV.
double barrier_energy(const TrapConfig& cfg, int pair);

struct BarrierProfile {
  std::vector<double> barrier_ev;  // one entry per neighbor pair
  double max_ev = 0.0;
  int argmax = 0;
};

BarrierProfile barrier_profile(const TrapConfig& cfg);

// Probability that a reorder of an N-ion chain with n dark ions changes
// the camera image: 1 - n!(N-n)!/N!.
double p_obs(int total_ions, int dark_ions);

// Probability that a thermal collision transfers more than `barrier_ev`,
// for a Maxwell-Boltzmann energy distribution with mean `mean_transfer_ev`.
double p_reorder(double barrier_ev, double mean_transfer_ev);

struct CollisionModel {
  double polarizability_m3 = 8.06e-31;   // H2
  double reduced_mass_kg = 3.35e-27;     // ~ m(H2)
  double temperature_k = 293.0;
  double mean_transfer_ev = 8.7e-4;      // <dE> per elastic collision
  double ion_charge_c = elementary_charge;
};

struct ChainObservation {
  int total_ions = 0;
  int dark_ions = 0;
  long events = 0;
  double total_time_s = 0.0;
};

// Langevin rate coefficient Q sqrt(pi alpha / (mu eps0)), m^3/s.
double langevin_rate_coefficient(const CollisionModel& model);

struct PressureEstimate {
  double pressure_mbar = 0.0;
  double collision_rate = 0.0;        // corrected chain-level rate, 1/s
  double per_ion_interval_hr = 0.0;   // N / collision_rate
  double p_obs = 0.0;
  double p_reorder = 0.0;
};

// Inverts the Langevin relation: observed chain reorder rate -> pressure.
PressureEstimate pressure_from_rate(double observed_rate, const ChainObservation& obs,
                                    const CollisionModel& model, double barrier_ev);

// Forward direction (pressure -> observable reorder rate); inverse of the
// above to numerical precision.
double rate_from_pressure(double pressure_mbar, const ChainObservation& obs,
                          const CollisionModel& model, double barrier_ev);

// Pressure from the corrected per-ion collision interval (hrs/ion).
double pressure_from_interval(double hours_per_ion, const CollisionModel& model);

}  // namespace xhv::chain
