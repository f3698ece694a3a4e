#pragma once

#include <vector>

namespace xhv::outgas {

// Diffusion-limited hydrogen outgassing from a metal slab. This module
// works in the customary bench units: cm, s, eV, mbar l.

struct MaterialSlab {
  double thickness_cm = 2.54;
  double c0 = 1.0;              // dissolved H2 concentration, mbar l cm^-3
  double d0_cm2s = 4.7e-3;      // Arrhenius prefactor
  double ea_ev = 0.56;          // activation energy
};

// D(T) = D0 exp(-Ea / kB T), cm^2/s.
double diffusion_coefficient(double temperature_k, double d0_cm2s = 4.7e-3,
                             double ea_ev = 0.56);

struct SeriesValue {
  double q = 0.0;               // mbar l s^-1 cm^-2
  double remainder_bound = 0.0; // bound on the truncated tail, same units
  int terms_used = 0;
};

// Truncated outgassing series. n_terms = 0 selects adaptive truncation
// (relative term cutoff 1e-6, hard cap 10000 terms).
SeriesValue outgassing_rate(const MaterialSlab& slab, double temperature_k,
                            double time_s, int n_terms = 0);

// Slowest-mode decay constant L^2 / (pi^2 D), seconds.
double decay_constant(const MaterialSlab& slab, double temperature_k);

// q_RT / q_HT = D(T_RT) / D(T_HT) at frozen concentration.
double rt_ht_ratio(double t_rt_k, double t_ht_k, double d0_cm2s = 4.7e-3,
                   double ea_ev = 0.56);

// Pressure to observe at the end of the heat treatment so that the
// room-temperature target q_RT is met: P_HT = (q_RT A / S) D(HT)/D(RT).
double target_ht_pressure(double q_rt_target, double area_cm2, double speed_ls,
                          double t_rt_k, double t_ht_k, double d0_cm2s = 4.7e-3,
                          double ea_ev = 0.56);

// Inverse direction: bound q_RT from the measured hot pressure, with the
// oxide-layer reduction factor from the air bake.
double estimate_q_rt(double p_ht_mbar, double area_cm2, double speed_ls,
                     double t_rt_k, double t_ht_k, double oxide_factor = 2.0,
                     double d0_cm2s = 4.7e-3, double ea_ev = 0.56);

struct BakeSegment {
  double temperature_k = 673.0;
  double duration_s = 0.0;
};

struct BakeSchedule {
  std::vector<BakeSegment> segments;
  double pumping_speed_ls = 100.0;  // during the bake
  double area_cm2 = 1000.0;         // exposed surface
};

struct BakeRow {
  double time_s = 0.0;
  double temperature_k = 0.0;
  double q = 0.0;        // mbar l s^-1 cm^-2
  double pressure = 0.0; // mbar, q A / S
};

// Evaluates the outgassing series along a temperature schedule using the
// accumulated thermal diffusion time integral(D dt).
std::vector<BakeRow> bake_plan(const MaterialSlab& slab, const BakeSchedule& schedule,
                               int samples_per_segment = 24);

}  // namespace xhv::outgas
