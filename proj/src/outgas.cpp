#include "xhv/outgas.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "xhv/errors.hpp"
#include "xhv/units.hpp"

namespace xhv::outgas {

double diffusion_coefficient(double temperature_k, double d0_cm2s, double ea_ev) {
  if (temperature_k <= 0) throw ValidationError("temperature must be positive");
  return d0_cm2s * std::exp(-ea_ev / (k_boltzmann_ev * temperature_k));
}

namespace {

// q given the accumulated thermal diffusion time theta = integral(D dt).
SeriesValue series_q(const MaterialSlab& slab, double d_now, double theta, int n_terms) {
  constexpr double rel_cutoff = 1e-6;
  constexpr int hard_cap = 10000;
  double l2 = slab.thickness_cm * slab.thickness_cm;
  double prefactor = 4.0 * d_now / slab.thickness_cm * slab.c0;
  double a = std::numbers::pi * std::numbers::pi * theta / l2;

  SeriesValue out;
  double sum = 0.0;
  int cap = n_terms > 0 ? n_terms : hard_cap;
  int n = 0;
  double term = 0.0;
  for (; n < cap; ++n) {
    double k = 2.0 * n + 1.0;
    term = std::exp(-k * k * a);
    sum += term;
    if (n_terms == 0 && term < rel_cutoff * sum) {
      ++n;
      break;
    }
  }
  // Tail bound: terms decrease faster than exp(-4a(2n+1)) from term n on,
  // so the remainder is below term / (exp(4a(2n+1)) - 1); at a = 0 the
  // series diverges and no finite bound exists.
  double k_next = 2.0 * n + 1.0;
  double decay = std::exp(-4.0 * a * k_next);
  out.remainder_bound =
      decay < 1.0 ? prefactor * term * decay / (1.0 - decay)
                  : std::numeric_limits<double>::infinity();
  out.q = prefactor * sum;
  out.terms_used = n;
  return out;
}

}  // namespace

SeriesValue outgassing_rate(const MaterialSlab& slab, double temperature_k, double time_s,
                            int n_terms) {
  if (time_s < 0) throw ValidationError("time must be >= 0");
  if (n_terms < 0) throw ValidationError("n_terms must be >= 0");
  double d = diffusion_coefficient(temperature_k, slab.d0_cm2s, slab.ea_ev);
  return series_q(slab, d, d * time_s, n_terms);
}

double decay_constant(const MaterialSlab& slab, double temperature_k) {
  double d = diffusion_coefficient(temperature_k, slab.d0_cm2s, slab.ea_ev);
  return slab.thickness_cm * slab.thickness_cm / (std::numbers::pi * std::numbers::pi * d);
}

double rt_ht_ratio(double t_rt_k, double t_ht_k, double d0_cm2s, double ea_ev) {
  return diffusion_coefficient(t_rt_k, d0_cm2s, ea_ev) /
         diffusion_coefficient(t_ht_k, d0_cm2s, ea_ev);
}

double target_ht_pressure(double q_rt_target, double area_cm2, double speed_ls, double t_rt_k,
                          double t_ht_k, double d0_cm2s, double ea_ev) {
  if (q_rt_target <= 0 || area_cm2 <= 0 || speed_ls <= 0)
    throw ValidationError("all inputs must be positive");
  return q_rt_target * area_cm2 / speed_ls / rt_ht_ratio(t_rt_k, t_ht_k, d0_cm2s, ea_ev);
}

double estimate_q_rt(double p_ht_mbar, double area_cm2, double speed_ls, double t_rt_k,
                     double t_ht_k, double oxide_factor, double d0_cm2s, double ea_ev) {
  if (p_ht_mbar <= 0 || area_cm2 <= 0 || speed_ls <= 0 || oxide_factor <= 0)
    throw ValidationError("all inputs must be positive");
  return p_ht_mbar * speed_ls / area_cm2 * rt_ht_ratio(t_rt_k, t_ht_k, d0_cm2s, ea_ev) /
         oxide_factor;
}

std::vector<BakeRow> bake_plan(const MaterialSlab& slab, const BakeSchedule& schedule,
                               int samples_per_segment) {
  if (samples_per_segment < 1) throw ValidationError("samples_per_segment must be >= 1");
  std::vector<BakeRow> rows;
  double t = 0.0, theta = 0.0;
  for (const auto& seg : schedule.segments) {
    if (seg.temperature_k <= 0 || seg.duration_s <= 0)
      throw ValidationError("bake segments need positive temperature and duration");
    double d = diffusion_coefficient(seg.temperature_k, slab.d0_cm2s, slab.ea_ev);
    for (int i = 1; i <= samples_per_segment; ++i) {
      double dt = seg.duration_s * i / samples_per_segment;
      SeriesValue v = series_q(slab, d, theta + d * dt, 0);
      rows.push_back({t + dt, seg.temperature_k, v.q,
                      v.q * schedule.area_cm2 / schedule.pumping_speed_ls});
    }
    theta += d * seg.duration_s;
    t += seg.duration_s;
  }
  return rows;
}

}  // namespace xhv::outgas
