#pragma once

#include <array>
#include <vector>

namespace xhv::gauge {

struct GaugeTrace {
  std::vector<double> t_s;       // strictly increasing
  std::vector<double> p_mbar;    // > 0
  double emission_a = 4e-3;      // I_e
  double sensitivity_per_mbar = 1.0;

  void validate() const;
};

// Bayard-Alpert reading: P = I_c / (S I_e).
double pressure_from_current(double collector_a, double emission_a, double sensitivity_per_mbar);

// Pressure rise after the ion pump is switched off, with only the gauge
// pumping: P(t) = P_base + (Q_NG/S_g)(1 - exp(-S_g t / V)).
double predict_rise(double p_base_mbar, double q_ng_mbar_ls, double s_g_ls, double volume_l,
                    double t_s);

struct NGFitResult {
  double p_base = 0.0;   // mbar
  double q_ng = 0.0;     // mbar l/s
  double s_g = 0.0;      // l/s
  std::array<std::array<double, 3>, 3> covariance{};
  double residual_norm = 0.0;  // rms relative residual
  int iterations = 0;
  bool under_constrained = false;  // trace spans < 1 e-folding
  int samples_used = 0;
};

// Weighted (relative-error) least squares of the rise model. Samples at
// or below `clamp_pmin` (the gauge x-ray floor) are excluded.
NGFitResult fit_nongetterable(const GaugeTrace& trace, double volume_l,
                              double clamp_pmin = 1.5e-12);

// Partial pressure of non-getterable species with the ion pump running.
double ng_partial_pressure(double q_ng_mbar_ls, double pump_speed_ls);

}  // namespace xhv::gauge
