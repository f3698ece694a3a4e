#include "xhv/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "xhv/errors.hpp"

namespace xhv::gauge {

void GaugeTrace::validate() const {
  if (t_s.size() != p_mbar.size()) throw ValidationError("one pressure per timestamp required");
  if (t_s.size() < 2) throw ValidationError("trace needs at least two samples");
  for (size_t i = 1; i < t_s.size(); ++i)
    if (t_s[i] <= t_s[i - 1]) throw ValidationError("timestamps must be strictly increasing");
  for (double p : p_mbar)
    if (!(p > 0)) throw ValidationError("pressures must be positive");
  if (emission_a <= 0) throw ValidationError("emission current must be positive");
  if (sensitivity_per_mbar <= 0) throw ValidationError("gauge sensitivity must be positive");
}

double pressure_from_current(double collector_a, double emission_a, double sensitivity_per_mbar) {
  if (emission_a <= 0 || sensitivity_per_mbar <= 0)
    throw ValidationError("emission current and sensitivity must be positive");
  return collector_a / (sensitivity_per_mbar * emission_a);
}

double predict_rise(double p_base_mbar, double q_ng_mbar_ls, double s_g_ls, double volume_l,
                    double t_s) {
  if (volume_l <= 0) throw ValidationError("volume must be positive");
  if (s_g_ls <= 0) {
    // free accumulation limit: P_base + Q t / V
    return p_base_mbar + q_ng_mbar_ls * t_s / volume_l;
  }
  return p_base_mbar + q_ng_mbar_ls / s_g_ls * (1.0 - std::exp(-s_g_ls * t_s / volume_l));
}

namespace {

// Solves the 3x3 system a x = b in place; returns false when singular.
bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b,
            std::array<double, 3>& x) {
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      double f = a[r][c] / a[c][c];
      for (int k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int c = 0; c < 3; ++c) x[c] = b[c] / a[c][c];
  return true;
}

bool invert3(const std::array<std::array<double, 3>, 3>& a,
             std::array<std::array<double, 3>, 3>& inv) {
  for (int c = 0; c < 3; ++c) {
    std::array<double, 3> e{}, col{};
    e[c] = 1.0;
    if (!solve3(a, e, col)) return false;
    for (int r = 0; r < 3; ++r) inv[r][c] = col[r];
  }
  return true;
}

struct Residuals {
  double chi2 = 0.0;
  std::vector<double> r;                    // (P_i - f_i) / P_i
  std::vector<std::array<double, 3>> jac;   // d r_i / d theta
};

// theta = (P_base, Q_NG, S_g)
Residuals evaluate(const std::vector<double>& t, const std::vector<double>& p, double volume_l,
                   const std::array<double, 3>& th, bool want_jacobian) {
  Residuals out;
  out.r.resize(t.size());
  if (want_jacobian) out.jac.resize(t.size());
  double pb = th[0], q = th[1], s = th[2];
  for (size_t i = 0; i < t.size(); ++i) {
    double e = std::exp(-s * t[i] / volume_l);
    double rise = (1.0 - e) / s;
    double f = pb + q * rise;
    out.r[i] = (p[i] - f) / p[i];
    out.chi2 += out.r[i] * out.r[i];
    if (want_jacobian) {
      double df_ds = -q * rise / s + q * t[i] * e / (s * volume_l);
      out.jac[i] = {-1.0 / p[i], -rise / p[i], -df_ds / p[i]};
    }
  }
  return out;
}

}  // namespace

NGFitResult fit_nongetterable(const GaugeTrace& trace, double volume_l, double clamp_pmin) {
  trace.validate();
  if (volume_l <= 0) throw ValidationError("volume must be positive");

  // drop samples pinned at the gauge floor
  std::vector<double> t, p;
  for (size_t i = 0; i < trace.t_s.size(); ++i) {
    if (trace.p_mbar[i] > clamp_pmin) {
      t.push_back(trace.t_s[i]);
      p.push_back(trace.p_mbar[i]);
    }
  }
  if (t.size() < 4) throw ValidationError("too few samples above the gauge floor to fit");

  // initial guess: base from the minimum, asymptote from the maximum,
  // Q from the initial accumulation slope P' = Q / V
  double p_min = *std::min_element(p.begin(), p.end());
  double p_max = *std::max_element(p.begin(), p.end());
  if (p_max <= p_min) throw ValidationError("trace shows no pressure rise");
  size_t head = std::max<size_t>(2, t.size() / 5);
  double slope = (p[head - 1] - p[0]) / (t[head - 1] - t[0]);
  double q0 = std::max(slope * volume_l, (p_max - p_min) / t.back() * volume_l);
  double s0 = q0 / (p_max - p_min);
  std::array<double, 3> th = {p_min, q0, s0};

  Residuals cur = evaluate(t, p, volume_l, th, true);
  double lambda = 1e-3;
  NGFitResult res;
  std::array<std::array<double, 3>, 3> jtj{};
  for (res.iterations = 0; res.iterations < 200; ++res.iterations) {
    jtj = {};
    std::array<double, 3> jtr{};
    for (size_t i = 0; i < t.size(); ++i)
      for (int a = 0; a < 3; ++a) {
        jtr[a] += cur.jac[i][a] * cur.r[i];
        for (int b = 0; b < 3; ++b) jtj[a][b] += cur.jac[i][a] * cur.jac[i][b];
      }

    bool improved = false;
    for (int tries = 0; tries < 40 && !improved; ++tries) {
      std::array<std::array<double, 3>, 3> damped = jtj;
      for (int a = 0; a < 3; ++a) damped[a][a] *= 1.0 + lambda;
      std::array<double, 3> step{};
      if (!solve3(damped, {-jtr[0], -jtr[1], -jtr[2]}, step)) {
        lambda *= 10;
        continue;
      }
      std::array<double, 3> trial = {th[0] + step[0], th[1] + step[1], th[2] + step[2]};
      trial[1] = std::max(trial[1], 1e-300);  // Q > 0
      trial[2] = std::max(trial[2], 1e-300);  // S > 0
      Residuals next = evaluate(t, p, volume_l, trial, true);
      if (next.chi2 < cur.chi2) {
        improved = true;
        bool converged = cur.chi2 - next.chi2 < 1e-14 * (cur.chi2 + 1e-30);
        th = trial;
        cur = std::move(next);
        lambda = std::max(lambda * 0.3, 1e-12);
        if (converged) tries = 1000;  // accept and stop on the outer check
      } else {
        lambda *= 10;
      }
    }
    if (!improved) break;
    double gmax = std::max({std::abs(jtr[0]), std::abs(jtr[1]), std::abs(jtr[2])});
    if (gmax < 1e-14) break;
  }

  res.p_base = th[0];
  res.q_ng = th[1];
  res.s_g = th[2];
  res.samples_used = static_cast<int>(t.size());
  res.residual_norm = std::sqrt(cur.chi2 / t.size());

  // covariance of the relative-error fit: sigma^2 (J^T J)^-1
  double dof = std::max<double>(1.0, t.size() - 3.0);
  double sigma2 = cur.chi2 / dof;
  std::array<std::array<double, 3>, 3> inv{};
  if (invert3(jtj, inv)) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) res.covariance[a][b] = sigma2 * inv[a][b];
  }

  // fewer than one pumping e-folding observed: S and Q are degenerate
  double efolds = res.s_g * t.back() / volume_l;
  if (efolds < 1.0) {
    res.under_constrained = true;
    double widen = 1.0 / (efolds * efolds + 1e-30);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) res.covariance[a][b] *= widen;
  }
  return res;
}

double ng_partial_pressure(double q_ng_mbar_ls, double pump_speed_ls) {
  if (pump_speed_ls <= 0) throw ValidationError("pump speed must be positive");
  return q_ng_mbar_ls / pump_speed_ls;
}

}  // namespace xhv::gauge
