#include "xhv/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "xhv/errors.hpp"
#include "xhv/optim.hpp"

namespace xhv::chain {

void TrapConfig::validate() const {
  if (omega_x <= 0 || omega_y <= 0 || omega_z <= 0)
    throw ValidationError("trap frequencies must be positive");
  if (n_ions < 1) throw ValidationError("need at least one ion");
  if (n_ions > 1 && (omega_z >= omega_x || omega_z >= omega_y))
    throw ValidationError("linear-chain regime requires omega_z < omega_x, omega_y");
  if (mass_kg <= 0 || charge_c == 0) throw ValidationError("bad ion mass or charge");
}

double TrapConfig::length_scale() const {
  double coulomb = charge_c * charge_c / (4.0 * std::numbers::pi * epsilon0);
  return std::cbrt(coulomb / (mass_kg * omega_z * omega_z));
}

double TrapConfig::energy_scale() const {
  double l = length_scale();
  return mass_kg * omega_z * omega_z * l * l;
}

namespace {

// Scaled potential: positions in units of length_scale, energy in units
// of energy_scale. u = 1/2 sum(ax x^2 + ay y^2 + z^2) + sum_{i<j} 1/r_ij.
double scaled_energy_grad(const TrapConfig& cfg, const std::vector<double>& x,
                          std::vector<double>& g) {
  int n = cfg.n_ions;
  double ax = (cfg.omega_x / cfg.omega_z) * (cfg.omega_x / cfg.omega_z);
  double ay = (cfg.omega_y / cfg.omega_z) * (cfg.omega_y / cfg.omega_z);
  double u = 0.0;
  std::fill(g.begin(), g.end(), 0.0);
  for (int i = 0; i < n; ++i) {
    double xi = x[3 * i], yi = x[3 * i + 1], zi = x[3 * i + 2];
    u += 0.5 * (ax * xi * xi + ay * yi * yi + zi * zi);
    g[3 * i] += ax * xi;
    g[3 * i + 1] += ay * yi;
    g[3 * i + 2] += zi;
    for (int j = i + 1; j < n; ++j) {
      double dx = xi - x[3 * j], dy = yi - x[3 * j + 1], dz = zi - x[3 * j + 2];
      double r2 = dx * dx + dy * dy + dz * dz;
      double r = std::sqrt(r2);
      u += 1.0 / r;
      double f = 1.0 / (r2 * r);
      g[3 * i] -= dx * f;
      g[3 * i + 1] -= dy * f;
      g[3 * i + 2] -= dz * f;
      g[3 * j] += dx * f;
      g[3 * j + 1] += dy * f;
      g[3 * j + 2] += dz * f;
    }
  }
  return u;
}

LbfgsResult minimize_scaled(const TrapConfig& cfg, std::vector<double> x0) {
  LbfgsOptions opt;
  opt.grad_tolerance = 1e-12;
  opt.max_iterations = 20000;
  auto fn = [&cfg](const std::vector<double>& x, std::vector<double>& g) {
    return scaled_energy_grad(cfg, x, g);
  };
  LbfgsResult r = lbfgs_minimize(fn, std::move(x0), opt);
  if (!r.converged)
    throw SimulationError("chain energy minimization did not converge; residual gradient " +
                          std::to_string(r.grad_norm));
  return r;
}

std::vector<double> initial_linear_chain(int n) {
  // Uniform axial spacing seeds the quasi-Newton solve; the spacing value
  // only needs the right order of magnitude.
  std::vector<double> x(3 * n, 0.0);
  double spacing = 2.0 * std::pow(std::max(n, 2), -0.56) * 1.3;
  for (int i = 0; i < n; ++i) x[3 * i + 2] = (i - 0.5 * (n - 1)) * spacing;
  return x;
}

}  // namespace

double energy_and_gradient(const TrapConfig& cfg, const std::vector<Vec3>& positions,
                           std::vector<Vec3>* grad) {
  cfg.validate();
  if (static_cast<int>(positions.size()) != cfg.n_ions)
    throw ValidationError("positions size must equal the ion count");
  double l = cfg.length_scale();
  double e0 = cfg.energy_scale();
  std::vector<double> x(3 * cfg.n_ions), g(3 * cfg.n_ions);
  for (int i = 0; i < cfg.n_ions; ++i) {
    x[3 * i] = positions[i].x / l;
    x[3 * i + 1] = positions[i].y / l;
    x[3 * i + 2] = positions[i].z / l;
  }
  double u = scaled_energy_grad(cfg, x, g);
  if (grad) {
    grad->resize(cfg.n_ions);
    for (int i = 0; i < cfg.n_ions; ++i)
      (*grad)[i] = Vec3{g[3 * i], g[3 * i + 1], g[3 * i + 2]} * (e0 / l);
  }
  return u * e0;
}

ChainState equilibrium(const TrapConfig& cfg) {
  cfg.validate();
  if (cfg.n_ions == 1) return {{Vec3{0, 0, 0}}, 0.0, 0.0};
  LbfgsResult r = minimize_scaled(cfg, initial_linear_chain(cfg.n_ions));
  double l = cfg.length_scale();
  ChainState st;
  st.energy_j = r.f * cfg.energy_scale();
  st.grad_norm = r.grad_norm;
  st.positions.resize(cfg.n_ions);
  for (int i = 0; i < cfg.n_ions; ++i)
    st.positions[i] = Vec3{r.x[3 * i], r.x[3 * i + 1], r.x[3 * i + 2]} * l;
  std::sort(st.positions.begin(), st.positions.end(),
            [](const Vec3& a, const Vec3& b) { return a.z < b.z; });
  return st;
}

double barrier_energy(const TrapConfig& cfg, int pair) {
  cfg.validate();
  int n = cfg.n_ions;
  if (pair < 0 || pair >= n - 1) throw ValidationError("pair index out of range");
  ChainState eq = equilibrium(cfg);
  double l = cfg.length_scale();

  // Constrained problem: ions `pair` and `pair`+1 share one z variable.
  // Variable layout: 3 per free ion, then (xa, ya, xb, yb, z_shared).
  int a = pair, b = pair + 1;
  std::vector<int> free_ions;
  for (int i = 0; i < n; ++i)
    if (i != a && i != b) free_ions.push_back(i);
  int nf = static_cast<int>(free_ions.size());

  auto pack = [&](const std::vector<double>& v, std::vector<double>& full) {
    for (int k = 0; k < nf; ++k)
      for (int c = 0; c < 3; ++c) full[3 * free_ions[k] + c] = v[3 * k + c];
    full[3 * a] = v[3 * nf];
    full[3 * a + 1] = v[3 * nf + 1];
    full[3 * b] = v[3 * nf + 2];
    full[3 * b + 1] = v[3 * nf + 3];
    full[3 * a + 2] = full[3 * b + 2] = v[3 * nf + 4];
  };

  std::vector<double> full(3 * n), gfull(3 * n);
  auto fn = [&](const std::vector<double>& v, std::vector<double>& g) {
    pack(v, full);
    double u = scaled_energy_grad(cfg, full, gfull);
    for (int k = 0; k < nf; ++k)
      for (int c = 0; c < 3; ++c) g[3 * k + c] = gfull[3 * free_ions[k] + c];
    g[3 * nf] = gfull[3 * a];
    g[3 * nf + 1] = gfull[3 * a + 1];
    g[3 * nf + 2] = gfull[3 * b];
    g[3 * nf + 3] = gfull[3 * b + 1];
    g[3 * nf + 4] = gfull[3 * a + 2] + gfull[3 * b + 2];
    return u;
  };

  // Start from the equilibrium with the pair at its z midpoint, displaced
  // +-10 nm along the softer radial axis to break the radial symmetry.
  double delta = 10e-9 / l;
  bool soft_y = cfg.omega_y <= cfg.omega_x;
  std::vector<double> v0(3 * nf + 5, 0.0);
  for (int k = 0; k < nf; ++k) {
    const Vec3& p = eq.positions[free_ions[k]];
    v0[3 * k] = p.x / l;
    v0[3 * k + 1] = p.y / l;
    v0[3 * k + 2] = p.z / l;
  }
  double zm = 0.5 * (eq.positions[a].z + eq.positions[b].z) / l;
  v0[3 * nf + 0] = eq.positions[a].x / l + (soft_y ? 0.0 : delta);
  v0[3 * nf + 1] = eq.positions[a].y / l + (soft_y ? delta : 0.0);
  v0[3 * nf + 2] = eq.positions[b].x / l - (soft_y ? 0.0 : delta);
  v0[3 * nf + 3] = eq.positions[b].y / l - (soft_y ? delta : 0.0);
  v0[3 * nf + 4] = zm;

  LbfgsOptions opt;
  opt.grad_tolerance = 1e-12;
  opt.max_iterations = 20000;
  LbfgsResult r = lbfgs_minimize(fn, std::move(v0), opt);
  if (!r.converged)
    throw SimulationError("constrained chain minimization did not converge; residual gradient " +
                          std::to_string(r.grad_norm));

  double delta_u = r.f * cfg.energy_scale() - eq.energy_j;
  return delta_u / ev_to_joule;
}

BarrierProfile barrier_profile(const TrapConfig& cfg) {
  BarrierProfile prof;
  prof.barrier_ev.resize(cfg.n_ions - 1);
  for (int i = 0; i < cfg.n_ions - 1; ++i) prof.barrier_ev[i] = barrier_energy(cfg, i);
  auto it = std::max_element(prof.barrier_ev.begin(), prof.barrier_ev.end());
  prof.max_ev = *it;
  prof.argmax = static_cast<int>(it - prof.barrier_ev.begin());
  return prof;
}

double p_obs(int total_ions, int dark_ions) {
  if (dark_ions < 0 || total_ions < 0 || dark_ions > total_ions)
    throw ValidationError("need 0 <= dark ions <= total ions");
  // 1 - 1/binomial(N, n), evaluated in log space
  double log_inv = std::lgamma(dark_ions + 1.0) + std::lgamma(total_ions - dark_ions + 1.0) -
                   std::lgamma(total_ions + 1.0);
  return 1.0 - std::exp(log_inv);
}

double p_reorder(double barrier_ev, double mean_transfer_ev) {
  if (barrier_ev < 0 || mean_transfer_ev <= 0)
    throw ValidationError("barrier must be >= 0 and mean transfer > 0");
  // Maxwell-Boltzmann: <E> = 3/2 kT, tail = regularized Q(3/2, Eb/kT)
  double kt = 2.0 / 3.0 * mean_transfer_ev;
  double xx = barrier_ev / kt;
  double sx = std::sqrt(xx);
  return std::erfc(sx) + 2.0 / std::sqrt(std::numbers::pi) * sx * std::exp(-xx);
}

double langevin_rate_coefficient(const CollisionModel& model) {
  return model.ion_charge_c *
         std::sqrt(std::numbers::pi * model.polarizability_m3 /
                   (model.reduced_mass_kg * epsilon0));
}

PressureEstimate pressure_from_rate(double observed_rate, const ChainObservation& obs,
                                    const CollisionModel& model, double barrier_ev) {
  if (observed_rate < 0) throw ValidationError("observed rate must be >= 0");
  PressureEstimate est;
  est.p_obs = p_obs(obs.total_ions, obs.dark_ions);
  est.p_reorder = p_reorder(barrier_ev, model.mean_transfer_ev);
  est.collision_rate = observed_rate / (est.p_obs * est.p_reorder);
  double per_ion_rate = est.collision_rate / obs.total_ions;
  double n_density = per_ion_rate / langevin_rate_coefficient(model);
  est.pressure_mbar = n_density * k_boltzmann * model.temperature_k * pa_to_mbar;
  est.per_ion_interval_hr =
      est.collision_rate > 0 ? obs.total_ions / est.collision_rate / 3600.0
                             : std::numeric_limits<double>::infinity();
  return est;
}

double rate_from_pressure(double pressure_mbar, const ChainObservation& obs,
                          const CollisionModel& model, double barrier_ev) {
  double n_density = pressure_mbar * mbar_to_pa / (k_boltzmann * model.temperature_k);
  double per_ion_rate = n_density * langevin_rate_coefficient(model);
  return per_ion_rate * obs.total_ions * p_obs(obs.total_ions, obs.dark_ions) *
         p_reorder(barrier_ev, model.mean_transfer_ev);
}

double pressure_from_interval(double hours_per_ion, const CollisionModel& model) {
  if (hours_per_ion <= 0) throw ValidationError("interval must be positive");
  double per_ion_rate = 1.0 / (hours_per_ion * 3600.0);
  double n_density = per_ion_rate / langevin_rate_coefficient(model);
  return n_density * k_boltzmann * model.temperature_k * pa_to_mbar;
}

}  // namespace xhv::chain
