#include "xhv/optim.hpp"

#include <cmath>
#include <deque>

namespace xhv {

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, std::vector<double> x0,
                           const LbfgsOptions& opt) {
  const size_t n = x0.size();
  const double c1 = 1e-4, c2 = 0.9;

  LbfgsResult res;
  std::vector<double> x = std::move(x0), g(n), xn(n), gn(n);
  double f = fn(x, g);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    double gnorm = inf_norm(g);
    if (gnorm <= opt.grad_tolerance) {
      res.converged = true;
      res.iterations = iter;
      break;
    }
    // two-loop recursion
    std::vector<double> q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * dotv(s_hist[i], q);
      for (size_t j = 0; j < n; ++j) q[j] -= alpha[i] * y_hist[i][j];
    }
    if (!y_hist.empty()) {
      double gamma = dotv(s_hist.back(), y_hist.back()) / dotv(y_hist.back(), y_hist.back());
      for (size_t j = 0; j < n; ++j) q[j] *= gamma;
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      double beta = rho_hist[i] * dotv(y_hist[i], q);
      for (size_t j = 0; j < n; ++j) q[j] += (alpha[i] - beta) * s_hist[i][j];
    }
    std::vector<double> d(n);
    for (size_t j = 0; j < n; ++j) d[j] = -q[j];
    double dg = dotv(d, g);
    if (dg >= 0) {  // not a descent direction: restart with steepest descent
      for (size_t j = 0; j < n; ++j) d[j] = -g[j];
      dg = -dotv(g, g);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Wolfe line search by bisection/expansion. Near the minimum the
    // predicted decrease falls below floating-point resolution of f; the
    // eps_f slack keeps the (accurate) quasi-Newton steps acceptable.
    double lo = 0, hi = 0, step = 1.0;
    double eps_f = 1e-15 * (std::abs(f) + 1.0);
    double fn_val = f;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (size_t j = 0; j < n; ++j) xn[j] = x[j] + step * d[j];
      fn_val = fn(xn, gn);
      if (!(fn_val <= f + c1 * step * dg + eps_f)) {
        hi = step;
        step = 0.5 * (lo + hi);
        continue;
      }
      double dgn = dotv(d, gn);
      if (std::abs(step * dg) > eps_f && dgn < c2 * dg) {
        lo = step;
        step = hi > 0 ? 0.5 * (lo + hi) : 2.0 * step;
        continue;
      }
      ok = true;
      break;
    }
    if (!ok && !(fn_val < f)) {
      res.iterations = iter;
      break;  // line search failed; report current point
    }

    std::vector<double> s_vec(n), y_vec(n);
    for (size_t j = 0; j < n; ++j) {
      s_vec[j] = xn[j] - x[j];
      y_vec[j] = gn[j] - g[j];
    }
    double sy = dotv(s_vec, y_vec);
    if (sy > 1e-300) {
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(y_vec));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x.swap(xn);
    g.swap(gn);
    f = fn_val;
    res.iterations = iter + 1;
  }

  res.x = std::move(x);
  res.f = f;
  res.grad_norm = inf_norm(g);
  if (res.grad_norm <= opt.grad_tolerance) res.converged = true;
  return res;
}

}  // namespace xhv
