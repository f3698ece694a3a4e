#pragma once

#include <functional>
#include <vector>

namespace xhv {

// Objective: fills grad (same size as x) and returns f(x).
using ObjectiveFn =
    std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct LbfgsOptions {
  int max_iterations = 2000;
  double grad_tolerance = 1e-12;  // on the infinity norm of the gradient
  int memory = 10;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  double grad_norm = 0.0;  // infinity norm at exit
  int iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS with a Wolfe-condition line search.
LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, std::vector<double> x0,
                           const LbfgsOptions& opt = {});

}  // namespace xhv
