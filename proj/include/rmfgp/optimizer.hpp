#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>

#include "rmfgp/dataset.hpp"

namespace rmfgp {

// Objective callback: returns f(x) and fills *grad when non-null. A return
// of +inf (or NaN) marks the point infeasible; line search backs off.
using Objective = std::function<double(const Vector& x, Vector* grad)>;

struct LbfgsOptions {
  int max_iters = 200;
  int memory = 10;
  double grad_tol = 1e-7;   // on the projected gradient, inf-norm
  double step_tol = 1e-12;  // relative step size
  int max_line_search = 40;
};

struct LbfgsResult {
  Vector x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Box-constrained L-BFGS minimizer: two-loop recursion with projection of
// trial points onto [lo, hi] and Armijo backtracking. Falls back to projected
// steepest descent when the quasi-Newton direction stalls.
LbfgsResult minimize_lbfgs_box(const Objective& objective, const Vector& x0,
                               const Vector& lo, const Vector& hi,
                               const LbfgsOptions& options = {});

}  // namespace rmfgp
