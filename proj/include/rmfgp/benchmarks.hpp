#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "rmfgp/dataset.hpp"

namespace rmfgp {

// One of the four reference problems: exact low/high evaluators on [0,1]^p,
// plus the known central subspace where the construction reveals it. The
// elliptic problem's subspace is tagged unknown and estimated from a large
// SAVE reference instead.
struct BenchmarkProblem {
  std::string name;
  Eigen::Index p = 0;
  Evaluator low_eval;
  Evaluator high_eval;
  std::optional<Matrix> true_subspace;  // p x d, or nullopt (large-sample SAVE)
  std::optional<int> true_d;

  struct FixedParams {
    double a = 1.0;      // advection coefficient
    double x = 0.5;      // spatial location
    double t = 1.0;      // advection time
  } fixed;

  // Response family over the spatial coordinate, used by the uncertainty
  // propagation study; empty for the two algebraic problems.
  std::function<double(double x, const Eigen::Ref<const Vector>&)> high_eval_at_x;
  std::function<double(double x, const Eigen::Ref<const Vector>&)> low_eval_at_x;
};

// f_H = sin(pi(x1+x3)) + sin(pi(x1+x2)) + 2, f_L = f_H + x3 x4 x5 x6; p=6, d=2.
BenchmarkProblem linear_problem();

// f_H = exp(0.2 sum x_i), f_L = x4 f_H; p=10, d=1.
BenchmarkProblem nonlinear_problem();

// u_H = sin(pi(x - (a/4) t sum_{1..5} xi_i + 1)) + 1, u_L drops xi_1, xi_2;
// p=5, d=1. Defaults a=1, x=0.5, t=1.
BenchmarkProblem advection_problem(double a = 1.0, double x = 0.5, double t = 1.0);

// -(a u')' = 1 on (0,1), u(0)=u(1)=0, with the random coefficient families
// a_H, a_L of the reference problem; response u(x_query). p=6.
BenchmarkProblem elliptic_problem(double x_query = 0.7);

BenchmarkProblem problem_by_name(const std::string& name);

struct QuadratureOptions {
  int panels = 64;
  int nodes_per_panel = 8;
};

// u(x_query) for -(a u')' = 1 with zero boundary values, via the integral
// form u(x) = int_0^x (C - y)/a(y) dy, C = (int y/a) / (int 1/a). Composite
// Gauss-Legendre; the normalization integrals use the same rule so u(1)
// vanishes to rounding. a must be positive on [0,1].
double solve_elliptic(const std::function<double(double)>& a, double x_query,
                      const QuadratureOptions& quad = {});

// ||u - u_hat||_2 / ||u||_2 (Eq. 10 form); ZeroNorm when ||u|| = 0.
double relative_error(const Vector& u, const Vector& u_hat);

// Pointwise evaluation of an Evaluator over rows of X.
Vector evaluate_rows(const Evaluator& f, const Matrix& X);

struct UpCurves {
  Vector x_grid;          // the 50 spatial locations
  Vector mean_truth, std_truth;
  Vector mean_rmfgp, std_rmfgp;
  Vector mean_baseline, std_baseline;
};

// Forward declarations to avoid a header cycle with rmfgp.hpp.
struct RmfgpResult;
struct RmfgpConfig;

struct UpOptions {
  int grid_size = 50;
  int n_xi = 2000;
  std::uint64_t seed = 0;
};

// Uncertainty propagation over the problem's spatial coordinate: reuses the
// reduction matrix learned at the fixed x, refits the reduced surrogate per
// grid location from the same training draws, and evaluates mean/std across
// a common set of xi draws. The baseline does the same with the SAVE-only
// reduction. std columns fold in the surrogate's own predictive variance
// (law of total variance); the truth column is the plain sample std.
UpCurves uncertainty_propagation(const BenchmarkProblem& problem,
                                 const RmfgpResult& result,
                                 const Matrix& baseline_reduction,
                                 const Matrix& baseline_train_X,
                                 const RmfgpConfig& config,
                                 const UpOptions& options);

}  // namespace rmfgp
