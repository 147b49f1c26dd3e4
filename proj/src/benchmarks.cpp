#include "rmfgp/benchmarks.hpp"

#include <cmath>

#include "rmfgp/gp.hpp"
#include "rmfgp/rmfgp.hpp"
#include "rmfgp/rng.hpp"

namespace rmfgp {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GaussLegendreRule {
  Vector nodes;    // on (-1, 1)
  Vector weights;
};

// Nodes and weights by Newton iteration on the Legendre recurrence.
GaussLegendreRule gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes = Vector(n);
  rule.weights = Vector(n);
  for (int k = 0; k < n; ++k) {
    double x = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes(k) = x;
    rule.weights(k) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double composite_gl(const std::function<double(double)>& f, double a, double b,
                    const GaussLegendreRule& rule, int panels) {
  double total = 0.0;
  const double width = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    const double mid = a + (i + 0.5) * width;
    const double half = 0.5 * width;
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
      total += half * rule.weights(k) * f(mid + half * rule.nodes(k));
    }
  }
  return total;
}

}  // namespace

double solve_elliptic(const std::function<double(double)>& a, double x_query,
                      const QuadratureOptions& quad) {
  if (x_query < 0.0 || x_query > 1.0) {
    throw InvalidArgument("elliptic query point must lie in [0,1]");
  }
  const GaussLegendreRule rule = gauss_legendre(quad.nodes_per_panel);
  const auto inv_a = [&a](double y) {
    const double v = a(y);
    if (!(v > 0.0)) {
      throw NonPositiveCoefficient("coefficient a(y) must be positive on [0,1]");
    }
    return 1.0 / v;
  };
  // C = a(0) u'(0) chosen so u(1) = 0 under the same quadrature rule
  const double int_y = composite_gl([&](double y) { return y * inv_a(y); }, 0.0,
                                    1.0, rule, quad.panels);
  const double int_1 = composite_gl(inv_a, 0.0, 1.0, rule, quad.panels);
  const double c = int_y / int_1;
  if (x_query == 0.0) return 0.0;
  return composite_gl([&](double y) { return (c - y) * inv_a(y); }, 0.0, x_query,
                      rule, quad.panels);
}

double relative_error(const Vector& u, const Vector& u_hat) {
  if (u.size() != u_hat.size()) {
    throw DimensionMismatch("relative_error: length mismatch");
  }
  const double denom = u.norm();
  if (denom == 0.0) throw ZeroNorm("relative_error: exact vector has zero norm");
  return (u - u_hat).norm() / denom;
}

Vector evaluate_rows(const Evaluator& f, const Matrix& X) {
  Vector y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    y(i) = f(X.row(i).transpose());
  }
  return y;
}

BenchmarkProblem linear_problem() {
  BenchmarkProblem prob;
  prob.name = "linear";
  prob.p = 6;
  prob.high_eval = [](const Eigen::Ref<const Vector>& x) {
    return std::sin(kPi * (x(0) + x(2))) + std::sin(kPi * (x(0) + x(1))) + 2.0;
  };
  prob.low_eval = [high = prob.high_eval](const Eigen::Ref<const Vector>& x) {
    return high(x) + x(2) * x(3) * x(4) * x(5);
  };
  Matrix A(6, 2);
  A << 1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0;
  prob.true_subspace = A;
  prob.true_d = 2;
  return prob;
}

BenchmarkProblem nonlinear_problem() {
  BenchmarkProblem prob;
  prob.name = "nonlinear";
  prob.p = 10;
  prob.high_eval = [](const Eigen::Ref<const Vector>& x) {
    return std::exp(0.2 * x.sum());
  };
  prob.low_eval = [high = prob.high_eval](const Eigen::Ref<const Vector>& x) {
    return x(3) * high(x);
  };
  prob.true_subspace = Matrix::Ones(10, 1);
  prob.true_d = 1;
  return prob;
}

BenchmarkProblem advection_problem(double a, double x, double t) {
  BenchmarkProblem prob;
  prob.name = "advection";
  prob.p = 5;
  prob.fixed.a = a;
  prob.fixed.x = x;
  prob.fixed.t = t;
  prob.high_eval_at_x = [a, t](double xq, const Eigen::Ref<const Vector>& xi) {
    return std::sin(kPi * (xq - 0.25 * a * t * xi.sum() + 1.0)) + 1.0;
  };
  prob.low_eval_at_x = [a, t](double xq, const Eigen::Ref<const Vector>& xi) {
    return std::sin(kPi * (xq - 0.25 * a * t * xi.tail(3).sum() + 1.0)) + 1.0;
  };
  prob.high_eval = [fn = prob.high_eval_at_x, x](const Eigen::Ref<const Vector>& xi) {
    return fn(x, xi);
  };
  prob.low_eval = [fn = prob.low_eval_at_x, x](const Eigen::Ref<const Vector>& xi) {
    return fn(x, xi);
  };
  prob.true_subspace = Matrix::Ones(5, 1);
  prob.true_d = 1;
  return prob;
}

BenchmarkProblem elliptic_problem(double x_query) {
  BenchmarkProblem prob;
  prob.name = "elliptic";
  prob.p = 6;
  prob.fixed.x = x_query;
  prob.high_eval_at_x = [](double xq, const Eigen::Ref<const Vector>& xi) {
    const double s = xi(0) + xi(1) + xi(2) + xi(3);
    const double xi1 = xi(0);
    return solve_elliptic(
        [s, xi1](double y) { return 1.0 / (xi1 + std::sin(y * s) + 1.0); }, xq);
  };
  prob.low_eval_at_x = [](double xq, const Eigen::Ref<const Vector>& xi) {
    const double s = xi(0) + xi(1) + xi(2) + xi(3);
    return solve_elliptic(
        [s](double y) { return 1.0 / (0.1 + std::sin(y * s) + 1.0); }, xq);
  };
  prob.high_eval = [fn = prob.high_eval_at_x, x_query](const Eigen::Ref<const Vector>& xi) {
    return fn(x_query, xi);
  };
  prob.low_eval = [fn = prob.low_eval_at_x, x_query](const Eigen::Ref<const Vector>& xi) {
    return fn(x_query, xi);
  };
  // central subspace estimated from a large SAVE reference, not closed form
  return prob;
}

BenchmarkProblem problem_by_name(const std::string& name) {
  if (name == "linear") return linear_problem();
  if (name == "nonlinear") return nonlinear_problem();
  if (name == "advection") return advection_problem();
  if (name == "elliptic") return elliptic_problem();
  throw InvalidArgument("unknown benchmark problem: " + name);
}

namespace {

struct CurvePair {
  Vector mean;
  Vector std_dev;
};

// Refits the reduced GP at each grid location from the recomputed training
// responses and pushes the common draws through it. The std folds the
// predictive variance in via the law of total variance.
CurvePair surrogate_curves(
    const std::function<double(double, const Eigen::Ref<const Vector>&)>& family,
    const Matrix& train_X_reduced, const Matrix& train_X_full,
    const Matrix& draws_reduced, const Vector& x_grid, const GpFitConfig& gp) {
  const Eigen::Index nx = x_grid.size();
  CurvePair out;
  out.mean = Vector(nx);
  out.std_dev = Vector(nx);
  for (Eigen::Index ix = 0; ix < nx; ++ix) {
    Vector y_train(train_X_full.rows());
    for (Eigen::Index i = 0; i < train_X_full.rows(); ++i) {
      y_train(i) = family(x_grid(ix), train_X_full.row(i).transpose());
    }
    const GPModel model = fit_gp(train_X_reduced, y_train, gp);
    const PredictResult pred = model.predict(draws_reduced);
    const double mean = pred.mean.mean();
    const double var_of_means =
        (pred.mean.array() - mean).square().sum() /
        static_cast<double>(pred.mean.size());
    out.mean(ix) = mean;
    out.std_dev(ix) = std::sqrt(var_of_means + pred.variance.mean());
  }
  return out;
}

}  // namespace

UpCurves uncertainty_propagation(const BenchmarkProblem& problem,
                                 const RmfgpResult& result,
                                 const Matrix& baseline_reduction,
                                 const Matrix& baseline_train_X,
                                 const RmfgpConfig& config,
                                 const UpOptions& options) {
  if (!problem.high_eval_at_x) {
    throw InvalidArgument("problem " + problem.name +
                          " has no spatial response family");
  }
  UpCurves curves;
  curves.x_grid = Vector::LinSpaced(options.grid_size, 0.0, 1.0);
  const Matrix draws = sample_uniform(options.n_xi, problem.p, options.seed);

  // ground truth from the exact high-fidelity family on the same draws
  curves.mean_truth = Vector(options.grid_size);
  curves.std_truth = Vector(options.grid_size);
  for (Eigen::Index ix = 0; ix < curves.x_grid.size(); ++ix) {
    Vector values(draws.rows());
    for (Eigen::Index j = 0; j < draws.rows(); ++j) {
      values(j) = problem.high_eval_at_x(curves.x_grid(ix), draws.row(j).transpose());
    }
    const double mean = values.mean();
    curves.mean_truth(ix) = mean;
    curves.std_truth(ix) = std::sqrt((values.array() - mean).square().sum() /
                                     static_cast<double>(values.size()));
  }

  const Matrix reduction = result.flag == 1 ? result.M : result.M1;
  GpFitConfig gp = config.gp;
  gp.seed = mix_seed(config.seed, 0x5e11);

  const CurvePair rmfgp = surrogate_curves(
      problem.high_eval_at_x, result.final_high->X() * reduction,
      result.final_high->X(), draws * reduction, curves.x_grid, gp);
  curves.mean_rmfgp = rmfgp.mean;
  curves.std_rmfgp = rmfgp.std_dev;

  const CurvePair baseline = surrogate_curves(
      problem.high_eval_at_x, baseline_train_X * baseline_reduction,
      baseline_train_X, draws * baseline_reduction, curves.x_grid, gp);
  curves.mean_baseline = baseline.mean;
  curves.std_baseline = baseline.std_dev;
  return curves;
}

}  // namespace rmfgp
