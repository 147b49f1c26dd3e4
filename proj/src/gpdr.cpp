#include "rmfgp/gpdr.hpp"

#include <cmath>

#include "rmfgp/optimizer.hpp"
#include "rmfgp/sdr.hpp"

namespace rmfgp {

namespace {

// Optimizes the index subset `idx` of a packed parameter vector, everything
// else held fixed. The full gradient is computed and sliced; at the problem
// sizes this fit sees (n_H <= a few dozen), that cost is negligible.
struct PhaseProblem {
  const Matrix& X;
  const Vector& y;
  ProjectedSeKernel& kernel;
  bool learn_noise;
  double fixed_noise;
  Vector full;
  const std::vector<Eigen::Index>& idx;

  double operator()(const Vector& sub, Vector* grad) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      full(idx[k]) = sub(static_cast<Eigen::Index>(k));
    }
    Vector full_grad;
    Vector* fg = nullptr;
    if (grad != nullptr) {
      full_grad.resize(full.size());
      fg = &full_grad;
    }
    const double f = negative_lml_packed(X, y, kernel, learn_noise, fixed_noise,
                                         full, fg);
    if (grad != nullptr) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        (*grad)(static_cast<Eigen::Index>(k)) = full_grad(idx[k]);
      }
    }
    return f;
  }
};

}  // namespace

double projected_kernel_eval(const Matrix& W, const ArdKernelParams& inner,
                             const Eigen::Ref<const Vector>& x,
                             const Eigen::Ref<const Vector>& x2) {
  ProjectedSeKernel k(W, inner.signal_variance, inner.lengthscales);
  return k.eval(x, x2);
}

GpdrResult fit_projected_gp(const Matrix& X, const Vector& y, Eigen::Index d,
                            const Matrix& A0, const ArdKernelParams& theta0,
                            const GpdrConfig& config) {
  const Eigen::Index n = X.rows();
  const Eigen::Index s = X.cols();
  if (!(d >= 1 && d <= s && s <= n)) {
    throw InvalidArgument("fit_projected_gp needs 1 <= d <= s <= n");
  }
  if (A0.rows() != s || A0.cols() != d) {
    throw DimensionMismatch("initial projection must be s x d");
  }
  if (theta0.lengthscales.size() != d) {
    throw DimensionMismatch("initial inner lengthscales must have length d");
  }
  if (config.alternations < 1) throw InvalidArgument("alternation count must be >= 1");

  const double offset = y.mean();
  const Vector yc = y.array() - offset;

  ProjectedSeKernel kernel(A0, theta0.signal_variance, theta0.lengthscales);
  const bool learn_noise = !config.gp.pin_noise.has_value();
  const double fixed_noise = config.gp.pin_noise.value_or(0.0);

  const Eigen::Index n_kernel = kernel.num_params();
  const Eigen::Index dim = n_kernel + (learn_noise ? 1 : 0);
  Vector full(dim);
  full.head(n_kernel) = kernel.params();
  if (learn_noise) {
    double y_var = yc.squaredNorm() / std::max<Eigen::Index>(1, n - 1);
    if (y_var < 1e-12) y_var = 1.0;
    full(dim - 1) = std::log(std::max(1e-4 * y_var, config.gp.noise_floor));
  }

  // index sets: inner hyperparameters (+ noise) versus projection entries
  std::vector<Eigen::Index> theta_idx;
  std::vector<Eigen::Index> w_idx;
  std::vector<Eigen::Index> all_idx;
  for (Eigen::Index i = 0; i < dim; ++i) {
    all_idx.push_back(i);
    const bool is_w = i >= kernel.inner_param_count() && i < n_kernel;
    (is_w ? w_idx : theta_idx).push_back(i);
  }

  Vector lo(dim), hi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const bool is_log = i < n_kernel ? kernel.param_is_log(i) : true;
    lo(i) = is_log ? config.gp.log_lower : -1e6;
    hi(i) = is_log ? config.gp.log_upper : 1e6;
  }
  if (learn_noise) lo(dim - 1) = std::log(config.gp.noise_floor);
  full = full.cwiseMax(lo).cwiseMin(hi);

  const auto slice = [](const Vector& v, const std::vector<Eigen::Index>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out(static_cast<Eigen::Index>(k)) = v(idx[k]);
    }
    return out;
  };

  GpdrResult result;
  result.w_param_count = static_cast<Eigen::Index>(w_idx.size());

  // A phase is accepted only when it does not decrease the LML; `full` and
  // `current` (the -LML) always describe the best accepted state.
  double current =
      negative_lml_packed(X, yc, kernel, learn_noise, fixed_noise, full, nullptr);

  const auto run_phase = [&](const std::vector<Eigen::Index>& idx, int max_iters) {
    PhaseProblem problem{X, yc, kernel, learn_noise, fixed_noise, full, idx};
    LbfgsOptions opt;
    opt.max_iters = max_iters;
    const Objective objective = [&problem](const Vector& v, Vector* g) {
      return problem(v, g);
    };
    const LbfgsResult res =
        minimize_lbfgs_box(objective, slice(full, idx), slice(lo, idx),
                           slice(hi, idx), opt);
    if (std::isfinite(res.f) && res.f <= current) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        full(idx[k]) = res.x(static_cast<Eigen::Index>(k));
      }
      current = res.f;
    }
    result.lml_trace.push_back(-current);
  };

  run_phase(all_idx, config.joint_init_iters);  // short joint ascent
  for (int round = 0; round < config.alternations; ++round) {
    run_phase(theta_idx, config.gp.max_iters);  // fix W, optimize theta
    run_phase(w_idx, config.gp.max_iters);      // fix theta, optimize W
  }

  // restore the accepted parameters and report the orthonormalized projection
  (void)negative_lml_packed(X, yc, kernel, learn_noise, fixed_noise, full, nullptr);
  result.W = orthonormal_columns(kernel.W());

  GpFitConfig refit = config.gp;
  result.model = std::make_shared<GPModel>(fit_gp(X * result.W, y, refit));
  return result;
}

GpdrResult fit_projected_gp(const Matrix& X, const Vector& y, Eigen::Index d,
                            const GpdrConfig& config) {
  const Eigen::Index s = X.cols();
  Matrix A0 = Matrix::Identity(s, s).leftCols(d);
  const Matrix U = X * A0;
  ArdKernelParams theta0;
  double y_var = (y.array() - y.mean()).square().sum() /
                 std::max<Eigen::Index>(1, X.rows() - 1);
  if (y_var < 1e-12) y_var = 1.0;
  theta0.signal_variance = y_var;
  theta0.lengthscales = Vector(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double range = U.col(j).maxCoeff() - U.col(j).minCoeff();
    theta0.lengthscales(j) = range > 1e-12 ? range : 1.0;
  }
  return fit_projected_gp(X, y, d, A0, theta0, config);
}

}  // namespace rmfgp
