#include "rmfgp/gp.hpp"

#include <cmath>
#include <json.hpp>

#include "rmfgp/optimizer.hpp"
#include "rmfgp/rng.hpp"

namespace rmfgp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;

const double kJitterLadder[] = {1e-10, 1e-8, 1e-6, 1e-4};

struct LmlEval {
  double value = -std::numeric_limits<double>::infinity();
  Eigen::LLT<Matrix> llt;
  Vector alpha;
  double jitter = 0.0;
  bool ok = false;
};

LmlEval evaluate_lml(const Matrix& K, const Vector& y, double noise_variance) {
  LmlEval out;
  const Eigen::Index n = K.rows();
  Matrix Kt = K;
  Kt.diagonal().array() += noise_variance;
  for (double jitter : kJitterLadder) {
    Matrix Kj = Kt;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(Kj);
    if (llt.info() != Eigen::Success) continue;
    out.llt = std::move(llt);
    out.jitter = jitter;
    out.ok = true;
    break;
  }
  if (!out.ok) return out;

  out.alpha = out.llt.solve(y);
  const double log_det =
      2.0 * out.llt.matrixLLT().diagonal().array().log().sum();
  out.value = -0.5 * y.dot(out.alpha) - 0.5 * log_det -
              0.5 * static_cast<double>(n) * std::log(kTwoPi);
  if (!std::isfinite(out.value)) out.ok = false;
  return out;
}

// Parameter vector layout during optimization: kernel params, then log noise
// when the noise is learned.
struct FitProblem {
  const Matrix& X;
  const Vector& y;  // centered
  std::unique_ptr<Kernel> kernel;
  bool learn_noise;
  double fixed_noise;

  double apply(const Vector& v) {
    kernel->set_params(v.head(kernel->num_params()));
    return learn_noise ? std::exp(v(v.size() - 1)) : fixed_noise;
  }

  double objective(const Vector& v, Vector* grad) {
    return negative_lml_packed(X, y, *kernel, learn_noise, fixed_noise, v, grad);
  }
};

Vector make_bounds(const Kernel& kernel, bool learn_noise, double lo, double hi,
                   double noise_floor, bool lower) {
  const Eigen::Index extra = learn_noise ? 1 : 0;
  Vector b(kernel.num_params() + extra);
  for (Eigen::Index i = 0; i < kernel.num_params(); ++i) {
    if (kernel.param_is_log(i)) {
      b(i) = lower ? lo : hi;
    } else {
      b(i) = lower ? -1e6 : 1e6;  // raw projection entries stay finite
    }
  }
  if (learn_noise) {
    b(kernel.num_params()) = lower ? std::log(noise_floor) : hi;
  }
  return b;
}

}  // namespace

double negative_lml_packed(const Matrix& X, const Vector& y, Kernel& kernel,
                           bool learn_noise, double fixed_noise, const Vector& v,
                           Vector* grad) {
  double noise = fixed_noise;
  try {
    kernel.set_params(v.head(kernel.num_params()));
    if (learn_noise) noise = std::exp(v(v.size() - 1));
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
  const Matrix K = kernel.matrix(X);
  const LmlEval eval = evaluate_lml(K, y, noise);
  if (!eval.ok) return std::numeric_limits<double>::infinity();
  if (grad != nullptr) {
    // dL/dtheta = 1/2 (alpha^T dK alpha - tr(Ktilde^{-1} dK))
    const Matrix Kinv = eval.llt.solve(Matrix::Identity(X.rows(), X.rows()));
    for (Eigen::Index i = 0; i < kernel.num_params(); ++i) {
      const Matrix dK = kernel.param_gradient(X, i);
      const double term =
          eval.alpha.dot(dK * eval.alpha) - (Kinv.array() * dK.array()).sum();
      (*grad)(i) = -0.5 * term;  // minimizing -LML
    }
    if (learn_noise) {
      const double term = noise * (eval.alpha.squaredNorm() - Kinv.trace());
      (*grad)(v.size() - 1) = -0.5 * term;
    }
  }
  return -eval.value;
}

CholOutcome cholesky_with_jitter(const Matrix& K, double noise_variance) {
  Matrix Kt = K;
  Kt.diagonal().array() += noise_variance;
  for (double jitter : kJitterLadder) {
    Matrix Kj = Kt;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(Kj);
    if (llt.info() == Eigen::Success) {
      return CholOutcome{std::move(llt), jitter};
    }
  }
  throw NotPositiveDefinite(
      "kernel matrix is not positive definite after the jitter ladder");
}

GPModel::GPModel(Matrix train_X, Vector train_y, std::unique_ptr<Kernel> kernel,
                 double noise_variance, double y_offset, double jitter_used,
                 Matrix chol_lower, Vector alpha, double lml)
    : train_X_(std::move(train_X)),
      train_y_(std::move(train_y)),
      kernel_(std::move(kernel)),
      noise_variance_(noise_variance),
      y_offset_(y_offset),
      jitter_(jitter_used),
      chol_(std::move(chol_lower)),
      alpha_(std::move(alpha)),
      lml_(lml) {}

GPModel::GPModel(const GPModel& other)
    : train_X_(other.train_X_),
      train_y_(other.train_y_),
      kernel_(other.kernel_->clone()),
      noise_variance_(other.noise_variance_),
      y_offset_(other.y_offset_),
      jitter_(other.jitter_),
      chol_(other.chol_),
      alpha_(other.alpha_),
      lml_(other.lml_) {}

PredictResult GPModel::predict(const Matrix& Xstar) const {
  if (Xstar.cols() != train_X_.cols()) {
    throw DimensionMismatch("predict: query has " + std::to_string(Xstar.cols()) +
                            " columns, model expects " +
                            std::to_string(train_X_.cols()));
  }
  const Matrix Kstar = kernel_->cross(Xstar, train_X_);  // m x n
  PredictResult out;
  out.mean = Kstar * alpha_;
  out.mean.array() += y_offset_;

  const Matrix v = chol_.triangularView<Eigen::Lower>().solve(Kstar.transpose());
  out.variance = kernel_->diag(Xstar) - v.colwise().squaredNorm().transpose();
  out.variance = out.variance.cwiseMax(0.0);
  return out;
}

std::string GPModel::to_json() const {
  nlohmann::ordered_json j;
  j["kernel"] = kernel_->name();
  const Vector params = kernel_->params();
  j["params"] = std::vector<double>(params.data(), params.data() + params.size());
  j["noise_variance"] = noise_variance_;
  j["jitter"] = jitter_;
  j["y_offset"] = y_offset_;
  j["lml"] = lml_;
  j["n_train"] = train_X_.rows();
  j["p"] = train_X_.cols();
  return j.dump();
}

double log_marginal_likelihood(const Matrix& X, const Vector& y,
                               const Kernel& kernel, double noise_variance) {
  const LmlEval eval = evaluate_lml(kernel.matrix(X), y, noise_variance);
  if (!eval.ok) {
    throw NotPositiveDefinite(
        "kernel matrix is not positive definite after the jitter ladder");
  }
  return eval.value;
}

double log_marginal_likelihood(const Matrix& X, const Vector& y,
                               const ArdKernelParams& params) {
  SquaredExponentialArd k(params.signal_variance, params.lengthscales);
  return log_marginal_likelihood(X, y, k, params.noise_variance);
}

Vector lml_gradient(const Matrix& X, const Vector& y, const Kernel& kernel,
                    double noise_variance, bool learn_noise) {
  FitProblem problem{X, y, kernel.clone(), learn_noise, noise_variance};
  const Eigen::Index extra = learn_noise ? 1 : 0;
  Vector v(kernel.num_params() + extra);
  v.head(kernel.num_params()) = kernel.params();
  if (learn_noise) v(v.size() - 1) = std::log(std::max(noise_variance, 1e-300));
  Vector grad(v.size());
  const double f = problem.objective(v, &grad);
  if (!std::isfinite(f)) {
    throw NotPositiveDefinite("gradient evaluation failed to factorize");
  }
  return -grad;  // objective was -LML
}

Vector lml_gradient(const Matrix& X, const Vector& y, const ArdKernelParams& params) {
  SquaredExponentialArd k(params.signal_variance, params.lengthscales);
  if (params.noise_variance > 0.0) {
    return lml_gradient(X, y, k, params.noise_variance, true);
  }
  // with the noise pinned at zero its log-gradient is identically zero
  Vector g = lml_gradient(X, y, k, 0.0, false);
  Vector out(g.size() + 1);
  out << g, 0.0;
  return out;
}

GPModel fit_gp_kernel(const Matrix& X, const Vector& y, const Kernel& prototype,
                      const GpFitConfig& config) {
  if (X.rows() < 2) throw InvalidArgument("fit_gp needs n >= 2");
  if (y.size() != X.rows()) throw DimensionMismatch("fit_gp: |y| != rows of X");

  const double offset = config.center_response ? y.mean() : 0.0;
  const Vector yc = y.array() - offset;
  const double y_var = std::max(yc.squaredNorm() / std::max<Eigen::Index>(1, yc.size() - 1),
                                1e-12);

  const bool learn_noise = !config.pin_noise.has_value();
  const double fixed_noise = config.pin_noise.value_or(0.0);

  FitProblem problem{X, yc, prototype.clone(), learn_noise, fixed_noise};
  const Eigen::Index n_kernel = prototype.num_params();
  const Eigen::Index dim = n_kernel + (learn_noise ? 1 : 0);
  const Vector lo = make_bounds(prototype, learn_noise, config.log_lower,
                                config.log_upper, config.noise_floor, true);
  const Vector hi = make_bounds(prototype, learn_noise, config.log_lower,
                                config.log_upper, config.noise_floor, false);

  Vector base(dim);
  base.head(n_kernel) = prototype.params();
  if (learn_noise) {
    base(dim - 1) = std::log(std::max(1e-4 * y_var, config.noise_floor));
  }
  base = base.cwiseMax(lo).cwiseMin(hi);

  LbfgsOptions opt;
  opt.max_iters = config.max_iters;

  Vector best_x;
  double best_f = std::numeric_limits<double>::infinity();
  int best_restart = -1;
  const Objective objective = [&problem](const Vector& v, Vector* g) {
    return problem.objective(v, g);
  };

  for (int r = 0; r < std::max(1, config.restarts); ++r) {
    Vector x0 = base;
    if (r > 0) {
      Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(r)));
      for (Eigen::Index i = 0; i < dim; ++i) {
        const bool is_log = i < n_kernel ? prototype.param_is_log(i) : true;
        if (is_log) {
          x0(i) += rng.uniform(-2.3, 2.3);  // multiplicative window ~[0.1, 10]
        } else {
          x0(i) += rng.uniform(-0.5, 0.5) * (1.0 + std::abs(x0(i)));
        }
      }
      x0 = x0.cwiseMax(lo).cwiseMin(hi);
    }
    const LbfgsResult res = minimize_lbfgs_box(objective, x0, lo, hi, opt);
    if (std::isfinite(res.f) && res.f < best_f - 1e-12) {
      best_f = res.f;
      best_x = res.x;
      best_restart = r;
    }
  }
  (void)best_restart;
  if (!std::isfinite(best_f)) {
    throw OptimizerFailure("no restart produced a finite marginal likelihood");
  }

  const double noise = problem.apply(best_x);
  const Matrix K = problem.kernel->matrix(X);
  const LmlEval eval = evaluate_lml(K, yc, noise);
  if (!eval.ok) throw NotPositiveDefinite("final factorization failed");

  return GPModel(X, y, std::move(problem.kernel), noise, offset, eval.jitter,
                 Matrix(eval.llt.matrixL()), eval.alpha, eval.value);
}

GPModel fit_gp(const Matrix& X, const Vector& y, const GpFitConfig& config) {
  const Eigen::Index p = X.cols();
  const double offset = config.center_response ? y.mean() : 0.0;
  const Vector yc = y.array() - offset;
  double y_var = yc.squaredNorm() / std::max<Eigen::Index>(1, yc.size() - 1);
  if (y_var < 1e-12) y_var = 1.0;

  Vector ls(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double range = X.col(j).maxCoeff() - X.col(j).minCoeff();
    ls(j) = range > 1e-12 ? range : 1.0;
  }
  SquaredExponentialArd prototype(y_var, ls);
  return fit_gp_kernel(X, y, prototype, config);
}

}  // namespace rmfgp
