#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "rmfgp/dataset.hpp"
#include "rmfgp/kernels.hpp"

namespace rmfgp {

struct GpFitConfig {
  int restarts = 10;
  std::uint64_t seed = 0;
  double log_lower = std::log(1e-6);  // bounds for all log-scale parameters
  double log_upper = std::log(1e6);
  // When set, noise variance is pinned to this value (0 allowed) instead of
  // being learned; otherwise it is learned with the floor below.
  std::optional<double> pin_noise;
  double noise_floor = 1e-8;
  bool center_response = true;
  int max_iters = 200;
};

struct PredictResult {
  Vector mean;
  Vector variance;
};

// Immutable fitted GP. Holds the Cholesky factor of K + noise*I + jitter*I
// and alpha = Ktilde^{-1} (y - offset); prediction is pure.
class GPModel {
 public:
  GPModel(Matrix train_X, Vector train_y, std::unique_ptr<Kernel> kernel,
          double noise_variance, double y_offset, double jitter_used,
          Matrix chol_lower, Vector alpha, double lml);
  GPModel(const GPModel& other);
  GPModel& operator=(const GPModel&) = delete;
  GPModel(GPModel&&) = default;

  PredictResult predict(const Matrix& Xstar) const;

  const Matrix& train_X() const { return train_X_; }
  const Vector& train_y() const { return train_y_; }
  const Kernel& kernel() const { return *kernel_; }
  double noise_variance() const { return noise_variance_; }
  double y_offset() const { return y_offset_; }
  double jitter() const { return jitter_; }
  double lml() const { return lml_; }
  const Matrix& chol_lower() const { return chol_; }

  std::string to_json() const;

 private:
  Matrix train_X_;
  Vector train_y_;  // raw responses (offset not removed)
  std::unique_ptr<Kernel> kernel_;
  double noise_variance_;
  double y_offset_;
  double jitter_;
  Matrix chol_;
  Vector alpha_;
  double lml_;
};

// Factorization of K(X) + noise*I escalating through the jitter ladder
// {1e-10, 1e-8, 1e-6, 1e-4}; throws NotPositiveDefinite when all rungs fail.
struct CholOutcome {
  Eigen::LLT<Matrix> llt;
  double jitter;
};
CholOutcome cholesky_with_jitter(const Matrix& K, double noise_variance);

// log p(y | X, theta) = -1/2 log|Ktilde| - 1/2 y^T Ktilde^{-1} y - n/2 log 2pi
double log_marginal_likelihood(const Matrix& X, const Vector& y,
                               const ArdKernelParams& params);

// Gradient over [log sf2, log l_1.., log sn2]; analytic, matches central
// finite differences to < 1e-4 relative.
Vector lml_gradient(const Matrix& X, const Vector& y, const ArdKernelParams& params);

// Kernel-generic forms used by the multi-fidelity and projected-kernel fits.
double log_marginal_likelihood(const Matrix& X, const Vector& y,
                               const Kernel& kernel, double noise_variance);
Vector lml_gradient(const Matrix& X, const Vector& y, const Kernel& kernel,
                    double noise_variance, bool learn_noise);

// -LML (and its gradient when grad != nullptr) at the packed parameter
// vector [kernel params..., log noise when learned]; mutates `kernel`.
// Returns +inf when the parameters are infeasible or factorization fails.
double negative_lml_packed(const Matrix& X, const Vector& y, Kernel& kernel,
                           bool learn_noise, double fixed_noise, const Vector& v,
                           Vector* grad);

// Multistart maximum-likelihood fit with the ARD-SE kernel.
GPModel fit_gp(const Matrix& X, const Vector& y, const GpFitConfig& config = {});

// Same machinery for an arbitrary kernel prototype; initial kernel params are
// perturbed per restart around the prototype's current values.
GPModel fit_gp_kernel(const Matrix& X, const Vector& y, const Kernel& prototype,
                      const GpFitConfig& config);

}  // namespace rmfgp
