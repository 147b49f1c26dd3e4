#pragma once

#include <memory>
#include <vector>

#include "rmfgp/gp.hpp"

namespace rmfgp {

struct GpdrConfig {
  int alternations = 5;  // rounds of (fix W, fit theta) + (fix theta, fit W)
  int joint_init_iters = 50;
  GpFitConfig gp;
};

struct GpdrResult {
  Matrix W;  // s x d, orthonormal columns (QR of the optimized matrix)
  std::shared_ptr<const GPModel> model;  // refit on the projected inputs X*W
  std::vector<double> lml_trace;         // after init and after each phase
  Eigen::Index w_param_count = 0;        // parameters optimized in the W phase
};

// Projected-kernel GP dimension reduction: alternating two-step optimization
// of the inner ARD-SE hyperparameters and the s x d projection W, each phase
// accepted only when the marginal log-likelihood does not decrease.
GpdrResult fit_projected_gp(const Matrix& X, const Vector& y, Eigen::Index d,
                            const Matrix& A0, const ArdKernelParams& theta0,
                            const GpdrConfig& config = {});

// Convenience overload with default initial guesses: A0 = first d identity
// columns, theta0 from the same initialization rule as fit_gp.
GpdrResult fit_projected_gp(const Matrix& X, const Vector& y, Eigen::Index d,
                            const GpdrConfig& config = {});

// k(x,x') = se_ard(W^T x, W^T x'; inner) on s-dim inputs.
double projected_kernel_eval(const Matrix& W, const ArdKernelParams& inner,
                             const Eigen::Ref<const Vector>& x,
                             const Eigen::Ref<const Vector>& x2);

}  // namespace rmfgp
