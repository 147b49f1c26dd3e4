#pragma once

#include <cstdint>
#include <memory>

#include "rmfgp/dataset.hpp"
#include "rmfgp/gp.hpp"

namespace rmfgp {

// Two-level linear auto-regressive model: y_H = rho * mu_low(x) + mu_delta + delta(x).
// Baseline comparator; rho and mu_delta by least squares, delta by a GP on
// the residuals at the (nested) high-fidelity inputs.
struct LinearARModel {
  std::shared_ptr<const GPModel> gp_low;
  double rho = 0.0;
  double delta_mean = 0.0;
  std::shared_ptr<const GPModel> gp_delta;

  // Eq. (3)-(4) style combination: mean = rho*mu_low + mu_delta + delta-mean,
  // variance = rho^2 * var_low + delta-variance.
  PredictResult predict(const Matrix& Xstar) const;
};

// Two-level nonlinear information fusion: level 2 is a GP over the augmented
// input [x, mu_low(x)] with the composite kernel k_rho*k_z + k_delta.
struct NARGPModel {
  std::shared_ptr<const GPModel> gp_low;
  std::shared_ptr<const GPModel> gp_high;  // over (p+1)-dim augmented inputs

  Eigen::Index input_dim() const { return gp_low->train_X().cols(); }
};

struct MultiFidelityConfig {
  GpFitConfig gp;  // shared fitting configuration for both levels
};

// Requires the high inputs to be a subset of the low inputs (exact row match)
// and n_H >= 3.
LinearARModel fit_linear_ar(const Dataset& low, const Dataset& high,
                            const MultiFidelityConfig& config = {});

// Two-stage NARGP fit; the augmented training inputs use the level-1
// posterior mean (not raw y_L), so nestedness is not required.
NARGPModel fit_nargp(const Dataset& low, const Dataset& high,
                     const MultiFidelityConfig& config = {});

// Monte Carlo propagation of the level-1 posterior through level 2:
// n_mc samples per query point, combined by the law of total variance.
// Per-point sample streams derive from (seed, point index), so results are
// independent of evaluation order.
PredictResult predict_nargp(const NARGPModel& model, const Matrix& Xstar,
                            int n_mc, std::uint64_t seed);

}  // namespace rmfgp
