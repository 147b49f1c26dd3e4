#include "rmfgp/multifidelity.hpp"

#include <cmath>

#include "rmfgp/rng.hpp"

namespace rmfgp {

namespace {

bool row_in(const Matrix& haystack, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  for (Eigen::Index i = 0; i < haystack.rows(); ++i) {
    if ((haystack.row(i).array() == row.array()).all()) return true;
  }
  return false;
}

}  // namespace

PredictResult LinearARModel::predict(const Matrix& Xstar) const {
  const PredictResult low = gp_low->predict(Xstar);
  const PredictResult delta = gp_delta->predict(Xstar);
  PredictResult out;
  out.mean = rho * low.mean.array() + delta_mean + delta.mean.array();
  out.variance = rho * rho * low.variance.array() + delta.variance.array();
  return out;
}

LinearARModel fit_linear_ar(const Dataset& low, const Dataset& high,
                            const MultiFidelityConfig& config) {
  if (high.p() != low.p()) throw DimensionMismatch("fidelity levels disagree on p");
  if (high.n() < 3) throw InvalidArgument("fit_linear_ar needs n_H >= 3");
  for (Eigen::Index i = 0; i < high.n(); ++i) {
    if (!row_in(low.X(), high.X().row(i))) {
      throw NotNested("high-fidelity input row " + std::to_string(i) +
                      " is not present in the low-fidelity set");
    }
  }

  LinearARModel model;
  model.gp_low = std::make_shared<GPModel>(fit_gp(low.X(), low.y(), config.gp));

  const Vector mu_low = model.gp_low->predict(high.X()).mean;

  // least squares of y_H on [mu_low, 1]
  Matrix design(high.n(), 2);
  design.col(0) = mu_low;
  design.col(1).setOnes();
  const Vector coef = design.colPivHouseholderQr().solve(high.y());
  model.rho = coef(0);
  model.delta_mean = coef(1);

  const Vector residuals =
      high.y().array() - model.rho * mu_low.array() - model.delta_mean;
  GpFitConfig delta_cfg = config.gp;
  delta_cfg.seed = mix_seed(config.gp.seed, 0x9d1f);
  model.gp_delta =
      std::make_shared<GPModel>(fit_gp(high.X(), residuals, delta_cfg));
  return model;
}

NARGPModel fit_nargp(const Dataset& low, const Dataset& high,
                     const MultiFidelityConfig& config) {
  if (high.p() != low.p()) throw DimensionMismatch("fidelity levels disagree on p");
  if (high.n() < 3) throw InvalidArgument("fit_nargp needs n_H >= 3");

  NARGPModel model;
  model.gp_low = std::make_shared<GPModel>(fit_gp(low.X(), low.y(), config.gp));

  // augmented inputs [X_H, mu_low(X_H)]: the level-1 posterior mean, not y_L
  const Vector mu_low = model.gp_low->predict(high.X()).mean;
  Matrix augmented(high.n(), high.p() + 1);
  augmented.leftCols(high.p()) = high.X();
  augmented.rightCols(1) = mu_low;

  const Eigen::Index p = high.p();
  Vector ls_x(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double range = high.X().col(j).maxCoeff() - high.X().col(j).minCoeff();
    ls_x(j) = range > 1e-12 ? range : 1.0;
  }
  const double z_range = mu_low.maxCoeff() - mu_low.minCoeff();
  Vector ls_z(1);
  ls_z(0) = z_range > 1e-12 ? z_range : 1.0;
  double y_var = (high.y().array() - high.y().mean()).square().sum() /
                 std::max<Eigen::Index>(1, high.n() - 1);
  if (y_var < 1e-12) y_var = 1.0;

  NargpCompositeKernel prototype(SquaredExponentialArd(1.0, ls_x),
                                 SquaredExponentialArd(y_var, ls_z),
                                 SquaredExponentialArd(0.1 * y_var, ls_x));
  GpFitConfig high_cfg = config.gp;
  high_cfg.seed = mix_seed(config.gp.seed, 0x41a7);
  model.gp_high = std::make_shared<GPModel>(
      fit_gp_kernel(augmented, high.y(), prototype, high_cfg));
  return model;
}

PredictResult predict_nargp(const NARGPModel& model, const Matrix& Xstar,
                            int n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw InvalidArgument("predict_nargp needs n_mc >= 1");
  if (Xstar.cols() != model.input_dim()) {
    throw DimensionMismatch("predict_nargp: query has " +
                            std::to_string(Xstar.cols()) + " columns, expected " +
                            std::to_string(model.input_dim()));
  }
  const Eigen::Index m = Xstar.rows();
  const PredictResult low = model.gp_low->predict(Xstar);

  PredictResult out;
  out.mean = Vector(m);
  out.variance = Vector(m);

  Matrix augmented(n_mc, Xstar.cols() + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    // per-point substream keeps the result independent of evaluation order
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    const double sd = std::sqrt(std::max(low.variance(i), 0.0));
    augmented.leftCols(Xstar.cols()) = Xstar.row(i).replicate(n_mc, 1);
    for (int s = 0; s < n_mc; ++s) {
      augmented(s, Xstar.cols()) = low.mean(i) + sd * rng.normal();
    }
    const PredictResult high = model.gp_high->predict(augmented);
    const double mean = high.mean.mean();
    const double avg_var = high.variance.mean();
    const double var_mean =
        (high.mean.array() - mean).square().sum() / static_cast<double>(n_mc);
    out.mean(i) = mean;
    // law of total variance: E[var] + var[E]
    out.variance(i) = avg_var + var_mean;
  }
  return out;
}

}  // namespace rmfgp
