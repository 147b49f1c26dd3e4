#include "rmfgp/rmfgp.hpp"

#include <algorithm>
#include <cmath>

#include "rmfgp/benchmarks.hpp"
#include "rmfgp/rng.hpp"

namespace rmfgp {

namespace {

void check_orthogonal(const Matrix& R, double tol, const char* who) {
  if (R.rows() != R.cols()) {
    throw NotOrthogonal(std::string(who) + ": matrix is not square");
  }
  const double err =
      (R.transpose() * R - Matrix::Identity(R.cols(), R.cols())).norm();
  if (err > tol) {
    throw NotOrthogonal(std::string(who) + ": ||R^T R - I||_F = " +
                        std::to_string(err));
  }
}

Matrix pick_rows(const Matrix& X, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        X.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

Matrix rotate_inputs(const Matrix& X, const Matrix& R) {
  if (X.cols() != R.rows()) {
    throw DimensionMismatch("rotate_inputs: X has " + std::to_string(X.cols()) +
                            " columns, R is " + std::to_string(R.rows()) + "x" +
                            std::to_string(R.cols()));
  }
  check_orthogonal(R, 1e-8, "rotate_inputs");
  return X * R;
}

PredictResult RmfgpResult::predict(const Matrix& Xstar) const {
  if (surrogate == nullptr) throw InvalidArgument("pipeline has no surrogate");
  const Matrix& transform = flag == 1 ? M : M1;
  return surrogate->predict(Xstar * transform);
}

std::shared_ptr<const GPModel> build_final_surrogate(const RmfgpResult& result,
                                                     const Dataset& high,
                                                     const RmfgpConfig& config,
                                                     int flag) {
  GpFitConfig gp = config.gp;
  gp.seed = mix_seed(config.seed, flag == 1 ? 0xf1a6u : 0xf1a0u);
  if (flag == 0) {
    return std::make_shared<GPModel>(fit_gp(high.X() * result.M1, high.y(), gp));
  }
  if (result.M.size() == 0) {
    throw InvalidArgument("result carries no reduction matrix (flag=0 run)");
  }
  return std::make_shared<GPModel>(fit_gp(high.X() * result.M, high.y(), gp));
}

RmfgpResult run_rmfgp(const Dataset& low, const NestedDataset& high,
                      const Dataset& test, const RmfgpConfig& config) {
  const Eigen::Index p = low.p();
  if (high.data.p() != p || test.p() != p) {
    throw DimensionMismatch("low/high/test disagree on input dimension");
  }
  if (high.data.n() < 3) throw InvalidArgument("run_rmfgp needs n_H >= 3");
  if (config.flag != 0 && config.flag != 1) {
    throw InvalidArgument("flag must be 0 or 1");
  }
  if (config.flag == 1 && !(config.s < p)) {
    throw DimensionOrder("flag=1 requires s < p; got s = " +
                         std::to_string(config.s) + ", p = " + std::to_string(p));
  }
  if (!config.batch_sizes.empty() && !config.high_eval) {
    throw InvalidArgument("acquisition schedule needs a high_eval labeler");
  }

  SdrOptions sdr_opts;
  sdr_opts.n_slices = config.n_slices;

  RmfgpResult result;
  result.flag = config.flag;

  // growing high-fidelity state and its complement pool, in original coords
  Matrix high_X = high.data.X();
  Vector high_y = high.data.y();
  std::vector<std::size_t> high_indices = high.indices;
  std::vector<bool> in_high(static_cast<std::size_t>(low.n()), false);
  for (std::size_t idx : high_indices) in_high[idx] = true;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < static_cast<std::size_t>(low.n()); ++i) {
    if (!in_high[i]) pool.push_back(i);
  }

  // rotation from the low-fidelity data only
  result.A_T = config.force_identity_rotations
                   ? Matrix::Identity(p, p)
                   : save(low.X(), low.y(), sdr_opts).rotation;
  Matrix cumulative = result.A_T;

  AcquisitionState state;
  state.pool_indices = pool;
  state.eta = config.eta;
  state.max_iters = static_cast<int>(config.batch_sizes.size()) + 1;
  state.batch_sizes = config.batch_sizes;

  MultiFidelityConfig mf;
  mf.gp = config.gp;

  std::shared_ptr<const NARGPModel> nargp;
  SdrResult prediction_save;

  for (int iteration = 1;; ++iteration) {
    const Matrix frame = cumulative;  // the frame this iteration's model lives in
    const Dataset low_rot(low.X() * frame, low.y(), Fidelity::Low);
    const Dataset high_rot(high_X * frame, high_y, Fidelity::High);

    mf.gp.seed = mix_seed(config.seed, 0x100u + static_cast<std::uint64_t>(iteration));
    nargp = std::make_shared<NARGPModel>(fit_nargp(low_rot, high_rot, mf));

    const PredictResult pred = predict_nargp(
        *nargp, test.X() * frame, config.n_mc,
        mix_seed(config.seed, 0x200u + static_cast<std::uint64_t>(iteration)));
    const double err = relative_error(test.y(), pred.mean);

    prediction_save = config.force_identity_rotations
                          ? SdrResult{Matrix::Zero(p, p), Vector::Zero(p),
                                      Matrix::Identity(p, p), Matrix::Identity(p, p),
                                      Standardizer{}, true}
                          : save(test.X() * frame, pred.mean, sdr_opts);
    result.A_hats.push_back(prediction_save.rotation);
    cumulative = cumulative * prediction_save.rotation;

    RmfgpIterationRecord record;
    record.save_eigenvalues = prediction_save.eigenvalues;
    record.test_relative_error = err;

    if (should_stop(err, state, iteration)) {
      result.history.push_back(std::move(record));
      break;
    }

    const auto batch = static_cast<std::size_t>(
        state.batch_sizes[static_cast<std::size_t>(iteration - 1)]);
    const Matrix pool_rot = pick_rows(low.X(), state.pool_indices) * frame;
    const auto chosen_local = acquire(
        *nargp, pool_rot, batch, config.n_mc,
        mix_seed(config.seed, 0x300u + static_cast<std::uint64_t>(iteration)));

    std::vector<std::size_t> chosen;
    for (std::size_t local : chosen_local) {
      chosen.push_back(state.pool_indices[local]);
    }
    std::sort(chosen.begin(), chosen.end());
    record.acquired = chosen;
    result.history.push_back(std::move(record));

    const Eigen::Index old_n = high_X.rows();
    high_X.conservativeResize(old_n + static_cast<Eigen::Index>(chosen.size()),
                              Eigen::NoChange);
    high_y.conservativeResize(old_n + static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(chosen[i]);
      high_X.row(old_n + static_cast<Eigen::Index>(i)) = low.X().row(row);
      high_y(old_n + static_cast<Eigen::Index>(i)) =
          config.high_eval(low.X().row(row).transpose());
      high_indices.push_back(chosen[i]);
    }
    std::vector<std::size_t> next_pool;
    for (std::size_t idx : state.pool_indices) {
      if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end()) {
        next_pool.push_back(idx);
      }
    }
    state.pool_indices = std::move(next_pool);
  }

  result.M1 = cumulative;
  check_orthogonal(result.M1, 1e-8, "M1");
  result.nargp = nargp;
  result.final_high.emplace(high_X, high_y, Fidelity::High);
  result.final_high_indices = high_indices;
  result.final_save_eigenvalues = prediction_save.eigenvalues;

  if (config.flag == 1) {
    const Vector lambda = prediction_save.eigenvalues.array() + 1.0;
    const BicResult bic =
        bic_dimension(lambda, test.n(), p, default_bic_penalty(test.n()));
    result.d_hat = bic.d_hat;
    result.bic_g = bic.g;
    if (!(result.d_hat < config.s)) {
      throw DimensionOrder("BIC produced d_hat = " + std::to_string(result.d_hat) +
                           " which is not below s = " + std::to_string(config.s));
    }
    result.M1_hat = result.M1.leftCols(config.s);

    GpdrConfig gpdr_cfg;
    gpdr_cfg.alternations = config.gpdr_alternations;
    gpdr_cfg.gp = config.gp;
    gpdr_cfg.gp.seed = mix_seed(config.seed, 0x6d2u);
    const GpdrResult gpdr = fit_projected_gp(high_X * result.M1_hat, high_y,
                                             result.d_hat, gpdr_cfg);
    result.M2 = gpdr.W;
    result.gpdr_lml_trace = gpdr.lml_trace;
    result.M = orthonormal_columns(result.M1_hat * result.M2);
  }

  result.surrogate =
      build_final_surrogate(result, *result.final_high, config, config.flag);
  const PredictResult final_pred = result.predict(test.X());
  result.final_test_relative_error = relative_error(test.y(), final_pred.mean);
  return result;
}

}  // namespace rmfgp
