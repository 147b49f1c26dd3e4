#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rmfgp/active_learning.hpp"
#include "rmfgp/dataset.hpp"
#include "rmfgp/gpdr.hpp"
#include "rmfgp/multifidelity.hpp"
#include "rmfgp/sdr.hpp"

namespace rmfgp {

struct RmfgpConfig {
  int flag = 1;            // 0: rotate only, 1: reduce to d_hat dimensions
  Eigen::Index s = 3;      // intermediate dimension, d_hat < s < p under flag=1
  int n_slices = 10;
  std::vector<int> batch_sizes;  // high-fidelity points added per iteration
  double eta = 0.0;              // error threshold for early stop (0 disables)
  int n_mc = 100;
  std::uint64_t seed = 0;
  int gpdr_alternations = 5;
  GpFitConfig gp;

  // Supplies true high-fidelity labels for acquired points (original,
  // unrotated coordinates). Required when batch_sizes is nonempty.
  Evaluator high_eval;

  // Test hook: force every SAVE rotation to identity (flag=0 surrogate then
  // coincides with a plain GP on the raw high-fidelity data).
  bool force_identity_rotations = false;
};

struct RmfgpIterationRecord {
  Vector save_eigenvalues;      // spectrum of the prediction-SAVE this round
  double test_relative_error;   // NARGP error on the test set (Eq. 10 form)
  std::vector<std::size_t> acquired;  // low-set indices added after this round
};

struct RmfgpResult {
  Matrix A_T;                  // rotation from low-fidelity SAVE
  std::vector<Matrix> A_hats;  // per-iteration prediction-SAVE rotations
  Matrix M1;                   // A_T * prod_i A_hat_i, orthogonal
  Matrix M1_hat;               // first s columns of M1 (flag=1 only)
  Matrix M2;                   // s x d_hat from the projected-kernel fit
  Matrix M;                    // orthonormalized M1_hat * M2, p x d_hat
  int d_hat = 0;               // BIC dimension from the final prediction-SAVE
  Vector final_save_eigenvalues;
  Vector bic_g;                // G(k) trace backing d_hat
  std::shared_ptr<const GPModel> surrogate;  // final reduced/rotated GP
  std::shared_ptr<const NARGPModel> nargp;   // last multi-fidelity fit
  std::optional<Dataset> final_high;  // high set after acquisition (original coords)
  std::vector<std::size_t> final_high_indices;  // rows of the low set
  std::vector<RmfgpIterationRecord> history;
  double final_test_relative_error = 0.0;  // of the final surrogate
  int flag = 0;
  std::vector<double> gpdr_lml_trace;

  // Predicts at original p-dimensional inputs, applying the stored rotation
  // (flag=0) or reduction (flag=1) before querying the surrogate.
  PredictResult predict(const Matrix& Xstar) const;
};

// X * R with an orthogonality check on R (NotOrthogonal otherwise).
Matrix rotate_inputs(const Matrix& X, const Matrix& R);

// Algorithm: SAVE on the low data -> rotate; loop { fit NARGP, predict the
// test inputs, SAVE on the predictions -> rotate, record error, acquire a
// batch }; then M1 = A_T * prod A_hat_i and the flag-dependent terminal
// surrogate. `low` must contain the initial high rows (nested split).
RmfgpResult run_rmfgp(const Dataset& low, const NestedDataset& high,
                      const Dataset& test, const RmfgpConfig& config);

// Terminal surrogate from a completed pipeline result: flag=0 fits a GP on
// the M1-rotated high inputs, flag=1 on the M-projected ones.
std::shared_ptr<const GPModel> build_final_surrogate(const RmfgpResult& result,
                                                     const Dataset& high,
                                                     const RmfgpConfig& config,
                                                     int flag);

}  // namespace rmfgp
