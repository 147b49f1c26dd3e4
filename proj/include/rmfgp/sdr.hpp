#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rmfgp/dataset.hpp"

namespace rmfgp {

// Equal-frequency slice assignment: labels in 0..H-1, every slice nonempty.
struct SliceSpec {
  int n_slices = 0;
  std::vector<int> labels;  // one per point
};

// Output of SIR/SAVE: candidate matrix, spectrum, directions and the full
// orthonormal rotation used by the RMFGP pipeline.
struct SdrResult {
  Matrix M;            // p x p symmetric PSD candidate matrix
  Vector eigenvalues;  // descending
  Matrix directions;   // beta_k = Sigma^{-1/2} v_k, columns ordered by eigenvalue
  Matrix rotation;     // p x p orthonormal (QR of directions, order preserved)
  Standardizer standardizer;
  bool degenerate = false;  // constant response: identity rotation, zero spectrum
};

struct SdrOptions {
  int n_slices = 10;
  double ridge = 1e-10;
  // Equal-frequency slice count is reduced to max(2, min(n_slices, n/5)) so
  // small samples keep at least ~5 points per slice.
  bool auto_reduce_slices = true;
};

// Equal-frequency slicing of the response; ties assigned to the lower slice.
// Throws TooFewPoints (n < H) or TooFewDistinct (cannot form H nonempty
// slices of distinct content).
SliceSpec slice_response(const Vector& y, int n_slices);

// Sliced inverse regression: M = sum_h p_h m_h m_h^T over standardized inputs.
SdrResult sir(const Matrix& X, const Vector& y, const SdrOptions& options = {});

// Sliced average variance estimation:
//   M = sum_h p_h (I - var_n(Z | slice h))^2.
// Slices need >= 2 points each (SliceTooSmall otherwise).
SdrResult save(const Matrix& X, const Vector& y, const SdrOptions& options = {});

struct BicResult {
  int d_hat = 0;
  Vector g;  // G(k) for k = 1..p-1 (raw values; argmax is what matters)
};

// BIC-type dimension selection over the eigenvalues of Vhat + I:
//   G(k) = (n/2) sum_{l=k+1..p} (log lambda_l + 1 - lambda_l)
//          - c_n * k (2p - k + 1) / 2
// eigenvalues must be >= 1 - 1e-10 (clamped up to 1). Lowest k wins ties.
BicResult bic_dimension(const Vector& eigenvalues, Eigen::Index n, Eigen::Index p,
                        double c_n);

// Penalty sequence used for benchmark reproduction; see bic_dimension.
double default_bic_penalty(Eigen::Index n);

// Frobenius distance between orthogonal projectors of the two column spans.
double subspace_distance(const Matrix& A, const Matrix& A_hat);

// Thin QR with a positive diagonal of R; preserves column order.
Matrix orthonormal_columns(const Matrix& A);

}  // namespace rmfgp
