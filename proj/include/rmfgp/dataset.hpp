#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rmfgp/errors.hpp"

namespace rmfgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Fidelity { Low, High, Test };

// Pointwise evaluator mapping a p-dimensional input row to a scalar response.
using Evaluator = std::function<double(const Eigen::Ref<const Vector>&)>;

// Immutable (inputs, response, fidelity) triple. Rejects non-finite entries
// and shape mismatches at construction.
class Dataset {
 public:
  Dataset(Matrix X, Vector y, Fidelity fidelity);

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  Fidelity fidelity() const { return fidelity_; }
  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index p() const { return X_.cols(); }

  // CSV with header x1,...,xp,y at full float64 round-trip precision.
  void to_csv(const std::string& path) const;
  static Dataset from_csv(const std::string& path, Fidelity fidelity);

 private:
  Matrix X_;
  Vector y_;
  Fidelity fidelity_;
};

// A high-fidelity dataset drawn as a subset of a low-fidelity one, with the
// chosen row indices recorded so the acquisition pool is the exact complement.
struct NestedDataset {
  Dataset data;
  std::vector<std::size_t> indices;  // rows of the low set that were labeled
};

// Whitening transform: z = sigma_inv_sqrt * (x - mu).
struct Standardizer {
  Vector mu;
  Matrix sigma_inv_sqrt;  // symmetric positive definite
  double ridge = 0.0;
};

// n-by-p matrix of i.i.d. uniform [0,1) draws; bit-identical for identical
// (n, p, seed) triples.
Matrix sample_uniform(Eigen::Index n, Eigen::Index p, std::uint64_t seed);

// Sample mean and inverse square root of the (divisor n-1) sample covariance,
// via symmetric eigendecomposition of cov + ridge*I. Throws SingularCovariance
// when an eigenvalue is at or below machine tolerance.
Standardizer fit_standardizer(const Matrix& X, double ridge = 1e-10);

Matrix standardize(const Standardizer& std_, const Matrix& X);

// Seeded uniform subset of the low-fidelity inputs, labeled by high_eval.
NestedDataset make_nested(const Dataset& low, Eigen::Index n_high,
                          const Evaluator& high_eval, std::uint64_t seed);

}  // namespace rmfgp
