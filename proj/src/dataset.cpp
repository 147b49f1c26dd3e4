#include "rmfgp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rmfgp/csv.hpp"
#include "rmfgp/rng.hpp"

namespace rmfgp {

namespace {

void require_finite(const Matrix& X, const char* what) {
  if (!X.allFinite()) {
    throw NonFiniteValue(std::string(what) + " contains NaN or Inf");
  }
}

}  // namespace

Dataset::Dataset(Matrix X, Vector y, Fidelity fidelity)
    : X_(std::move(X)), y_(std::move(y)), fidelity_(fidelity) {
  if (X_.rows() < 1 || X_.cols() < 1) {
    throw InvalidArgument("dataset needs n >= 1 and p >= 1");
  }
  if (y_.size() != X_.rows()) {
    throw DimensionMismatch("response length " + std::to_string(y_.size()) +
                            " != row count " + std::to_string(X_.rows()));
  }
  require_finite(X_, "inputs");
  require_finite(y_, "response");
}

void Dataset::to_csv(const std::string& path) const {
  CsvWriter w(path);
  for (Eigen::Index j = 0; j < p(); ++j) {
    w.cell("x" + std::to_string(j + 1));
  }
  w.cell("y");
  w.end_row();
  for (Eigen::Index i = 0; i < n(); ++i) {
    for (Eigen::Index j = 0; j < p(); ++j) w.cell(X_(i, j));
    w.cell(y_(i));
    w.end_row();
  }
  w.flush();
}

Dataset Dataset::from_csv(const std::string& path, Fidelity fidelity) {
  const auto rows = read_csv(path);
  if (rows.size() < 2) throw IoError("csv " + path + " has no data rows");
  const auto& header = rows.front();
  if (header.size() < 2 || header.back() != "y") {
    throw IoError("csv " + path + " header must be x1,...,xp,y");
  }
  const Eigen::Index p = static_cast<Eigen::Index>(header.size()) - 1;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size()) - 1;
  Matrix X(n, p);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i) + 1];
    if (static_cast<Eigen::Index>(row.size()) != p + 1) {
      throw IoError("csv " + path + " row " + std::to_string(i + 2) +
                    " has wrong field count");
    }
    for (Eigen::Index j = 0; j <= p; ++j) {
      std::size_t used = 0;
      const double v = std::stod(row[static_cast<std::size_t>(j)], &used);
      if (used != row[static_cast<std::size_t>(j)].size()) {
        throw IoError("csv " + path + " has a non-numeric field");
      }
      if (j < p) {
        X(i, j) = v;
      } else {
        y(i) = v;
      }
    }
  }
  return Dataset(std::move(X), std::move(y), fidelity);
}

Matrix sample_uniform(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidArgument("sample_uniform needs n,p >= 1");
  Rng rng(seed);
  Matrix X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      X(i, j) = rng.uniform();
    }
  }
  return X;
}

Standardizer fit_standardizer(const Matrix& X, double ridge) {
  require_finite(X, "inputs");
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n < 2) throw InvalidArgument("fit_standardizer needs n >= 2");

  const Vector mu = X.colwise().mean();
  const Matrix centered = X.rowwise() - mu.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov.diagonal().array() += ridge;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    // retry with heavier regularization before giving up
    cov.diagonal().array() += 1e-6 - ridge;
    eig.compute(cov);
    if (eig.info() != Eigen::Success) {
      throw SingularCovariance("eigendecomposition of the sample covariance failed");
    }
    ridge = 1e-6;
  }
  const double tol = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if ((eig.eigenvalues().array() <= tol).any()) {
    throw SingularCovariance(
        "sample covariance is singular (an eigenvalue is at machine tolerance); "
        "increase ridge or provide more rows than columns");
  }
  Standardizer out;
  out.mu = mu;
  out.sigma_inv_sqrt = eig.eigenvectors() *
                       eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose();
  out.ridge = ridge;
  return out;
}

Matrix standardize(const Standardizer& std_, const Matrix& X) {
  if (X.cols() != std_.mu.size()) {
    throw DimensionMismatch("standardize: expected " + std::to_string(std_.mu.size()) +
                            " columns, got " + std::to_string(X.cols()));
  }
  return (X.rowwise() - std_.mu.transpose()) * std_.sigma_inv_sqrt;
}

NestedDataset make_nested(const Dataset& low, Eigen::Index n_high,
                          const Evaluator& high_eval, std::uint64_t seed) {
  if (n_high < 1 || n_high > low.n()) {
    throw InvalidArgument("make_nested needs 1 <= n_high <= n_low");
  }
  Rng rng(seed);
  auto picked = rng.sample_without_replacement(static_cast<std::size_t>(low.n()),
                                               static_cast<std::size_t>(n_high));
  std::sort(picked.begin(), picked.end());

  Matrix X(n_high, low.p());
  Vector y(n_high);
  for (Eigen::Index i = 0; i < n_high; ++i) {
    X.row(i) = low.X().row(static_cast<Eigen::Index>(picked[static_cast<std::size_t>(i)]));
    y(i) = high_eval(X.row(i).transpose());
  }
  return NestedDataset{Dataset(std::move(X), std::move(y), Fidelity::High),
                       std::move(picked)};
}

}  // namespace rmfgp
