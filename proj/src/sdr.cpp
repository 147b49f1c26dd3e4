#include "rmfgp/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace rmfgp {

namespace {

// Deterministic eigenvector sign: largest-magnitude entry positive.
void canonicalize_columns(Matrix& V) {
  for (Eigen::Index k = 0; k < V.cols(); ++k) {
    Eigen::Index at = 0;
    V.col(k).cwiseAbs().maxCoeff(&at);
    if (V(at, k) < 0.0) V.col(k) = -V.col(k);
  }
}

SdrResult finish(const Matrix& M, const Standardizer& std_, Eigen::Index p) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()));
  if (eig.info() != Eigen::Success) {
    throw SingularCovariance("eigendecomposition of the candidate matrix failed");
  }
  SdrResult out;
  out.M = 0.5 * (M + M.transpose());
  out.eigenvalues = eig.eigenvalues().reverse();
  Matrix V = eig.eigenvectors().rowwise().reverse();
  canonicalize_columns(V);
  out.directions = std_.sigma_inv_sqrt * V;
  out.rotation = orthonormal_columns(out.directions);
  out.standardizer = std_;
  (void)p;
  return out;
}

SdrResult degenerate_result(const Standardizer& std_, Eigen::Index p) {
  SdrResult out;
  out.M = Matrix::Zero(p, p);
  out.eigenvalues = Vector::Zero(p);
  out.directions = Matrix::Identity(p, p);
  out.rotation = Matrix::Identity(p, p);
  out.standardizer = std_;
  out.degenerate = true;
  return out;
}

int effective_slices(const SdrOptions& options, Eigen::Index n) {
  if (!options.auto_reduce_slices) return options.n_slices;
  const int by_size = static_cast<int>(n / 5);
  return std::max(2, std::min(options.n_slices, by_size));
}

}  // namespace

SliceSpec slice_response(const Vector& y, int n_slices) {
  const Eigen::Index n = y.size();
  if (n_slices < 1) throw InvalidArgument("slice count must be >= 1");
  if (n < n_slices) {
    throw TooFewPoints("cannot form " + std::to_string(n_slices) + " slices from " +
                       std::to_string(n) + " points");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return y(a) < y(b); });

  // equal-frequency boundaries, then absorb ties into the lower slice
  std::vector<Eigen::Index> bounds(static_cast<std::size_t>(n_slices) + 1);
  for (int h = 0; h <= n_slices; ++h) {
    bounds[static_cast<std::size_t>(h)] = static_cast<Eigen::Index>(
        std::llround(static_cast<double>(h) * static_cast<double>(n) / n_slices));
  }
  for (int h = 1; h < n_slices; ++h) {
    auto& b = bounds[static_cast<std::size_t>(h)];
    while (b < n && b > 0 && y(order[static_cast<std::size_t>(b)]) ==
                                 y(order[static_cast<std::size_t>(b - 1)])) {
      ++b;
    }
  }

  SliceSpec spec;
  spec.labels.assign(static_cast<std::size_t>(n), 0);
  int label = 0;
  for (int h = 0; h < n_slices; ++h) {
    const Eigen::Index lo = std::min(bounds[static_cast<std::size_t>(h)],
                                     static_cast<Eigen::Index>(n));
    const Eigen::Index hi = std::min(bounds[static_cast<std::size_t>(h) + 1],
                                     static_cast<Eigen::Index>(n));
    if (hi <= lo) continue;  // emptied by tie absorption
    for (Eigen::Index i = lo; i < hi; ++i) {
      spec.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = label;
    }
    ++label;
  }
  spec.n_slices = label;
  if (n_slices >= 2 && spec.n_slices < 2) {
    throw TooFewDistinct("response has too few distinct values for 2 slices");
  }
  return spec;
}

namespace {

SdrResult sdr_common(const Matrix& X, const Vector& y, const SdrOptions& options,
                     bool use_save) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw DimensionMismatch("sdr: |y| != rows of X");

  const Standardizer std_ = fit_standardizer(X, options.ridge);
  if ((y.array() == y(0)).all()) {
    std::cerr << "rmfgp: constant response in " << (use_save ? "save" : "sir")
              << "; returning the identity rotation\n";
    return degenerate_result(std_, p);
  }
  const Matrix Z = standardize(std_, X);

  const int H = effective_slices(options, n);
  const SliceSpec spec = slice_response(y, H);
  std::vector<std::vector<Eigen::Index>> members(
      static_cast<std::size_t>(spec.n_slices));
  for (Eigen::Index i = 0; i < n; ++i) {
    members[static_cast<std::size_t>(spec.labels[static_cast<std::size_t>(i)])]
        .push_back(i);
  }

  Matrix M = Matrix::Zero(p, p);
  for (const auto& rows : members) {
    const auto nh = static_cast<Eigen::Index>(rows.size());
    const double weight = static_cast<double>(nh) / static_cast<double>(n);
    Matrix Zh(nh, p);
    for (Eigen::Index i = 0; i < nh; ++i) {
      Zh.row(i) = Z.row(rows[static_cast<std::size_t>(i)]);
    }
    if (use_save) {
      if (nh < 2) {
        throw SliceTooSmall("save needs >= 2 points per slice, got " +
                            std::to_string(nh));
      }
      const Vector mean = Zh.colwise().mean();
      const Matrix centered = Zh.rowwise() - mean.transpose();
      const Matrix var =
          centered.transpose() * centered / static_cast<double>(nh - 1);
      const Matrix dev = Matrix::Identity(p, p) - var;
      M += weight * dev * dev;
    } else {
      const Vector mean = Zh.colwise().mean();
      M += weight * mean * mean.transpose();
    }
  }
  return finish(M, std_, p);
}

}  // namespace

SdrResult sir(const Matrix& X, const Vector& y, const SdrOptions& options) {
  return sdr_common(X, y, options, false);
}

SdrResult save(const Matrix& X, const Vector& y, const SdrOptions& options) {
  return sdr_common(X, y, options, true);
}

BicResult bic_dimension(const Vector& eigenvalues, Eigen::Index n, Eigen::Index p,
                        double c_n) {
  if (eigenvalues.size() != p || p < 2) {
    throw InvalidArgument("bic_dimension needs p >= 2 eigenvalues");
  }
  Vector lam = eigenvalues;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (lam(i) < 1.0 - 1e-10) {
      throw InvalidEigenvalue("eigenvalue " + std::to_string(lam(i)) +
                              " below 1; expected eigenvalues of Vhat + I");
    }
    lam(i) = std::max(lam(i), 1.0);
  }

  BicResult out;
  out.g = Vector(p - 1);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 1; k < p; ++k) {
    double tail = 0.0;
    for (Eigen::Index l = k; l < p; ++l) {
      tail += std::log(lam(l)) + 1.0 - lam(l);
    }
    const double penalty =
        c_n * static_cast<double>(k) * static_cast<double>(2 * p - k + 1) / 2.0;
    const double g = 0.5 * static_cast<double>(n) * tail - penalty;
    out.g(k - 1) = g;
    if (g > best) {
      best = g;
      out.d_hat = static_cast<int>(k);
    }
  }
  return out;
}

double default_bic_penalty(Eigen::Index n) {
  // log n over-penalizes at benchmark sample sizes; the slower-growing
  // iterated logarithm still satisfies the divergence requirement.
  return std::log(std::log(std::max<Eigen::Index>(n, 3)));
}

Matrix orthonormal_columns(const Matrix& A) {
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
  const Matrix R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    if (R(k, k) < 0.0) Q.col(k) = -Q.col(k);
  }
  return Q;
}

double subspace_distance(const Matrix& A, const Matrix& A_hat) {
  if (A.rows() != A_hat.rows()) {
    throw DimensionMismatch("subspace_distance: row counts differ");
  }
  const auto projector = [](const Matrix& B) {
    Eigen::ColPivHouseholderQR<Matrix> rank_check(B);
    rank_check.setThreshold(1e-10);
    if (rank_check.rank() < B.cols()) {
      throw RankDeficient("subspace basis has linearly dependent columns");
    }
    Eigen::HouseholderQR<Matrix> qr(B);
    const Matrix Q = qr.householderQ() * Matrix::Identity(B.rows(), B.cols());
    return Matrix(Q * Q.transpose());
  };
  return (projector(A) - projector(A_hat)).norm();
}

}  // namespace rmfgp
