#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "rmfgp/dataset.hpp"

using namespace rmfgp;

TEST_CASE("sample_uniform is deterministic and in range") {
  const Matrix a = sample_uniform(3, 2, 7);
  const Matrix b = sample_uniform(3, 2, 7);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);  // bit-identical

  const Matrix c = sample_uniform(200, 6, 42);
  CHECK(c.minCoeff() >= 0.0);
  CHECK(c.maxCoeff() < 1.0);

  const Matrix d = sample_uniform(1000, 1, 1);
  const double mean = d.mean();
  CHECK(mean > 0.45);
  CHECK(mean < 0.55);

  CHECK((sample_uniform(3, 2, 8) - sample_uniform(3, 2, 7)).norm() > 0.0);
}

TEST_CASE("dataset construction validates shapes and finiteness") {
  Matrix X(2, 2);
  X << 0, 1, 2, 3;
  Vector y(2);
  y << 1, 2;
  CHECK_NOTHROW(Dataset(X, y, Fidelity::Low));

  Vector bad_len(3);
  bad_len.setZero();
  CHECK_THROWS_AS(Dataset(X, bad_len, Fidelity::Low), DimensionMismatch);

  Matrix with_nan = X;
  with_nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(Dataset(with_nan, y, Fidelity::Low), NonFiniteValue);

  Vector with_inf = y;
  with_inf(1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset(X, with_inf, Fidelity::Low), NonFiniteValue);
}

TEST_CASE("fit_standardizer matches the hand-computed 4-point dataset") {
  // X = [[0,0],[2,0],[0,2],[2,2]]: mean (1,1), covariance (4/3) I with n-1
  Matrix X(4, 2);
  X << 0, 0, 2, 0, 0, 2, 2, 2;
  const Standardizer std_ = fit_standardizer(X, 0.0);
  CHECK(std_.mu(0) == doctest::Approx(1.0));
  CHECK(std_.mu(1) == doctest::Approx(1.0));
  const double expected = std::sqrt(3.0 / 4.0);
  CHECK(std_.sigma_inv_sqrt(0, 0) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(std_.sigma_inv_sqrt(1, 1) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(std_.sigma_inv_sqrt(0, 1) == doctest::Approx(0.0));

  // standardizing the row (2,2) gives (sqrt(3/4), sqrt(3/4))
  Matrix row(1, 2);
  row << 2, 2;
  const Matrix z = standardize(std_, row);
  CHECK(z(0, 0) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(z(0, 1) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("fit_standardizer rejects a constant column with no ridge") {
  Matrix X(5, 2);
  X << 1, 3, 1, 4, 1, 5, 1, 6, 1, 7;
  CHECK_THROWS_AS(fit_standardizer(X, 0.0), SingularCovariance);
}

TEST_CASE("standardizer whitens its own fitting data") {
  const Matrix X = sample_uniform(80, 4, 3);
  const Standardizer std_ = fit_standardizer(X, 0.0);
  const Matrix Z = standardize(std_, X);
  CHECK(Z.colwise().mean().cwiseAbs().maxCoeff() < 1e-8);
  const Matrix cov = Z.transpose() * Z / (Z.rows() - 1.0);
  CHECK((cov - Matrix::Identity(4, 4)).norm() < 1e-6);

  // the center maps to the origin
  Matrix mu_row(1, 4);
  mu_row = std_.mu.transpose();
  CHECK(standardize(std_, mu_row).cwiseAbs().maxCoeff() < 1e-12);

  Matrix wrong(1, 3);
  wrong.setZero();
  CHECK_THROWS_AS(standardize(std_, wrong), DimensionMismatch);
}

TEST_CASE("make_nested draws a reproducible subset of the low inputs") {
  const Matrix X = sample_uniform(30, 3, 11);
  Vector y(30);
  for (int i = 0; i < 30; ++i) y(i) = X.row(i).sum();
  const Dataset low(X, y, Fidelity::Low);
  const auto high_eval = [](const Eigen::Ref<const Vector>& x) {
    return 2.0 * x.sum();
  };

  const NestedDataset nested = make_nested(low, 10, high_eval, 5);
  CHECK(nested.data.n() == 10);
  CHECK(nested.indices.size() == 10);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const auto row = static_cast<Eigen::Index>(nested.indices[static_cast<std::size_t>(i)]);
    CHECK((nested.data.X().row(i) - X.row(row)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(nested.data.y()(i) == doctest::Approx(2.0 * X.row(row).sum()));
  }

  const NestedDataset again = make_nested(low, 10, high_eval, 5);
  CHECK(nested.indices == again.indices);

  const NestedDataset full = make_nested(low, 30, high_eval, 1);
  CHECK(full.data.n() == 30);

  CHECK_THROWS_AS(make_nested(low, 0, high_eval, 1), InvalidArgument);
  CHECK_THROWS_AS(make_nested(low, 31, high_eval, 1), InvalidArgument);
}

TEST_CASE("csv round-trip preserves float64 exactly") {
  const Matrix X = sample_uniform(17, 3, 99);
  Vector y(17);
  for (int i = 0; i < 17; ++i) y(i) = std::sin(100.0 * X(i, 0)) * 1e-7;
  const Dataset data(X, y, Fidelity::Test);

  const auto path = std::filesystem::temp_directory_path() / "rmfgp_roundtrip.csv";
  data.to_csv(path.string());
  const Dataset back = Dataset::from_csv(path.string(), Fidelity::Test);
  CHECK(back.n() == data.n());
  CHECK(back.p() == data.p());
  CHECK((back.X() - data.X()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.y() - data.y()).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}
