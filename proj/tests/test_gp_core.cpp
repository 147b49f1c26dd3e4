#include <doctest.h>

#include <cmath>

#include "rmfgp/gp.hpp"
#include "rmfgp/rng.hpp"

using namespace rmfgp;

namespace {

ArdKernelParams make_params(double sf2, std::initializer_list<double> ls,
                            double noise) {
  ArdKernelParams p;
  p.signal_variance = sf2;
  p.lengthscales = Vector(static_cast<Eigen::Index>(ls.size()));
  Eigen::Index i = 0;
  for (double l : ls) p.lengthscales(i++) = l;
  p.noise_variance = noise;
  return p;
}

// Direct 2x2 oracle for the posterior and marginal likelihood: explicit
// matrix inversion, no Cholesky. Used to pin the gp_core formulas.
struct TwoPointOracle {
  Matrix X;
  Vector y;
  ArdKernelParams params;

  double k(const Vector& a, const Vector& b) const {
    const double r2 =
        ((a - b).array() / params.lengthscales.array()).square().sum();
    return params.signal_variance * std::exp(-0.5 * r2);
  }

  void invert(Matrix& Kinv, double& det) const {
    const double k00 = k(X.row(0), X.row(0)) + params.noise_variance;
    const double k11 = k(X.row(1), X.row(1)) + params.noise_variance;
    const double k01 = k(X.row(0), X.row(1));
    det = k00 * k11 - k01 * k01;
    Kinv = Matrix(2, 2);
    Kinv << k11 / det, -k01 / det, -k01 / det, k00 / det;
  }

  double lml() const {
    Matrix Kinv;
    double det;
    invert(Kinv, det);
    return -0.5 * y.dot(Kinv * y) - 0.5 * std::log(det) - std::log(2.0 * M_PI);
  }

  void posterior(const Vector& xs, double& mean, double& var) const {
    Matrix Kinv;
    double det;
    invert(Kinv, det);
    Vector ks(2);
    ks << k(xs, X.row(0)), k(xs, X.row(1));
    mean = ks.dot(Kinv * y);
    var = k(xs, xs) - ks.dot(Kinv * ks);
  }
};

}  // namespace

TEST_CASE("kernel_eval matches the ARD-SE formula") {
  const auto p = make_params(1.0, {1.0}, 0.0);
  Vector x0(1), x1(1);
  x0 << 0.0;
  x1 << 1.0;
  CHECK(kernel_eval(p, x0, x0) == doctest::Approx(1.0));
  CHECK(kernel_eval(p, x0, x1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-7));
  CHECK(kernel_eval(p, x0, x1) == doctest::Approx(kernel_eval(p, x1, x0)));

  // monotone decay in each coordinate distance
  double prev = 1.0;
  for (double dist : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    Vector far(1);
    far << dist;
    const double v = kernel_eval(p, x0, far);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }

  const auto p3 = make_params(2.5, {0.7, 1.3, 2.0}, 0.0);
  Vector a(3), b(3);
  a << 0.1, 0.4, -0.2;
  b << 0.5, -0.3, 0.9;
  CHECK(kernel_eval(p3, a, a) == doctest::Approx(2.5));
  Vector wrong(2);
  wrong.setZero();
  CHECK_THROWS_AS(kernel_eval(p3, a, wrong), DimensionMismatch);
}

TEST_CASE("log_marginal_likelihood: scalar case and permutation symmetry") {
  // n=1, k(x,x)=1, noise 0, y=0: -1/2 log(2 pi)
  Matrix X(1, 1);
  X << 0.3;
  Vector y(1);
  y << 0.0;
  const auto p = make_params(1.0, {1.0}, 0.0);
  CHECK(log_marginal_likelihood(X, y, p) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-9));

  Matrix X2(2, 2);
  X2 << 0.1, 0.9, 0.7, 0.2;
  Vector y2(2);
  y2 << 1.0, -0.5;
  const auto p2 = make_params(1.3, {0.8, 1.1}, 0.01);
  const double before = log_marginal_likelihood(X2, y2, p2);
  Matrix Xp = X2.colwise().reverse().eval();
  Vector yp = y2.reverse().eval();
  CHECK(log_marginal_likelihood(Xp, yp, p2) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("log_marginal_likelihood matches the explicit 2x2 inversion oracle") {
  TwoPointOracle oracle;
  oracle.X = Matrix(2, 2);
  oracle.X << 0.15, 0.3, 0.8, 0.65;
  oracle.y = Vector(2);
  oracle.y << 0.7, -1.2;
  oracle.params = make_params(1.7, {0.6, 0.9}, 0.05);
  CHECK(log_marginal_likelihood(oracle.X, oracle.y, oracle.params) ==
        doctest::Approx(oracle.lml()).epsilon(1e-10));
}

TEST_CASE("analytic gradient agrees with central finite differences") {
  Rng rng(12345);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_u64() % 8);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.next_u64() % 6);
    Matrix X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rng.uniform();
    }
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.normal();

    ArdKernelParams params;
    params.signal_variance = std::exp(rng.uniform(-1.0, 1.0));
    params.lengthscales = Vector(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      params.lengthscales(j) = std::exp(rng.uniform(-1.0, 0.5));
    }
    params.noise_variance = std::exp(rng.uniform(-5.0, -2.0));

    const Vector grad = lml_gradient(X, y, params);

    // central differences in log space, step 1e-5
    const double h = 1e-5;
    Vector theta(p + 2);
    theta(0) = std::log(params.signal_variance);
    theta.segment(1, p) = params.lengthscales.array().log();
    theta(p + 1) = std::log(params.noise_variance);
    const auto eval = [&](const Vector& t) {
      ArdKernelParams q;
      q.signal_variance = std::exp(t(0));
      q.lengthscales = t.segment(1, p).array().exp();
      q.noise_variance = std::exp(t(p + 1));
      return log_marginal_likelihood(X, y, q);
    };
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Vector tp = theta, tm = theta;
      tp(k) += h;
      tm(k) -= h;
      const double fd = (eval(tp) - eval(tm)) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad(k)), 1e-8});
      CHECK(std::abs(grad(k) - fd) / denom < 1e-4);
    }
  }
}

TEST_CASE("gradient scaling identity: doubling sf2 and y jointly") {
  // scaling y by c and signal variance by c^2 leaves lengthscale gradients
  // unchanged when the noise scales along; verified with noise scaled too
  Rng rng(777);
  Matrix X(6, 2);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) X(i, j) = rng.uniform();
  Vector y(6);
  for (int i = 0; i < 6; ++i) y(i) = rng.normal();

  auto p1 = make_params(0.9, {0.5, 1.2}, 0.01);
  auto p2 = p1;
  p2.signal_variance *= 4.0;
  p2.noise_variance *= 4.0;
  const Vector g1 = lml_gradient(X, y, p1);
  const Vector g2 = lml_gradient(X, 2.0 * y, p2);
  CHECK((g1.segment(1, 2) - g2.segment(1, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fit_gp recovers a smooth function and is deterministic") {
  const Eigen::Index n = 15;
  Matrix X(n, 1);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = static_cast<double>(i) / static_cast<double>(n - 1);
    y(i) = std::sin(2.0 * M_PI * X(i, 0));
  }
  GpFitConfig cfg;
  cfg.restarts = 5;
  cfg.seed = 3;
  cfg.pin_noise = 0.0;
  const GPModel model = fit_gp(X, y, cfg);

  Matrix grid(100, 1);
  Vector truth(100);
  for (int i = 0; i < 100; ++i) {
    grid(i, 0) = static_cast<double>(i) / 99.0;
    truth(i) = std::sin(2.0 * M_PI * grid(i, 0));
  }
  const PredictResult pred = model.predict(grid);
  const double rmse =
      std::sqrt((pred.mean - truth).squaredNorm() / truth.size());
  CHECK(rmse < 1e-2);

  const GPModel again = fit_gp(X, y, cfg);
  CHECK((model.kernel().params() - again.kernel().params()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(model.noise_variance() == again.noise_variance());

  // stationarity at the found optimum (interior: noisy data, learned noise)
  GpFitConfig noisy_cfg;
  noisy_cfg.restarts = 6;
  noisy_cfg.seed = 8;
  Vector y_noisy = y;
  Rng rng(4);
  for (Eigen::Index i = 0; i < n; ++i) y_noisy(i) += 0.1 * rng.normal();
  const GPModel noisy = fit_gp(X, y_noisy, noisy_cfg);
  ArdKernelParams at;
  const auto& k = dynamic_cast<const SquaredExponentialArd&>(noisy.kernel());
  at.signal_variance = k.signal_variance();
  at.lengthscales = k.lengthscales();
  at.noise_variance = noisy.noise_variance();
  const Vector grad =
      lml_gradient(noisy.train_X(), noisy.train_y().array() - noisy.y_offset(), at);
  CHECK(grad.cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("fit_gp on constant response predicts the constant") {
  Matrix X = Matrix::Random(8, 2);
  Vector y = Vector::Constant(8, 3.25);
  GpFitConfig cfg;
  cfg.restarts = 3;
  cfg.seed = 1;
  const GPModel model = fit_gp(X, y, cfg);
  Matrix q(2, 2);
  q << 0.1, 0.2, -4.0, 9.0;
  const PredictResult pred = model.predict(q);
  CHECK(pred.mean(0) == doctest::Approx(3.25).epsilon(1e-3));
  CHECK(pred.mean(1) == doctest::Approx(3.25).epsilon(1e-3));
}

TEST_CASE("predict: interpolation, prior reversion, 2x2 oracle, variance >= 0") {
  Matrix X(5, 1);
  X << 0.0, 0.25, 0.5, 0.75, 1.0;
  Vector y(5);
  y << 0.0, 0.7, 1.0, 0.7, 0.0;
  GpFitConfig cfg;
  cfg.restarts = 4;
  cfg.seed = 5;
  cfg.pin_noise = 0.0;
  cfg.center_response = false;
  const GPModel model = fit_gp(X, y, cfg);

  // noise-free interpolation at the training points
  const PredictResult at_train = model.predict(X);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(std::abs(at_train.mean(i) - y(i)) <= 1e-6 * (1.0 + std::abs(y(i))));
    CHECK(at_train.variance(i) >= 0.0);
    CHECK(at_train.variance(i) < 1e-6);
  }

  // far from the data a zero-mean GP reverts to the prior
  const auto& kern = dynamic_cast<const SquaredExponentialArd&>(model.kernel());
  const double reach = 10.0 * kern.lengthscales().maxCoeff();
  Matrix far(1, 1);
  far << 1.0 + reach;
  const PredictResult far_pred = model.predict(far);
  CHECK(std::abs(far_pred.mean(0)) < 1e-3 * std::max(1.0, kern.signal_variance()));
  CHECK(far_pred.variance(0) ==
        doctest::Approx(kern.signal_variance()).epsilon(1e-3));

  // 2-point model against the explicit inversion oracle
  TwoPointOracle oracle;
  oracle.X = Matrix(2, 1);
  oracle.X << 0.2, 0.8;
  oracle.y = Vector(2);
  oracle.y << 1.0, -0.4;
  oracle.params = make_params(1.2, {0.5}, 0.02);

  SquaredExponentialArd kernel(1.2, Vector::Constant(1, 0.5));
  const CholOutcome chol = cholesky_with_jitter(kernel.matrix(oracle.X), 0.02);
  const Vector alpha = chol.llt.solve(oracle.y);
  const GPModel manual(oracle.X, oracle.y, kernel.clone(), 0.02, 0.0, chol.jitter,
                       Matrix(chol.llt.matrixL()), alpha, 0.0);
  Matrix q(1, 1);
  q << 0.4;
  const PredictResult got = manual.predict(q);
  double want_mean, want_var;
  oracle.posterior(q.row(0).transpose(), want_mean, want_var);
  CHECK(got.mean(0) == doctest::Approx(want_mean).epsilon(1e-10));
  CHECK(got.variance(0) == doctest::Approx(want_var).epsilon(1e-10));

  Matrix wrong(1, 2);
  wrong.setZero();
  CHECK_THROWS_AS(model.predict(wrong), DimensionMismatch);
}

TEST_CASE("fit achieves at least the likelihood of every initial point") {
  // multistart contract: best final LML >= LML at the default initial point
  const Matrix X = sample_uniform(12, 2, 21);
  Vector y(12);
  for (int i = 0; i < 12; ++i) y(i) = std::cos(3.0 * X(i, 0)) + 0.3 * X(i, 1);
  GpFitConfig cfg;
  cfg.restarts = 5;
  cfg.seed = 9;
  const GPModel model = fit_gp(X, y, cfg);

  Vector ls(2);
  for (int j = 0; j < 2; ++j) {
    ls(j) = X.col(j).maxCoeff() - X.col(j).minCoeff();
  }
  const Vector yc = y.array() - y.mean();
  const double y_var = yc.squaredNorm() / 11.0;
  ArdKernelParams init;
  init.signal_variance = y_var;
  init.lengthscales = ls;
  init.noise_variance = std::max(1e-4 * y_var, 1e-8);
  CHECK(model.lml() >= log_marginal_likelihood(X, yc, init) - 1e-9);
}
