#include "rmfgp/kernels.hpp"

#include <cmath>

namespace rmfgp {

namespace {

void check_dim(Eigen::Index got, Eigen::Index want, const char* who) {
  if (got != want) {
    throw DimensionMismatch(std::string(who) + ": expected dimension " +
                            std::to_string(want) + ", got " + std::to_string(got));
  }
}

// Pairwise scaled squared distances D_ij = sum_k ((A_ik - B_jk)/l_k)^2.
Matrix scaled_sqdist(const Matrix& A, const Matrix& B, const Vector& lengthscales) {
  const Matrix As = A * lengthscales.cwiseInverse().asDiagonal();
  const Matrix Bs = B * lengthscales.cwiseInverse().asDiagonal();
  const Vector a2 = As.rowwise().squaredNorm();
  const Vector b2 = Bs.rowwise().squaredNorm();
  Matrix D = -2.0 * As * Bs.transpose();
  D.colwise() += a2;
  D.rowwise() += b2.transpose();
  return D.cwiseMax(0.0);
}

}  // namespace

Matrix Kernel::cross(const Matrix& A, const Matrix& B) const {
  Matrix K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      K(i, j) = eval(A.row(i).transpose(), B.row(j).transpose());
    }
  }
  return K;
}

Matrix Kernel::matrix(const Matrix& X) const {
  Matrix K = cross(X, X);
  // symmetrize away rounding asymmetry from the two evaluation orders
  return 0.5 * (K + K.transpose());
}

Vector Kernel::diag(const Matrix& X) const {
  Vector d(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    d(i) = eval(X.row(i).transpose(), X.row(i).transpose());
  }
  return d;
}

// ---------------------------------------------------------------- SE-ARD

SquaredExponentialArd::SquaredExponentialArd(double signal_variance, Vector lengthscales)
    : signal_variance_(signal_variance), lengthscales_(std::move(lengthscales)) {
  if (signal_variance_ <= 0.0 || (lengthscales_.array() <= 0.0).any()) {
    throw InvalidArgument("SE-ARD parameters must be positive");
  }
}

std::unique_ptr<Kernel> SquaredExponentialArd::clone() const {
  return std::make_unique<SquaredExponentialArd>(*this);
}

Vector SquaredExponentialArd::params() const {
  Vector v(num_params());
  v(0) = std::log(signal_variance_);
  v.tail(lengthscales_.size()) = lengthscales_.array().log();
  return v;
}

void SquaredExponentialArd::set_params(const Eigen::Ref<const Vector>& v) {
  check_dim(v.size(), num_params(), "se_ard::set_params");
  signal_variance_ = std::exp(v(0));
  lengthscales_ = v.tail(lengthscales_.size()).array().exp();
}

double SquaredExponentialArd::eval(const Eigen::Ref<const Vector>& x,
                                   const Eigen::Ref<const Vector>& x2) const {
  check_dim(x.size(), input_dim(), "se_ard::eval");
  check_dim(x2.size(), input_dim(), "se_ard::eval");
  const double r2 = ((x - x2).array() / lengthscales_.array()).square().sum();
  return signal_variance_ * std::exp(-0.5 * r2);
}

Matrix SquaredExponentialArd::cross(const Matrix& A, const Matrix& B) const {
  check_dim(A.cols(), input_dim(), "se_ard::cross");
  check_dim(B.cols(), input_dim(), "se_ard::cross");
  return signal_variance_ *
         (-0.5 * scaled_sqdist(A, B, lengthscales_).array()).exp().matrix();
}

Vector SquaredExponentialArd::diag(const Matrix& X) const {
  return Vector::Constant(X.rows(), signal_variance_);
}

Matrix SquaredExponentialArd::param_gradient(const Matrix& X, Eigen::Index i) const {
  const Matrix K = cross(X, X);
  if (i == 0) {
    // d/d log sf2 = K
    return K;
  }
  const Eigen::Index j = i - 1;
  if (j < 0 || j >= lengthscales_.size()) {
    throw InvalidArgument("se_ard::param_gradient index out of range");
  }
  // d/d log l_j = K .* (dx_j^2 / l_j^2)
  const Vector cj = X.col(j);
  Matrix d2 = cj.replicate(1, X.rows());
  d2 = (d2 - d2.transpose().eval()).array().square();
  return (K.array() * d2.array() / (lengthscales_(j) * lengthscales_(j))).matrix();
}

// ------------------------------------------------------ NARGP composite

NargpCompositeKernel::NargpCompositeKernel(Eigen::Index p)
    : p_(p),
      rho_(1.0, Vector::Ones(p)),
      z_(1.0, Vector::Ones(1)),
      delta_(1.0, Vector::Ones(p)) {}

NargpCompositeKernel::NargpCompositeKernel(SquaredExponentialArd rho,
                                           SquaredExponentialArd z,
                                           SquaredExponentialArd delta)
    : p_(rho.input_dim()), rho_(std::move(rho)), z_(std::move(z)),
      delta_(std::move(delta)) {
  if (z_.input_dim() != 1 || delta_.input_dim() != p_) {
    throw DimensionMismatch("composite kernel parts disagree on dimensions");
  }
}

std::unique_ptr<Kernel> NargpCompositeKernel::clone() const {
  return std::make_unique<NargpCompositeKernel>(*this);
}

Vector NargpCompositeKernel::params() const {
  Vector v(num_params());
  v << rho_.params(), z_.params(), delta_.params();
  return v;
}

void NargpCompositeKernel::set_params(const Eigen::Ref<const Vector>& v) {
  check_dim(v.size(), num_params(), "nargp_composite::set_params");
  Eigen::Index at = 0;
  rho_.set_params(v.segment(at, rho_.num_params()));
  at += rho_.num_params();
  z_.set_params(v.segment(at, z_.num_params()));
  at += z_.num_params();
  delta_.set_params(v.segment(at, delta_.num_params()));
}

double NargpCompositeKernel::eval(const Eigen::Ref<const Vector>& x,
                                  const Eigen::Ref<const Vector>& x2) const {
  check_dim(x.size(), p_ + 1, "nargp_composite::eval");
  check_dim(x2.size(), p_ + 1, "nargp_composite::eval");
  const auto xs = x.head(p_);
  const auto x2s = x2.head(p_);
  return rho_.eval(xs, x2s) * z_.eval(x.tail(1), x2.tail(1)) +
         delta_.eval(xs, x2s);
}

Matrix NargpCompositeKernel::cross(const Matrix& A, const Matrix& B) const {
  check_dim(A.cols(), p_ + 1, "nargp_composite::cross");
  check_dim(B.cols(), p_ + 1, "nargp_composite::cross");
  const Matrix Ax = A.leftCols(p_);
  const Matrix Bx = B.leftCols(p_);
  const Matrix Az = A.rightCols(1);
  const Matrix Bz = B.rightCols(1);
  return (rho_.cross(Ax, Bx).array() * z_.cross(Az, Bz).array() +
          delta_.cross(Ax, Bx).array())
      .matrix();
}

Matrix NargpCompositeKernel::param_gradient(const Matrix& X, Eigen::Index i) const {
  const Matrix Xx = X.leftCols(p_);
  const Matrix Xz = X.rightCols(1);
  const Eigen::Index n_rho = rho_.num_params();
  const Eigen::Index n_z = z_.num_params();
  if (i < n_rho) {
    return (rho_.param_gradient(Xx, i).array() * z_.cross(Xz, Xz).array()).matrix();
  }
  i -= n_rho;
  if (i < n_z) {
    return (rho_.cross(Xx, Xx).array() * z_.param_gradient(Xz, i).array()).matrix();
  }
  i -= n_z;
  return delta_.param_gradient(Xx, i);
}

// ------------------------------------------------------ projected SE

ProjectedSeKernel::ProjectedSeKernel(Matrix W, double signal_variance,
                                     Vector inner_lengthscales)
    : W_(std::move(W)), inner_(signal_variance, std::move(inner_lengthscales)) {
  if (inner_.input_dim() != W_.cols()) {
    throw DimensionMismatch("projected kernel: inner dimension != W columns");
  }
  if (!W_.allFinite()) throw NonFiniteValue("projection matrix has NaN/Inf");
}

std::unique_ptr<Kernel> ProjectedSeKernel::clone() const {
  return std::make_unique<ProjectedSeKernel>(*this);
}

Vector ProjectedSeKernel::params() const {
  Vector v(num_params());
  v.head(inner_param_count()) = inner_.params();
  v.tail(W_.size()) = Eigen::Map<const Vector>(W_.data(), W_.size());
  return v;
}

void ProjectedSeKernel::set_params(const Eigen::Ref<const Vector>& v) {
  check_dim(v.size(), num_params(), "projected_se::set_params");
  inner_.set_params(v.head(inner_param_count()));
  W_ = Eigen::Map<const Matrix>(v.tail(W_.size()).data(), W_.rows(), W_.cols());
}

double ProjectedSeKernel::eval(const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& x2) const {
  check_dim(x.size(), W_.rows(), "projected_se::eval");
  check_dim(x2.size(), W_.rows(), "projected_se::eval");
  return inner_.eval(W_.transpose() * x, W_.transpose() * x2);
}

Matrix ProjectedSeKernel::cross(const Matrix& A, const Matrix& B) const {
  check_dim(A.cols(), W_.rows(), "projected_se::cross");
  check_dim(B.cols(), W_.rows(), "projected_se::cross");
  return inner_.cross(A * W_, B * W_);
}

Matrix ProjectedSeKernel::param_gradient(const Matrix& X, Eigen::Index i) const {
  const Matrix U = X * W_;  // n x d projected inputs
  if (i < inner_param_count()) {
    return inner_.param_gradient(U, i);
  }
  // dK/dW_{ab}: with u = W^T x,
  //   dk/dW_ab = -k * (u_b - u'_b)/l_b^2 * (x_a - x'_a)
  const Eigen::Index flat = i - inner_param_count();
  const Eigen::Index a = flat % W_.rows();  // column-major layout
  const Eigen::Index b = flat / W_.rows();
  const Matrix K = inner_.cross(U, U);
  const Vector ub = U.col(b);
  const Vector xa = X.col(a);
  Matrix du = ub.replicate(1, X.rows());
  du -= du.transpose().eval();
  Matrix dx = xa.replicate(1, X.rows());
  dx -= dx.transpose().eval();
  const double l2 = inner_.lengthscales()(b) * inner_.lengthscales()(b);
  return (-K.array() * du.array() * dx.array() / l2).matrix();
}

// ----------------------------------------------------------- free form

double kernel_eval(const ArdKernelParams& params, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& x2) {
  SquaredExponentialArd k(params.signal_variance, params.lengthscales);
  return k.eval(x, x2);
}

}  // namespace rmfgp
