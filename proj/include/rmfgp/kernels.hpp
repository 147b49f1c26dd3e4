#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "rmfgp/dataset.hpp"
#include "rmfgp/errors.hpp"

namespace rmfgp {

// ARD squared exponential hyperparameters. noise_variance rides along here
// because the classic (X, y, params) operations below treat it as part of
// theta; the Kernel classes themselves model only the noise-free covariance.
struct ArdKernelParams {
  double signal_variance = 1.0;
  Vector lengthscales;  // one per input dimension, all > 0
  double noise_variance = 0.0;
};

// Covariance function with a flat parameter vector in optimizer space
// (log-transformed for positive scale parameters, raw for anything else).
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual std::unique_ptr<Kernel> clone() const = 0;
  virtual std::string name() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index num_params() const = 0;
  virtual Vector params() const = 0;
  virtual void set_params(const Eigen::Ref<const Vector>& v) = 0;

  // Log-space parameters get box bounds and multiplicative restarts; raw
  // parameters (projection entries) are unbounded with additive restarts.
  virtual bool param_is_log(Eigen::Index /*i*/) const { return true; }

  virtual double eval(const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& x2) const = 0;

  // K(A,B); K(X,X) is cross(X,X) and kept symmetric explicitly.
  virtual Matrix cross(const Matrix& A, const Matrix& B) const;
  Matrix matrix(const Matrix& X) const;
  virtual Vector diag(const Matrix& X) const;

  // dK(X,X)/dparam_i, in the same optimizer space as params().
  virtual Matrix param_gradient(const Matrix& X, Eigen::Index i) const = 0;
};

// k(x,x') = sf2 * exp(-0.5 * sum_j (x_j - x'_j)^2 / l_j^2)
// params: [log sf2, log l_1, ..., log l_p]
class SquaredExponentialArd final : public Kernel {
 public:
  SquaredExponentialArd(double signal_variance, Vector lengthscales);

  std::unique_ptr<Kernel> clone() const override;
  std::string name() const override { return "se_ard"; }
  Eigen::Index input_dim() const override { return lengthscales_.size(); }
  Eigen::Index num_params() const override { return 1 + lengthscales_.size(); }
  Vector params() const override;
  void set_params(const Eigen::Ref<const Vector>& v) override;

  double eval(const Eigen::Ref<const Vector>& x,
              const Eigen::Ref<const Vector>& x2) const override;
  Matrix cross(const Matrix& A, const Matrix& B) const override;
  Vector diag(const Matrix& X) const override;
  Matrix param_gradient(const Matrix& X, Eigen::Index i) const override;

  double signal_variance() const { return signal_variance_; }
  const Vector& lengthscales() const { return lengthscales_; }

 private:
  double signal_variance_;
  Vector lengthscales_;
};

// NARGP level-2 kernel over augmented inputs (x, z) with z scalar:
//   k = k_rho(x,x') * k_z(z,z') + k_delta(x,x')
// where all three factors are SE-ARD. Input dimension is p+1 with z last.
// params: [k_rho params, k_z params, k_delta params]
class NargpCompositeKernel final : public Kernel {
 public:
  explicit NargpCompositeKernel(Eigen::Index p);
  NargpCompositeKernel(SquaredExponentialArd rho, SquaredExponentialArd z,
                       SquaredExponentialArd delta);

  std::unique_ptr<Kernel> clone() const override;
  std::string name() const override { return "nargp_composite"; }
  Eigen::Index input_dim() const override { return p_ + 1; }
  Eigen::Index num_params() const override {
    return rho_.num_params() + z_.num_params() + delta_.num_params();
  }
  Vector params() const override;
  void set_params(const Eigen::Ref<const Vector>& v) override;

  double eval(const Eigen::Ref<const Vector>& x,
              const Eigen::Ref<const Vector>& x2) const override;
  Matrix cross(const Matrix& A, const Matrix& B) const override;
  Matrix param_gradient(const Matrix& X, Eigen::Index i) const override;

  const SquaredExponentialArd& rho_part() const { return rho_; }
  const SquaredExponentialArd& z_part() const { return z_; }
  const SquaredExponentialArd& delta_part() const { return delta_; }

 private:
  Eigen::Index p_;
  SquaredExponentialArd rho_;
  SquaredExponentialArd z_;
  SquaredExponentialArd delta_;
};

// Projected kernel: k(x,x') = se_ard(W^T x, W^T x'). Inputs are s-dim, the
// inner kernel acts on d-dim projections. params: [log sf2, log l_1..l_d,
// W entries column-major (s*d raw values)].
class ProjectedSeKernel final : public Kernel {
 public:
  ProjectedSeKernel(Matrix W, double signal_variance, Vector inner_lengthscales);

  std::unique_ptr<Kernel> clone() const override;
  std::string name() const override { return "projected_se"; }
  Eigen::Index input_dim() const override { return W_.rows(); }
  Eigen::Index num_params() const override {
    return 1 + W_.cols() + W_.size();
  }
  Vector params() const override;
  void set_params(const Eigen::Ref<const Vector>& v) override;
  bool param_is_log(Eigen::Index i) const override { return i < inner_param_count(); }

  double eval(const Eigen::Ref<const Vector>& x,
              const Eigen::Ref<const Vector>& x2) const override;
  Matrix cross(const Matrix& A, const Matrix& B) const override;
  Matrix param_gradient(const Matrix& X, Eigen::Index i) const override;

  const Matrix& W() const { return W_; }
  const SquaredExponentialArd& inner() const { return inner_; }
  Eigen::Index inner_param_count() const { return 1 + W_.cols(); }

 private:
  Matrix W_;  // s x d
  SquaredExponentialArd inner_;
};

// The spec-level ARD-SE evaluation on a params struct (noise ignored).
double kernel_eval(const ArdKernelParams& params, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& x2);

}  // namespace rmfgp
