#include "rmfgp/optimizer.hpp"

#include <cmath>
#include <deque>

namespace rmfgp {

namespace {

Vector project(const Vector& x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Gradient with components pointing out of an active bound zeroed; its norm
// is the first-order stationarity measure for the box problem.
Vector projected_gradient(const Vector& x, const Vector& g, const Vector& lo,
                          const Vector& hi) {
  Vector pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x(i) <= lo(i) && g(i) > 0.0) || (x(i) >= hi(i) && g(i) < 0.0)) {
      pg(i) = 0.0;
    }
  }
  return pg;
}

bool usable(double f) { return std::isfinite(f); }

}  // namespace

LbfgsResult minimize_lbfgs_box(const Objective& objective, const Vector& x0,
                               const Vector& lo, const Vector& hi,
                               const LbfgsOptions& options) {
  LbfgsResult result;
  Vector x = project(x0, lo, hi);
  Vector g(x.size());
  double f = objective(x, &g);
  if (!usable(f)) {
    result.x = x;
    result.f = f;
    return result;
  }

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    result.iterations = iter + 1;
    const Vector pg = projected_gradient(x, g, lo, hi);
    if (pg.lpNorm<Eigen::Infinity>() <= options.grad_tol * std::max(1.0, std::abs(f))) {
      result.converged = true;
      break;
    }

    // two-loop recursion
    Vector q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vector direction = -q;
    bool is_steepest = false;
    if (direction.dot(g) >= 0.0 || !direction.allFinite()) {
      direction = -g;  // quasi-Newton model broke down; steepest descent
      is_steepest = true;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // backtracking Armijo search along the projected path
    double step = 1.0;
    const double c1 = 1e-4;
    Vector x_new;
    Vector g_new(x.size());
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      x_new = project(x + step * direction, lo, hi);
      const Vector dx = x_new - x;
      if (dx.lpNorm<Eigen::Infinity>() <=
          options.step_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
        break;
      }
      f_new = objective(x_new, &g_new);
      if (usable(f_new) && f_new <= f + c1 * g.dot(dx)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // try a plain projected-gradient probe before declaring convergence
      if (!is_steepest) {
        direction = -g;
        step = 1.0;
        for (int ls = 0; ls < options.max_line_search; ++ls) {
          x_new = project(x + step * direction, lo, hi);
          const Vector dx = x_new - x;
          if (dx.lpNorm<Eigen::Infinity>() <=
              options.step_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
            break;
          }
          f_new = objective(x_new, &g_new);
          if (usable(f_new) && f_new <= f + c1 * g.dot(dx)) {
            accepted = true;
            break;
          }
          step *= 0.5;
        }
      }
      if (!accepted) {
        result.converged = true;  // no descent within step tolerance
        break;
      }
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    const Vector s_vec = x_new - x;
    const Vector y_vec = g_new - g;
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
      s_hist.push_back(s_vec);
      y_hist.push_back(y_vec);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(x_new);
    g = g_new;
    f = f_new;
  }

  result.x = std::move(x);
  result.f = f;
  return result;
}

}  // namespace rmfgp
