#ifndef NAESEP_NUMERICS_HPP
#define NAESEP_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "naesep/matrix.hpp"

namespace naesep {

/// Floor used before logs and divisions throughout the KL machinery.
inline constexpr double kKlFloor = 1e-12;

inline double softplus_scalar(double x) {
  // log(1+e^x); for large x the direct form overflows, so switch to
  // x + log(1+e^-x) which is exact in the limit.
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Elementwise g(x) = log(1+e^x). Strictly positive for all finite inputs.
inline Matrix softplus(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = softplus_scalar(x[k]);
  return out;
}

/// Elementwise logistic sigmoid, the derivative of softplus. Values in (0,1).
inline Matrix softplus_derivative(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = sigmoid_scalar(x[k]);
  return out;
}

/// Generalized KL divergence: sum X(log X - log Xhat) - X + Xhat, with
/// 0*log 0 = 0 and flooring at kKlFloor before any log.
inline double kl_cost(const Matrix& x, const Matrix& xhat) {
  x.check_shape(xhat, "kl_cost");
  double cost = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xv = x[k];
    const double hv = xhat[k];
    if (xv < kKlFloor) {
      cost += hv - xv;
    } else {
      const double hf = hv < kKlFloor ? kKlFloor : hv;
      cost += xv * (std::log(xv) - std::log(hf)) - xv + hv;
    }
  }
  return cost;
}

/// d kl_cost / d Xhat = 1 - X / Xhat, with the denominator floored.
inline Matrix kl_cost_gradient(const Matrix& x, const Matrix& xhat) {
  x.check_shape(xhat, "kl_cost_gradient");
  Matrix g(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double hf = xhat[k] < kKlFloor ? kKlFloor : xhat[k];
    g[k] = 1.0 - x[k] / hf;
  }
  return g;
}

inline double l1_norm(const Matrix& h) {
  double s = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) s += std::fabs(h[k]);
  return s;
}

/// iRprop- state: per-parameter adaptive step sizes plus the sign of the
/// previous gradient. Step sizes stay within [delta_min, delta_max].
struct RPropState {
  std::vector<Matrix> step_sizes;
  std::vector<Matrix> prev_grad_signs;
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta_init = 0.01;
  double delta_min = 1e-9;
  double delta_max = 1.0;

  static RPropState init(const std::vector<Matrix>& params, double delta_init = 0.01) {
    RPropState s;
    s.delta_init = delta_init;
    for (const Matrix& p : params) {
      s.step_sizes.emplace_back(p.rows(), p.cols(), delta_init);
      s.prev_grad_signs.emplace_back(p.rows(), p.cols(), 0.0);
    }
    return s;
  }
};

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// One iRprop- update over a list of parameter blocks.
///   sign agreement  -> grow step by eta_plus (clamped), move against the sign
///   sign flip       -> shrink step by eta_minus (clamped), skip the move,
///                      forget the stored sign
inline void rprop_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads,
                       RPropState& state) {
  if (params.size() != grads.size() || params.size() != state.step_sizes.size())
    throw std::invalid_argument("rprop_step: parameter block count mismatch");
  for (std::size_t b = 0; b < params.size(); ++b) {
    Matrix& p = params[b];
    const Matrix& g = grads[b];
    p.check_shape(g, "rprop_step");
    Matrix& step = state.step_sizes[b];
    Matrix& prev = state.prev_grad_signs[b];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gv = g[k];
      if (std::isnan(gv))
        throw std::runtime_error("rprop_step: NaN gradient in parameter block " +
                                 std::to_string(b));
      const double s = sign_of(gv);
      const double prod = s * prev[k];
      if (prod > 0.0) {
        step[k] = std::min(step[k] * state.eta_plus, state.delta_max);
        p[k] -= s * step[k];
        prev[k] = s;
      } else if (prod < 0.0) {
        step[k] = std::max(step[k] * state.eta_minus, state.delta_min);
        prev[k] = 0.0;  // gradient treated as zero this step
      } else {
        p[k] -= s * step[k];
        prev[k] = s;
      }
    }
  }
}

using Objective = std::function<double(const std::vector<Matrix>&)>;

/// Central-difference gradient oracle used by the gradient tests.
inline std::vector<Matrix> finite_difference_gradient(const Objective& objective,
                                                      std::vector<Matrix> params,
                                                      double epsilon = 1e-4) {
  if (epsilon <= 0.0)
    throw std::invalid_argument("finite_difference_gradient: epsilon must be positive");
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (const Matrix& p : params) grads.emplace_back(p.rows(), p.cols(), 0.0);
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t k = 0; k < params[b].size(); ++k) {
      const double orig = params[b][k];
      params[b][k] = orig + epsilon;
      const double fp = objective(params);
      params[b][k] = orig - epsilon;
      const double fm = objective(params);
      params[b][k] = orig;
      grads[b][k] = (fp - fm) / (2.0 * epsilon);
    }
  }
  return grads;
}

}  // namespace naesep

#endif  // NAESEP_NUMERICS_HPP
