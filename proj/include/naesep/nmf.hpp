#ifndef NAESEP_NMF_HPP
#define NAESEP_NMF_HPP

#include <cstdint>
#include <iostream>
#include <vector>

#include "naesep/matrix.hpp"
#include "naesep/numerics.hpp"
#include "naesep/rng.hpp"

namespace naesep {

/// KL-NMF factorization X ~= W * H with non-negative factors.
struct NMFModel {
  Matrix w;  // M x K bases, columns canonicalized to unit sum after training
  Matrix h;  // K x N activations
  std::size_t rank = 0;
  std::vector<double> cost_trace;
};

namespace detail {

inline Matrix random_positive(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = rng.uniform(0.1, 1.1);
  return m;
}

inline Matrix kl_ratio(const Matrix& x, const Matrix& wh) {
  Matrix r(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = wh[k] < kKlFloor ? kKlFloor : wh[k];
    r[k] = x[k] / d;
  }
  return r;
}

// H <- H .* (W^T (X ./ WH)) ./ (W^T 1)
inline void update_h(const Matrix& x, const Matrix& w, Matrix& h) {
  const Matrix ratio = kl_ratio(x, matmul(w, h));
  const Matrix num = matmul_tn(w, ratio);
  std::vector<double> colsum(w.cols(), 0.0);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) colsum[j] += w(i, j);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const double d = colsum[i] < kKlFloor ? kKlFloor : colsum[i];
    for (std::size_t j = 0; j < h.cols(); ++j) h(i, j) *= num(i, j) / d;
  }
}

// W <- W .* ((X ./ WH) H^T) ./ (1 H^T)
inline void update_w(const Matrix& x, Matrix& w, const Matrix& h) {
  const Matrix ratio = kl_ratio(x, matmul(w, h));
  const Matrix num = matmul_nt(ratio, h);
  std::vector<double> rowsum(h.rows(), 0.0);
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) rowsum[i] += h(i, j);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const double d = rowsum[j] < kKlFloor ? kKlFloor : rowsum[j];
      w(i, j) *= num(i, j) / d;
    }
}

}  // namespace detail

/// Rescales W columns to unit sum, pushing the scale into H.
/// Leaves the product W*H unchanged.
inline void nmf_canonicalize(NMFModel& model) {
  for (std::size_t j = 0; j < model.w.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < model.w.rows(); ++i) s += model.w(i, j);
    if (s < kKlFloor) continue;
    for (std::size_t i = 0; i < model.w.rows(); ++i) model.w(i, j) /= s;
    for (std::size_t n = 0; n < model.h.cols(); ++n) model.h(j, n) *= s;
  }
}

/// Classical Lee-Seung KL multiplicative updates, alternating H then W.
/// Early stop: relative cost change below `tol` for 10 consecutive iterations.
inline NMFModel nmf_train(const Matrix& x, std::size_t rank, std::size_t iterations,
                          std::uint64_t seed, double tol = 1e-7) {
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < 0.0) throw std::invalid_argument("nmf_train: X must be non-negative");
  if (x.sum() <= 0.0) throw std::invalid_argument("nmf_train: X is all zero");
  if (rank < 1) throw std::invalid_argument("nmf_train: rank must be >= 1");
  if (iterations < 1) throw std::invalid_argument("nmf_train: iterations must be >= 1");
  if (rank > std::min(x.rows(), x.cols()))
    std::cerr << "nmf_train: warning: rank " << rank << " exceeds min(M,N)="
              << std::min(x.rows(), x.cols()) << ", proceeding\n";

  Rng rng(seed);
  NMFModel model;
  model.rank = rank;
  model.w = detail::random_positive(x.rows(), rank, rng);
  model.h = detail::random_positive(rank, x.cols(), rng);
  model.cost_trace.reserve(iterations + 1);

  std::size_t flat = 0;
  double prev_cost = kl_cost(x, matmul(model.w, model.h));
  model.cost_trace.push_back(prev_cost);
  for (std::size_t it = 0; it < iterations; ++it) {
    detail::update_h(x, model.w, model.h);
    detail::update_w(x, model.w, model.h);
    const double cost = kl_cost(x, matmul(model.w, model.h));
    model.cost_trace.push_back(cost);
    const double denom = std::fabs(prev_cost) < kKlFloor ? kKlFloor : std::fabs(prev_cost);
    flat = std::fabs(prev_cost - cost) / denom < tol ? flat + 1 : 0;
    prev_cost = cost;
    if (flat >= 10) break;
  }
  nmf_canonicalize(model);
  return model;
}

/// Activation-only fitting against frozen bases W (supervised setting).
/// W is never touched; only H iterates. iterations = 0 returns the seeded
/// initialization untouched.
inline Matrix nmf_fit_activations(const Matrix& x, const Matrix& w, std::size_t iterations,
                                  std::uint64_t seed, double tol = 1e-7) {
  if (w.cols() < 1) throw std::invalid_argument("nmf_fit_activations: W has no columns");
  if (x.rows() != w.rows())
    throw std::invalid_argument("nmf_fit_activations: X rows != W rows");

  Rng rng(seed);
  Matrix h = detail::random_positive(w.cols(), x.cols(), rng);
  std::size_t flat = 0;
  double prev_cost = kl_cost(x, matmul(w, h));
  for (std::size_t it = 0; it < iterations; ++it) {
    detail::update_h(x, w, h);
    const double cost = kl_cost(x, matmul(w, h));
    const double denom = std::fabs(prev_cost) < kKlFloor ? kKlFloor : std::fabs(prev_cost);
    flat = std::fabs(prev_cost - cost) / denom < tol ? flat + 1 : 0;
    prev_cost = cost;
    if (flat >= 10) break;
  }
  return h;
}

}  // namespace naesep

#endif  // NAESEP_NMF_HPP
