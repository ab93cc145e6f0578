#ifndef NAESEP_NAE_HPP
#define NAESEP_NAE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "naesep/matrix.hpp"
#include "naesep/numerics.hpp"
#include "naesep/rng.hpp"

namespace naesep {

/// Non-negative autoencoder: 2L weight matrices, softplus after every layer.
/// Layer sizes are symmetric about the middle; weights themselves may go
/// negative, non-negativity lives in the activations.
struct NAEModel {
  std::vector<Matrix> weights;        // W_1 .. W_2L
  std::size_t depth_L = 0;
  std::vector<std::size_t> layer_sizes;  // length 2L+1, first == last
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::vector<double> cost_trace;
};

/// The decoder half (layers L+1 .. 2L); the only part retained for separation.
struct Decoder {
  std::vector<Matrix> weights;
  std::size_t latent_size = 0;
  std::size_t output_size = 0;
};

struct TrainConfig {
  double lambda = 0.1;
  std::size_t max_iterations = 2000;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

/// All intermediates of one forward pass: pre[i] = W_{i+1} * post[i],
/// post[i+1] = softplus(pre[i]), post[0] = X.
struct ForwardCache {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  const Matrix& latent(std::size_t depth_L) const { return post[depth_L]; }
  const Matrix& output() const { return post.back(); }
};

inline void validate_layer_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 3 || sizes.size() % 2 == 0)
    throw std::invalid_argument("layer_sizes must have odd length 2L+1 >= 3");
  const std::size_t n = sizes.size();
  for (std::size_t i = 0; i < n; ++i)
    if (sizes[i] == 0) throw std::invalid_argument("layer sizes must be positive");
  for (std::size_t i = 0; i < n / 2; ++i)
    if (sizes[i] != sizes[n - 1 - i])
      throw std::invalid_argument("layer_sizes must be symmetric about the middle");
}

inline ForwardCache nae_forward(const NAEModel& model, const Matrix& x) {
  if (x.rows() != model.layer_sizes.front())
    throw std::invalid_argument("nae_forward: X rows != model input size");
  ForwardCache cache;
  cache.post.push_back(x);
  for (const Matrix& w : model.weights) {
    cache.pre.push_back(matmul(w, cache.post.back()));
    cache.post.push_back(softplus(cache.pre.back()));
  }
  return cache;
}

/// Analytic gradients of D(X, Xhat) + lambda*||H||_1 w.r.t. every weight.
/// The sparsity path enters at the latent layer; H > 0 so its subgradient
/// is a constant lambda.
inline std::vector<Matrix> nae_gradients(const NAEModel& model, const ForwardCache& cache,
                                         const Matrix& x, double lambda) {
  const std::size_t layers = model.weights.size();
  std::vector<Matrix> grads(layers);
  Matrix g = kl_cost_gradient(x, cache.output());
  for (std::size_t i = layers; i-- > 0;) {
    const Matrix dz = hadamard(g, softplus_derivative(cache.pre[i]));
    grads[i] = matmul_nt(dz, cache.post[i]);
    if (i > 0) {
      g = matmul_tn(model.weights[i], dz);
      if (i == model.depth_L && lambda != 0.0) {
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += lambda;
      }
    }
  }
  return grads;
}

inline std::vector<Matrix> nae_gradients(const NAEModel& model, const Matrix& x,
                                         double lambda) {
  return nae_gradients(model, nae_forward(model, x), x, lambda);
}

namespace detail {

// Uniform [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
inline Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = rng.uniform(-a, a);
  return m;
}

}  // namespace detail

/// Full-batch RProp training of the NAE objective. Deterministic given
/// config.seed; the per-iteration cost trace is kept on the model.
inline NAEModel nae_train(const Matrix& x, const std::vector<std::size_t>& layer_sizes,
                          const TrainConfig& config) {
  validate_layer_sizes(layer_sizes);
  if (x.rows() != layer_sizes.front())
    throw std::invalid_argument("nae_train: X rows != layer_sizes[0]");
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < 0.0) throw std::invalid_argument("nae_train: X must be non-negative");

  NAEModel model;
  model.depth_L = layer_sizes.size() / 2;
  model.layer_sizes = layer_sizes;
  model.seed = config.seed;
  model.lambda = config.lambda;

  Rng rng(config.seed);
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i)
    model.weights.push_back(detail::glorot_uniform(layer_sizes[i + 1], layer_sizes[i], rng));

  RPropState state = RPropState::init(model.weights);
  std::size_t flat = 0;
  double prev_cost = 0.0;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const ForwardCache cache = nae_forward(model, x);
    const double cost =
        kl_cost(x, cache.output()) + config.lambda * l1_norm(cache.latent(model.depth_L));
    if (!std::isfinite(cost))
      throw std::runtime_error("nae_train: non-finite cost at iteration " +
                               std::to_string(it));
    model.cost_trace.push_back(cost);
    const std::vector<Matrix> grads = nae_gradients(model, cache, x, config.lambda);
    rprop_step(model.weights, grads, state);
    if (it > 0) {
      const double denom = std::fabs(prev_cost) < kKlFloor ? kKlFloor : std::fabs(prev_cost);
      flat = std::fabs(prev_cost - cost) / denom < config.tol ? flat + 1 : 0;
      if (flat >= 10) break;
    }
    prev_cost = cost;
  }
  return model;
}

inline Decoder extract_decoder(const NAEModel& model) {
  Decoder d;
  d.weights.assign(model.weights.begin() + static_cast<std::ptrdiff_t>(model.depth_L),
                   model.weights.end());
  d.latent_size = model.layer_sizes[model.depth_L];
  d.output_size = model.layer_sizes.back();
  return d;
}

/// Decoder-only forward pass; post[0] = H.
inline ForwardCache decoder_forward(const Decoder& decoder, const Matrix& h) {
  if (h.rows() != decoder.latent_size)
    throw std::invalid_argument("decoder_forward: H rows != decoder latent size");
  ForwardCache cache;
  cache.post.push_back(h);
  for (const Matrix& w : decoder.weights) {
    cache.pre.push_back(matmul(w, cache.post.back()));
    cache.post.push_back(softplus(cache.pre.back()));
  }
  return cache;
}

/// Propagates dCost/dXhat back through the decoder, returning dCost/dH.
/// Weights are read-only.
inline Matrix decoder_backprop_to_input(const Decoder& decoder, const ForwardCache& cache,
                                        Matrix g_out) {
  for (std::size_t i = decoder.weights.size(); i-- > 0;) {
    const Matrix dz = hadamard(g_out, softplus_derivative(cache.pre[i]));
    g_out = matmul_tn(decoder.weights[i], dz);
  }
  return g_out;
}

/// Latent estimation against a frozen decoder (the "estimate the inputs"
/// problem). H is kept non-negative by the reparameterization H = softplus(Z)
/// with Z free; RProp runs on Z. Zero iterations returns softplus(Z_init).
inline Matrix nae_fit_latents(const Decoder& decoder, const Matrix& x,
                              const TrainConfig& config) {
  if (x.rows() != decoder.output_size)
    throw std::invalid_argument("nae_fit_latents: X rows != decoder output size");

  Rng rng(config.seed);
  Matrix z(decoder.latent_size, x.cols());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = rng.uniform(-0.1, 0.1);

  std::vector<Matrix> params{z};
  RPropState state = RPropState::init(params);
  std::size_t flat = 0;
  double prev_cost = 0.0;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const Matrix h = softplus(params[0]);
    const ForwardCache cache = decoder_forward(decoder, h);
    const double cost = kl_cost(x, cache.output()) + config.lambda * l1_norm(h);
    if (!std::isfinite(cost))
      throw std::runtime_error("nae_fit_latents: non-finite cost at iteration " +
                               std::to_string(it));
    Matrix dh = decoder_backprop_to_input(decoder, cache, kl_cost_gradient(x, cache.output()));
    if (config.lambda != 0.0)
      for (std::size_t k = 0; k < dh.size(); ++k) dh[k] += config.lambda;
    const std::vector<Matrix> grads{hadamard(dh, softplus_derivative(params[0]))};
    rprop_step(params, grads, state);
    if (it > 0) {
      const double denom = std::fabs(prev_cost) < kKlFloor ? kKlFloor : std::fabs(prev_cost);
      flat = std::fabs(prev_cost - cost) / denom < config.tol ? flat + 1 : 0;
      if (flat >= 10) break;
    }
    prev_cost = cost;
  }
  return softplus(params[0]);
}

}  // namespace naesep

#endif  // NAESEP_NAE_HPP
