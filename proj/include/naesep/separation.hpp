#ifndef NAESEP_SEPARATION_HPP
#define NAESEP_SEPARATION_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "naesep/dsp.hpp"
#include "naesep/matrix.hpp"
#include "naesep/nae.hpp"
#include "naesep/nmf.hpp"
#include "naesep/numerics.hpp"
#include "naesep/rng.hpp"

namespace naesep {

enum class ModelKind { NMF, NAEShallow, NAEDeep };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::NMF: return "nmf";
    case ModelKind::NAEShallow: return "nae";
    case ModelKind::NAEDeep: return "nae-deep";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "nmf") return ModelKind::NMF;
  if (s == "nae" || s == "nae-shallow") return ModelKind::NAEShallow;
  if (s == "nae-deep") return ModelKind::NAEDeep;
  throw std::invalid_argument("unknown model kind: " + s);
}

/// A trained per-source model. For NMF only the basis matrix is kept, for
/// NAEs only the decoder half; either way this is everything separation
/// needs.
struct SourceModel {
  ModelKind kind = ModelKind::NMF;
  Matrix basis;     // NMF: M x K, unit-sum columns
  Decoder decoder;  // NAE kinds
  std::size_t latent_size = 0;
  // Training metadata.
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::size_t iterations_run = 0;
  double final_cost = 0.0;

  std::size_t output_size() const {
    return kind == ModelKind::NMF ? basis.rows() : decoder.output_size;
  }
};

/// Concatenates the magnitude spectrograms of all training clips along the
/// frame axis and trains one model on the result.
inline SourceModel train_source_model(const std::vector<Waveform>& training_waves,
                                      ModelKind kind, std::size_t rank,
                                      const TrainConfig& config,
                                      const StftParams& stft_params = {},
                                      std::size_t nmf_iterations = 500) {
  if (training_waves.empty())
    throw std::invalid_argument("train_source_model: no training waveforms");
  std::vector<ComplexSpectrogram> specs;
  std::size_t total_frames = 0;
  for (const Waveform& w : training_waves) {
    specs.push_back(stft(w, stft_params));
    total_frames += specs.back().magnitude.cols();
  }
  const std::size_t bins = specs.front().magnitude.rows();
  Matrix x(bins, total_frames, 0.0);
  std::size_t col = 0;
  for (const auto& s : specs) {
    for (std::size_t j = 0; j < s.magnitude.cols(); ++j, ++col)
      for (std::size_t i = 0; i < bins; ++i) x(i, col) = s.magnitude(i, j);
  }

  SourceModel model;
  model.kind = kind;
  model.latent_size = rank;
  model.seed = config.seed;
  model.lambda = config.lambda;
  if (kind == ModelKind::NMF) {
    NMFModel nmf = nmf_train(x, rank, nmf_iterations, config.seed);
    model.basis = nmf.w;
    model.iterations_run = nmf.cost_trace.size();
    model.final_cost = nmf.cost_trace.empty() ? 0.0 : nmf.cost_trace.back();
  } else {
    std::vector<std::size_t> sizes;
    if (kind == ModelKind::NAEShallow)
      sizes = {bins, rank, bins};
    else
      sizes = {bins, rank, rank, rank, bins};
    NAEModel nae = nae_train(x, sizes, config);
    model.decoder = extract_decoder(nae);
    model.iterations_run = nae.cost_trace.size();
    model.final_cost = nae.cost_trace.empty() ? 0.0 : nae.cost_trace.back();
  }
  return model;
}

struct MixtureFit {
  std::vector<Matrix> latents;    // H_k, latent_size x frames, non-negative
  std::vector<Matrix> estimates;  // Xhat_k, bins x frames, strictly positive
  double final_cost = 0.0;
};

namespace sep_detail {

// Latent init seed depends on the model itself (not its slot), so a
// permuted model list produces identically permuted fits.
inline std::uint64_t latent_seed(const TrainConfig& config, const SourceModel& m) {
  std::uint64_t tag = seed_combine(m.seed, static_cast<std::uint64_t>(m.latent_size));
  tag = seed_combine(tag, static_cast<std::uint64_t>(m.kind));
  return seed_combine(config.seed, tag);
}

// Stacked-basis multiplicative updates for an all-NMF model list.
inline MixtureFit mixture_fit_nmf(const std::vector<SourceModel>& models,
                                  const Matrix& mix_mag, const TrainConfig& config) {
  const std::size_t bins = mix_mag.rows();
  std::size_t total_rank = 0;
  for (const auto& m : models) total_rank += m.latent_size;
  Matrix w(bins, total_rank, 0.0);
  std::size_t off = 0;
  for (const auto& m : models) {
    for (std::size_t i = 0; i < bins; ++i)
      for (std::size_t j = 0; j < m.latent_size; ++j) w(i, off + j) = m.basis(i, j);
    off += m.latent_size;
  }

  Matrix h(total_rank, mix_mag.cols(), 0.0);
  off = 0;
  for (const auto& m : models) {
    Rng rng(latent_seed(config, m));
    for (std::size_t i = 0; i < m.latent_size; ++i)
      for (std::size_t j = 0; j < h.cols(); ++j) h(off + i, j) = rng.uniform(0.1, 1.1);
    off += m.latent_size;
  }

  std::size_t flat = 0;
  double prev_cost = kl_cost(mix_mag, matmul(w, h));
  double cost = prev_cost;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    detail::update_h(mix_mag, w, h);
    cost = kl_cost(mix_mag, matmul(w, h));
    const double denom = std::fabs(prev_cost) < kKlFloor ? kKlFloor : std::fabs(prev_cost);
    flat = std::fabs(prev_cost - cost) / denom < config.tol ? flat + 1 : 0;
    prev_cost = cost;
    if (flat >= 10) break;
  }

  MixtureFit fit;
  fit.final_cost = cost;
  off = 0;
  for (const auto& m : models) {
    Matrix hk(m.latent_size, h.cols(), 0.0);
    for (std::size_t i = 0; i < m.latent_size; ++i)
      for (std::size_t j = 0; j < h.cols(); ++j) hk(i, j) = h(off + i, j);
    off += m.latent_size;
    fit.estimates.push_back(matmul(m.basis, hk));
    fit.latents.push_back(std::move(hk));
  }
  return fit;
}

}  // namespace sep_detail

/// Jointly estimates all per-source latents against frozen decoders so that
/// the summed magnitude estimates explain the mixture. NAE latents are
/// softplus-reparameterized and driven by RProp; an all-NMF list instead
/// uses the classical stacked multiplicative updates. Mixed lists take the
/// RProp route with linear decoders for the NMF members.
inline MixtureFit mixture_fit(const std::vector<SourceModel>& models, const Matrix& mix_mag,
                              const TrainConfig& config) {
  if (models.empty()) throw std::invalid_argument("mixture_fit: no models");
  for (const auto& m : models)
    if (m.output_size() != mix_mag.rows())
      throw std::invalid_argument("mixture_fit: model bin count " +
                                  std::to_string(m.output_size()) +
                                  " != mixture bin count " + std::to_string(mix_mag.rows()));

  bool all_nmf = true;
  for (const auto& m : models) all_nmf = all_nmf && m.kind == ModelKind::NMF;
  if (all_nmf) return sep_detail::mixture_fit_nmf(models, mix_mag, config);

  const std::size_t n_models = models.size();
  std::vector<Matrix> z;
  for (const auto& m : models) {
    Rng rng(sep_detail::latent_seed(config, m));
    Matrix zk(m.latent_size, mix_mag.cols());
    for (std::size_t k = 0; k < zk.size(); ++k) zk[k] = rng.uniform(-0.1, 0.1);
    z.push_back(std::move(zk));
  }

  RPropState state = RPropState::init(z);
  std::size_t flat = 0;
  double prev_cost = 0.0, cost = 0.0;
  std::vector<Matrix> h(n_models), xhat(n_models);
  std::vector<ForwardCache> caches(n_models);

  auto forward = [&]() {
    Matrix total(mix_mag.rows(), mix_mag.cols(), 0.0);
    for (std::size_t k = 0; k < n_models; ++k) {
      h[k] = softplus(z[k]);
      if (models[k].kind == ModelKind::NMF) {
        xhat[k] = matmul(models[k].basis, h[k]);
      } else {
        caches[k] = decoder_forward(models[k].decoder, h[k]);
        xhat[k] = caches[k].output();
      }
      total += xhat[k];
    }
    return total;
  };

  Matrix total = forward();
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    cost = kl_cost(mix_mag, total);
    for (std::size_t k = 0; k < n_models; ++k) cost += config.lambda * l1_norm(h[k]);
    if (!std::isfinite(cost))
      throw std::runtime_error("mixture_fit: non-finite cost at iteration " +
                               std::to_string(it));
    const Matrix g_out = kl_cost_gradient(mix_mag, total);
    std::vector<Matrix> grads;
    grads.reserve(n_models);
    for (std::size_t k = 0; k < n_models; ++k) {
      Matrix dh = models[k].kind == ModelKind::NMF
                      ? matmul_tn(models[k].basis, g_out)
                      : decoder_backprop_to_input(models[k].decoder, caches[k], g_out);
      if (config.lambda != 0.0)
        for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += config.lambda;
      grads.push_back(hadamard(dh, softplus_derivative(z[k])));
    }
    rprop_step(z, grads, state);
    total = forward();
    if (it > 0) {
      const double denom = std::fabs(prev_cost) < kKlFloor ? kKlFloor : std::fabs(prev_cost);
      flat = std::fabs(prev_cost - cost) / denom < config.tol ? flat + 1 : 0;
      if (flat >= 10) break;
    }
    prev_cost = cost;
  }

  MixtureFit fit;
  fit.latents = std::move(h);
  fit.estimates = std::move(xhat);
  fit.final_cost = cost;
  return fit;
}

/// Full pipeline: mixture spectrogram -> joint latent fit -> soft-mask
/// reconstruction. Output waveforms match the mixture length and sum to it.
inline std::vector<Waveform> separate(const Waveform& mixture,
                                      const std::vector<SourceModel>& models,
                                      const TrainConfig& config,
                                      const StftParams& stft_params = {}) {
  const ComplexSpectrogram spec = stft(mixture, stft_params);
  const MixtureFit fit = mixture_fit(models, spec.magnitude, config);
  return mask_reconstruct(fit.estimates, spec);
}

}  // namespace naesep

#endif  // NAESEP_SEPARATION_HPP
