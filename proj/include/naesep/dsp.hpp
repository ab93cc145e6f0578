#ifndef NAESEP_DSP_HPP
#define NAESEP_DSP_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "naesep/fft.hpp"
#include "naesep/matrix.hpp"
#include "naesep/wav.hpp"

namespace naesep {

struct StftParams {
  std::size_t n_fft = 512;
  std::size_t hop = 128;  // 25% of n_fft
};

/// Magnitude/phase spectrogram with framing metadata. One-sided spectrum:
/// n_fft/2+1 bins.
struct ComplexSpectrogram {
  Matrix magnitude;  // bins x frames, >= 0
  Matrix phase;      // bins x frames, radians in (-pi, pi]
  std::size_t n_fft = 0;
  std::size_t hop = 0;
  double sample_rate = 0.0;
  std::size_t n_samples = 0;  // original waveform length, for exact trimming
};

/// Square root of the periodic Hann window. Analysis+synthesis with this
/// window at 25% hop satisfies COLA with overlap constant 2.
inline std::vector<double> sqrt_hann_window(std::size_t n) {
  if (n < 2) throw std::invalid_argument("sqrt_hann_window: n must be >= 2");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                              static_cast<double>(n)));
    w[i] = std::sqrt(hann);
  }
  return w;
}

inline ComplexSpectrogram stft(const Waveform& wave, const StftParams& params = {}) {
  if (wave.samples.empty()) throw std::invalid_argument("stft: empty signal");
  const std::size_t n_fft = params.n_fft;
  const std::size_t hop = params.hop;
  if (!is_power_of_two(n_fft)) throw std::invalid_argument("stft: n_fft must be a power of two");
  if (hop == 0 || hop > n_fft) throw std::invalid_argument("stft: invalid hop");

  // Zero-pad n_fft - hop on both ends so every input sample sees the full
  // window overlap; extend the tail so frames tile the padded signal.
  const std::size_t pad = n_fft - hop;
  std::size_t padded_len = wave.samples.size() + 2 * pad;
  std::size_t n_frames = (padded_len < n_fft) ? 1 : (padded_len - n_fft) / hop + 1;
  while ((n_frames - 1) * hop + n_fft < wave.samples.size() + 2 * pad) ++n_frames;
  padded_len = (n_frames - 1) * hop + n_fft;

  std::vector<double> padded(padded_len, 0.0);
  for (std::size_t i = 0; i < wave.samples.size(); ++i) padded[pad + i] = wave.samples[i];

  const std::vector<double> window = sqrt_hann_window(n_fft);
  const std::size_t bins = n_fft / 2 + 1;

  ComplexSpectrogram spec;
  spec.magnitude = Matrix(bins, n_frames, 0.0);
  spec.phase = Matrix(bins, n_frames, 0.0);
  spec.n_fft = n_fft;
  spec.hop = hop;
  spec.sample_rate = wave.sample_rate;
  spec.n_samples = wave.samples.size();

  std::vector<double> frame(n_fft);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < n_fft; ++i) frame[i] = padded[start + i] * window[i];
    const auto bins_c = rfft(frame);
    for (std::size_t b = 0; b < bins; ++b) {
      spec.magnitude(b, f) = std::abs(bins_c[b]);
      double ph = std::arg(bins_c[b]);
      if (ph <= -std::numbers::pi) ph = std::numbers::pi;
      spec.phase(b, f) = ph;
    }
  }
  return spec;
}

/// Inverse STFT: per-frame inverse DFT, synthesis windowing, overlap-add,
/// normalization by the squared-window overlap, and trimming of the
/// analysis padding.
inline Waveform istft(const ComplexSpectrogram& spec) {
  const std::size_t n_fft = spec.n_fft;
  const std::size_t hop = spec.hop;
  const std::size_t bins = n_fft / 2 + 1;
  if (n_fft == 0 || hop == 0 || spec.magnitude.rows() != bins ||
      !spec.magnitude.same_shape(spec.phase))
    throw std::invalid_argument("istft: inconsistent spectrogram metadata");

  const std::size_t n_frames = spec.magnitude.cols();
  const std::size_t padded_len = (n_frames - 1) * hop + n_fft;
  const std::vector<double> window = sqrt_hann_window(n_fft);

  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> norm(padded_len, 0.0);
  std::vector<std::complex<double>> half(bins);
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t b = 0; b < bins; ++b)
      half[b] = std::polar(spec.magnitude(b, f), spec.phase(b, f));
    const std::vector<double> frame = irfft(half, n_fft);
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < n_fft; ++i) {
      acc[start + i] += frame[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }

  const std::size_t pad = n_fft - hop;
  Waveform out;
  out.sample_rate = spec.sample_rate;
  const std::size_t n = spec.n_samples ? spec.n_samples : padded_len - 2 * pad;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = norm[pad + i] < 1e-12 ? 1e-12 : norm[pad + i];
    out.samples[i] = acc[pad + i] / d;
  }
  return out;
}

inline double rms(const std::vector<double>& x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(n));
}

struct Mixture {
  Waveform mix;
  Waveform s1;  // as mixed (padded to common length)
  Waveform s2;  // rescaled to the requested SNR
};

/// Scales s2 so that 10*log10(rms(s1)^2 / rms(g*s2)^2) = snr_db over the
/// overlapping region, zero-pads to the common length and sums.
inline Mixture make_mixture(const Waveform& s1, const Waveform& s2, double snr_db = 0.0) {
  if (s1.sample_rate != s2.sample_rate)
    throw std::invalid_argument("make_mixture: sample rates differ");
  const std::size_t overlap = std::min(s1.samples.size(), s2.samples.size());
  if (overlap == 0) throw std::invalid_argument("make_mixture: empty signal");
  const double r1 = rms(s1.samples, overlap);
  const double r2 = rms(s2.samples, overlap);
  if (r1 <= 0.0 || r2 <= 0.0) throw std::invalid_argument("make_mixture: silent input");
  const double gain = (r1 / r2) * std::pow(10.0, -snr_db / 20.0);

  const std::size_t n = std::max(s1.samples.size(), s2.samples.size());
  Mixture out;
  out.s1.sample_rate = out.s2.sample_rate = out.mix.sample_rate = s1.sample_rate;
  out.s1.samples.assign(n, 0.0);
  out.s2.samples.assign(n, 0.0);
  out.mix.samples.assign(n, 0.0);
  for (std::size_t i = 0; i < s1.samples.size(); ++i) out.s1.samples[i] = s1.samples[i];
  for (std::size_t i = 0; i < s2.samples.size(); ++i) out.s2.samples[i] = gain * s2.samples[i];
  for (std::size_t i = 0; i < n; ++i)
    out.mix.samples[i] = out.s1.samples[i] + out.s2.samples[i];
  return out;
}

/// Soft-mask reconstruction: mask_i = Xhat_i / sum_j Xhat_j, applied to the
/// mixture magnitude under the mixture phase, then inverted. Masks sum to
/// one per bin, so the reconstructions sum to the mixture reconstruction.
inline std::vector<Waveform> mask_reconstruct(const std::vector<Matrix>& source_mags,
                                              const ComplexSpectrogram& mix_spec) {
  if (source_mags.empty()) throw std::invalid_argument("mask_reconstruct: no sources");
  for (const Matrix& m : source_mags) m.check_shape(mix_spec.magnitude, "mask_reconstruct");

  Matrix total(mix_spec.magnitude.rows(), mix_spec.magnitude.cols(), 0.0);
  for (const Matrix& m : source_mags) total += m;

  std::vector<Waveform> out;
  out.reserve(source_mags.size());
  for (const Matrix& m : source_mags) {
    ComplexSpectrogram s = mix_spec;
    for (std::size_t k = 0; k < total.size(); ++k) {
      const double d = total[k] < 1e-300 ? 1e-300 : total[k];
      s.magnitude[k] = (m[k] / d) * mix_spec.magnitude[k];
    }
    out.push_back(istft(s));
  }
  return out;
}

}  // namespace naesep

#endif  // NAESEP_DSP_HPP
