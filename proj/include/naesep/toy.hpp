#ifndef NAESEP_TOY_HPP
#define NAESEP_TOY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "naesep/dsp.hpp"
#include "naesep/matrix.hpp"
#include "naesep/rng.hpp"

namespace naesep {

/// Synthetic five-note sequence over four distinct pitches (the last pitch
/// repeats), with the ground truth that decomposition tests check against.
struct ToyNotes {
  Waveform wave;
  Matrix templates;                      // bins x 4, per-pitch magnitude spectra
  Matrix gates;                          // 4 x frames, 1 where the pitch sounds
  std::vector<std::size_t> note_sequence;  // pitch index per note
};

namespace toy_detail {

// D4, Eb4, F#4, G4.
inline constexpr std::array<double, 4> kPitchesHz = {293.665, 311.127, 369.994, 391.995};
inline constexpr std::size_t kHarmonics = 6;

// Per-pitch harmonic decay exponents: every profile decays, but each pitch
// gets its own timbre so neighbouring fundamentals stay distinguishable.
inline constexpr std::array<double, 4> kDecayExponent = {0.5, 1.6, 0.9, 1.25};

inline void add_tone(std::vector<double>& out, std::size_t start, std::size_t len,
                     double freq, double sample_rate, const std::array<double, kHarmonics>& phases,
                     double decay_exponent) {
  const std::size_t ramp = static_cast<std::size_t>(0.01 * sample_rate);
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double v = 0.0;
    for (std::size_t h = 0; h < kHarmonics; ++h) {
      const double f = freq * static_cast<double>(h + 1);
      if (f >= sample_rate / 2.0) break;
      const double amp = 0.22 * std::pow(static_cast<double>(h + 1), -decay_exponent);
      v += amp * std::sin(2.0 * std::numbers::pi * f * t + phases[h]);
    }
    double env = 1.0;
    if (i < ramp) env = static_cast<double>(i) / static_cast<double>(ramp);
    if (len - i <= ramp) env = std::min(env, static_cast<double>(len - i) / static_cast<double>(ramp));
    out[start + i] += v * env;
  }
}

}  // namespace toy_detail

/// Note order D, Eb, G, F#, G: five notes, four pitches, 0.5 s per note with
/// short silent gaps so the active segments stay temporally disjoint.
inline ToyNotes generate_toy_notes(std::uint64_t seed, double sample_rate = 8000.0,
                                   const StftParams& stft_params = {}) {
  using namespace toy_detail;
  ToyNotes toy;
  toy.note_sequence = {0, 1, 3, 2, 3};

  const double note_sec = 0.5, gap_sec = 0.1;
  const std::size_t note_len = static_cast<std::size_t>(note_sec * sample_rate);
  const std::size_t gap_len = static_cast<std::size_t>(gap_sec * sample_rate);
  const std::size_t n_notes = toy.note_sequence.size();
  const std::size_t total = gap_len + n_notes * (note_len + gap_len);

  Rng rng(seed);
  std::array<std::array<double, kHarmonics>, 4> phases;
  for (auto& p : phases)
    for (double& ph : p) ph = rng.uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<double> samples(total, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // per note: [start, end)
  std::size_t pos = gap_len;
  for (std::size_t note = 0; note < n_notes; ++note) {
    const std::size_t pitch = toy.note_sequence[note];
    add_tone(samples, pos, note_len, kPitchesHz[pitch], sample_rate, phases[pitch],
             kDecayExponent[pitch]);
    spans.emplace_back(pos, pos + note_len);
    pos += note_len + gap_len;
  }
  toy.wave.samples = std::move(samples);
  toy.wave.sample_rate = sample_rate;

  // Per-pitch spectral templates: mean magnitude spectrum of the pitch
  // played alone under the same analysis settings.
  const std::size_t bins = stft_params.n_fft / 2 + 1;
  toy.templates = Matrix(bins, 4, 0.0);
  for (std::size_t pitch = 0; pitch < 4; ++pitch) {
    std::vector<double> tone(note_len, 0.0);
    add_tone(tone, 0, note_len, kPitchesHz[pitch], sample_rate, phases[pitch],
             kDecayExponent[pitch]);
    Waveform w{std::move(tone), sample_rate};
    const ComplexSpectrogram spec = stft(w, stft_params);
    // Average only well-inside frames, away from the onset/offset ramps.
    const std::size_t f0 = spec.magnitude.cols() / 4;
    const std::size_t f1 = 3 * spec.magnitude.cols() / 4;
    for (std::size_t f = f0; f < f1; ++f)
      for (std::size_t b = 0; b < bins; ++b) toy.templates(b, pitch) += spec.magnitude(b, f);
    for (std::size_t b = 0; b < bins; ++b)
      toy.templates(b, pitch) /= static_cast<double>(f1 - f0);
  }

  // Gates over the frames of the full waveform's spectrogram: frame centers
  // falling inside a note's span.
  const ComplexSpectrogram full = stft(toy.wave, stft_params);
  const std::size_t n_frames = full.magnitude.cols();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(stft_params.n_fft - stft_params.hop);
  toy.gates = Matrix(4, n_frames, 0.0);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(f * stft_params.hop) - pad +
                                  static_cast<std::ptrdiff_t>(stft_params.n_fft / 2);
    for (std::size_t note = 0; note < n_notes; ++note) {
      if (center >= static_cast<std::ptrdiff_t>(spans[note].first) &&
          center < static_cast<std::ptrdiff_t>(spans[note].second))
        toy.gates(toy.note_sequence[note], f) = 1.0;
    }
  }
  return toy;
}

}  // namespace naesep

#endif  // NAESEP_TOY_HPP
