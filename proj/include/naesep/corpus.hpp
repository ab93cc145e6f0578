#ifndef NAESEP_CORPUS_HPP
#define NAESEP_CORPUS_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "naesep/rng.hpp"
#include "naesep/wav.hpp"

namespace naesep {

/// Fixed per-speaker voice characteristics: fundamental range and two
/// formant-like band emphases. Centers are spread across speakers so that
/// spectral centroids stay well apart.
struct SpeakerVoice {
  double f0_base;
  double formant1;
  double formant2;
  double bw1;
  double bw2;
};

inline SpeakerVoice speaker_voice(std::uint64_t corpus_seed, std::size_t speaker) {
  Rng rng(seed_combine(corpus_seed, seed_combine(hash_string("voice"), speaker)));
  SpeakerVoice v;
  v.f0_base = 85.0 + 35.0 * static_cast<double>(speaker) + rng.uniform(0.0, 8.0);
  v.formant1 = 400.0 + 300.0 * static_cast<double>(speaker) + rng.uniform(-30.0, 30.0);
  v.formant2 = v.formant1 + 550.0 + rng.uniform(-40.0, 40.0);
  v.bw1 = 180.0 + rng.uniform(0.0, 60.0);
  v.bw2 = 260.0 + rng.uniform(0.0, 80.0);
  return v;
}

/// One "utterance": harmonic source with drifting fundamental, shaped by the
/// speaker's band emphases, gated by a syllable-rate envelope, plus faint
/// breath noise in the same bands.
inline Waveform synthesize_clip(const SpeakerVoice& voice, std::uint64_t clip_seed,
                                double sample_rate = 8000.0, double seconds = 1.0) {
  Rng rng(clip_seed);
  const std::size_t n = static_cast<std::size_t>(seconds * sample_rate);
  const double vib_rate = rng.uniform(2.0, 4.0);
  const double vib_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double syl_rate = rng.uniform(2.0, 3.5);
  const double syl_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double f0_jitter = rng.uniform(0.9, 1.1);

  auto band_gain = [&](double f) {
    const double d1 = (f - voice.formant1) / voice.bw1;
    const double d2 = (f - voice.formant2) / voice.bw2;
    return std::exp(-d1 * d1) + 0.7 * std::exp(-d2 * d2);
  };

  const std::size_t max_harm = 40;
  std::vector<double> phase(max_harm, 0.0);
  for (double& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(n, 0.0);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f0 = voice.f0_base * f0_jitter *
                      (1.0 + 0.04 * std::sin(2.0 * std::numbers::pi * vib_rate * t + vib_phase));
    // Phase accumulation keeps harmonics coherent through the drift.
    const double dphi = 2.0 * std::numbers::pi * f0 / sample_rate;
    double v = 0.0;
    for (std::size_t h = 0; h < max_harm; ++h) {
      const double f = f0 * static_cast<double>(h + 1);
      if (f >= 0.95 * sample_rate / 2.0) break;
      phase[h] += dphi * static_cast<double>(h + 1);
      v += band_gain(f) * std::sin(phase[h]);
    }
    const double syl = std::sin(2.0 * std::numbers::pi * syl_rate * t + syl_phase);
    const double env = 0.15 + 0.85 * std::pow(std::max(0.0, syl), 1.5);
    const double breath = 0.02 * (rng.uniform() * 2.0 - 1.0);
    const double s = env * (v + breath);
    w.samples[i] = s;
    peak = std::max(peak, std::fabs(s));
  }
  if (peak > 0.0)
    for (double& s : w.samples) s *= 0.5 / peak;
  return w;
}

/// Writes a corpus tree <root>/speaker_XX/clip_XX.wav of float32 WAVs.
/// Same seed, same tree.
inline void make_synthetic_corpus(const std::string& root, std::uint64_t seed,
                                  std::size_t n_speakers, std::size_t clips_per_speaker,
                                  double sample_rate = 8000.0, double clip_seconds = 1.0) {
  if (n_speakers < 2) throw std::invalid_argument("make_synthetic_corpus: need >= 2 speakers");
  if (clips_per_speaker < 2)
    throw std::invalid_argument("make_synthetic_corpus: need >= 2 clips per speaker");
  namespace fs = std::filesystem;
  for (std::size_t s = 0; s < n_speakers; ++s) {
    char dirname[32];
    std::snprintf(dirname, sizeof dirname, "speaker_%02zu", s);
    const fs::path dir = fs::path(root) / dirname;
    fs::create_directories(dir);
    const SpeakerVoice voice = speaker_voice(seed, s);
    for (std::size_t c = 0; c < clips_per_speaker; ++c) {
      char fname[32];
      std::snprintf(fname, sizeof fname, "clip_%02zu.wav", c);
      const std::uint64_t clip_seed =
          seed_combine(seed, seed_combine(hash_string(dirname), c));
      write_wav((dir / fname).string(),
                synthesize_clip(voice, clip_seed, sample_rate, clip_seconds),
                /*float32=*/true);
    }
  }
}

/// Scans <root>/<speaker_id>/*.wav; per-speaker clip lists sorted by name.
inline std::map<std::string, std::vector<std::string>> list_corpus(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root))
    throw std::runtime_error("corpus root is not a directory: " + root);
  std::map<std::string, std::vector<std::string>> corpus;
  for (const auto& speaker_dir : fs::directory_iterator(root)) {
    if (!speaker_dir.is_directory()) continue;
    std::vector<std::string> clips;
    for (const auto& f : fs::directory_iterator(speaker_dir.path()))
      if (f.path().extension() == ".wav") clips.push_back(f.path().string());
    if (clips.empty())
      throw std::runtime_error("corpus speaker has no wav files: " +
                               speaker_dir.path().string());
    std::sort(clips.begin(), clips.end());
    corpus[speaker_dir.path().filename().string()] = std::move(clips);
  }
  if (corpus.size() < 2)
    throw std::runtime_error("corpus needs at least two speakers: " + root);
  return corpus;
}

}  // namespace naesep

#endif  // NAESEP_CORPUS_HPP
