#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "naesep/metrics.hpp"
#include "naesep/rng.hpp"
#include "test_helpers.hpp"

using namespace naesep;
using namespace naesep::testing;

namespace {

Waveform noise(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = 8000.0;
  w.samples.resize(n);
  for (double& s : w.samples) s = scale * rng.uniform(-1.0, 1.0);
  return w;
}

// Equal-power references on interleaved (hence orthogonal) supports.
std::pair<Waveform, Waveform> orthogonal_pair(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Waveform a, b;
  a.sample_rate = b.sample_rate = 8000.0;
  a.samples.assign(n, 0.0);
  b.samples.assign(n, 0.0);
  for (std::size_t i = 0; i < n; i += 2) a.samples[i] = rng.uniform(0.5, 1.0);
  for (std::size_t i = 1; i < n; i += 2) b.samples[i] = rng.uniform(0.5, 1.0);
  const double ea = bss_detail::energy(a.samples);
  const double eb = bss_detail::energy(b.samples);
  const double g = std::sqrt(ea / eb);
  for (double& s : b.samples) s *= g;
  return {a, b};
}

}  // namespace

TEST_CASE("exact estimates hit the 150 dB cap") {
  const Waveform r1 = noise(4000, 1);
  const Waveform r2 = noise(4000, 2);
  const EvalResult res = bss_eval({r1, r2}, {r1, r2}, 512);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(res.sdr[i] == kMetricCapDb);
    CHECK(res.sir[i] == kMetricCapDb);
    CHECK(res.sar[i] == kMetricCapDb);
  }
}

TEST_CASE("orthogonal interference at -20 dB gives SIR = 20 dB") {
  auto [r1, r2] = orthogonal_pair(4000, 3);
  Waveform est = r1;
  for (std::size_t i = 0; i < est.samples.size(); ++i)
    est.samples[i] += 0.1 * r2.samples[i];
  const EvalResult res = bss_eval({est, r2}, {r1, r2}, 1);
  CHECK(std::fabs(res.sir[0] - 20.0) < 0.1);
  CHECK(res.sar[0] == kMetricCapDb);
}

TEST_CASE("projection absorbs a scale factor") {
  const Waveform r = noise(4000, 5);
  Waveform est = r;
  for (double& s : est.samples) s *= 0.5;
  const EvalResult res = bss_eval({est, noise(4000, 6)}, {r, noise(4000, 6)}, 1);
  CHECK(res.sdr[0] == kMetricCapDb);
}

TEST_CASE("metrics are invariant to estimate scaling") {
  auto [r1, r2] = orthogonal_pair(4000, 7);
  Waveform est = r1;
  for (std::size_t i = 0; i < est.samples.size(); ++i)
    est.samples[i] += 0.2 * r2.samples[i] + 0.01 * std::sin(0.01 * static_cast<double>(i));
  Waveform scaled = est;
  for (double& s : scaled.samples) s *= 7.3;
  const EvalResult a = bss_eval({est, r2}, {r1, r2}, 8);
  const EvalResult b = bss_eval({scaled, r2}, {r1, r2}, 8);
  CHECK(std::fabs(a.sdr[0] - b.sdr[0]) < 1e-6);
  CHECK(std::fabs(a.sir[0] - b.sir[0]) < 1e-6);
  CHECK(std::fabs(a.sar[0] - b.sar[0]) < 1e-6);
}

TEST_CASE("adding noise strictly lowers SDR and SAR") {
  auto [r1, r2] = orthogonal_pair(4000, 9);
  Waveform est = r1;
  const EvalResult clean = bss_eval({est, r2}, {r1, r2}, 4);
  Waveform noisy = est;
  Rng rng(10);
  for (double& s : noisy.samples) s += 0.05 * rng.uniform(-1.0, 1.0);
  const EvalResult dirty = bss_eval({noisy, r2}, {r1, r2}, 4);
  CHECK(dirty.sdr[0] < clean.sdr[0]);
  CHECK(dirty.sar[0] < clean.sar[0]);
}

TEST_CASE("filter_len=1 agrees with the closed-form two-vector projection") {
  auto [r1, r2] = orthogonal_pair(4000, 11);
  Rng rng(12);
  Waveform est;
  est.sample_rate = 8000.0;
  est.samples.resize(4000);
  for (std::size_t i = 0; i < 4000; ++i)
    est.samples[i] = 0.8 * r1.samples[i] + 0.25 * r2.samples[i] +
                     0.02 * rng.uniform(-1.0, 1.0);
  const EvalResult res = bss_eval({est, r2}, {r1, r2}, 1);

  // Closed form: project est onto each orthogonal reference directly.
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  const double c1 = dot(est.samples, r1.samples) / dot(r1.samples, r1.samples);
  const double c2 = dot(est.samples, r2.samples) / dot(r2.samples, r2.samples);
  double e_target = 0.0, e_interf = 0.0, e_artif = 0.0, e_full = 0.0;
  for (std::size_t i = 0; i < 4000; ++i) {
    const double st = c1 * r1.samples[i];
    const double pall = c1 * r1.samples[i] + c2 * r2.samples[i];
    e_target += st * st;
    e_interf += (pall - st) * (pall - st);
    e_artif += (est.samples[i] - pall) * (est.samples[i] - pall);
    e_full += pall * pall;
  }
  const double sdr = 10.0 * std::log10(e_target / (e_interf + e_artif));
  const double sir = 10.0 * std::log10(e_target / e_interf);
  const double sar = 10.0 * std::log10(e_full / e_artif);
  CHECK(std::fabs(res.sdr[0] - sdr) < 1e-6);
  CHECK(std::fabs(res.sir[0] - sir) < 1e-6);
  CHECK(std::fabs(res.sar[0] - sar) < 1e-6);
}

TEST_CASE("silent references and bad inputs are rejected") {
  Waveform silent;
  silent.sample_rate = 8000.0;
  silent.samples.assign(1000, 0.0);
  const Waveform r = noise(1000, 13);
  CHECK_THROWS_AS(bss_eval({r}, {silent}, 16), std::invalid_argument);
  CHECK_THROWS_AS(bss_eval({r}, {r, r}, 16), std::invalid_argument);
  CHECK_THROWS_AS(bss_eval({r}, {r}, 0), std::invalid_argument);
}

TEST_CASE("median aggregation") {
  auto make = [](double v) {
    EvalResult e;
    e.sdr = {v};
    e.sir = {v};
    e.sar = {v};
    return e;
  };
  const EvalSummary a = median_aggregate({make(3), make(5), make(100)});
  CHECK(a.sdr.median == 5.0);

  const EvalSummary b = median_aggregate({make(1), make(2), make(3), make(4)});
  CHECK(b.sdr.median == doctest::Approx(2.5));
  CHECK(b.sdr.q1 == doctest::Approx(1.75));
  CHECK(b.sdr.q3 == doctest::Approx(3.25));

  const EvalSummary c = median_aggregate({make(7)});
  CHECK(c.sir.median == 7.0);
  CHECK(c.sir.q3 - c.sir.q1 == 0.0);

  CHECK_THROWS_AS(median_aggregate({}), std::invalid_argument);
}
