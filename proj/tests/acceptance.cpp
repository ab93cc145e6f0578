// Acceptance gate: one pass/fail line per criterion. Run with no arguments
// for the full gate or with `--only N` for a single criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "naesep/naesep.hpp"
#include "test_helpers.hpp"

using namespace naesep;
using namespace naesep::testing;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Matrix random_nonneg(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = rng.uniform(0.0, 2.0);
  return m;
}

Waveform band_noise(std::size_t n, double sr, double f_lo, double f_hi, std::uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = sr;
  w.samples.assign(n, 0.0);
  const int partials = 120;
  for (int p = 0; p < partials; ++p) {
    const double f = rng.uniform(f_lo, f_hi);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amp = rng.uniform(0.5, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      w.samples[i] +=
          amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / sr + phase);
  }
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::fabs(s));
  for (double& s : w.samples) s *= 0.5 / peak;
  return w;
}

// --- criterion 1: analytic gradients vs central finite differences --------

Check criterion_1() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    for (const auto& sizes :
         {std::vector<std::size_t>{8, 4, 8}, std::vector<std::size_t>{8, 4, 4, 4, 8}}) {
      TrainConfig init_cfg;
      init_cfg.seed = seed;
      init_cfg.max_iterations = 1;
      NAEModel model = nae_train(Matrix(8, 4, 0.5), sizes, init_cfg);
      const Matrix x = random_nonneg(8, 6, seed + 500);
      const double lambda = 0.1;
      const auto analytic = nae_gradients(model, x, lambda);
      Objective objective = [&](const std::vector<Matrix>& weights) {
        NAEModel m = model;
        m.weights = weights;
        const ForwardCache cache = nae_forward(m, x);
        return kl_cost(x, cache.output()) + lambda * l1_norm(cache.latent(m.depth_L));
      };
      const auto numeric = finite_difference_gradient(objective, model.weights, 1e-5);
      const double err = max_relative_error(analytic, numeric);
      c.require(err < 1e-4, "seed " + std::to_string(seed) + " depth " +
                                std::to_string(sizes.size() / 2) + " rel err " +
                                std::to_string(err));
    }
  }
  const double secs = seconds_since(t0);
  c.require(secs < 10.0, "runtime " + std::to_string(secs) + "s >= 10s");
  return c;
}

// --- criterion 2: NMF cost monotonicity -----------------------------------

Check criterion_2() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const Matrix x = random_nonneg(64, 100, 2024);
  for (std::size_t rank : {std::size_t{4}, std::size_t{20}}) {
    const NMFModel model = nmf_train(x, rank, 500, 7, /*tol=*/0.0);
    c.require(model.cost_trace.size() == 501,
              "rank " + std::to_string(rank) + " trace length " +
                  std::to_string(model.cost_trace.size()));
    for (std::size_t i = 1; i < model.cost_trace.size(); ++i)
      if (model.cost_trace[i] > model.cost_trace[i - 1] + 1e-10) {
        c.require(false, "rank " + std::to_string(rank) + " cost rose at iteration " +
                             std::to_string(i));
        break;
      }
  }
  const double secs = seconds_since(t0);
  c.require(secs < 30.0, "runtime " + std::to_string(secs) + "s >= 30s");
  return c;
}

// --- criterion 3: STFT round trip -----------------------------------------

Check criterion_3() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(3);
  Waveform x;
  x.sample_rate = 16000.0;
  x.samples.resize(16000);
  for (double& s : x.samples) s = rng.uniform(-0.5, 0.5);
  const Waveform y = istft(stft(x));
  c.require(y.samples.size() == x.samples.size(), "length changed");
  const double err = relative_l2(y.samples, x.samples);
  c.require(err < 1e-6, "reconstruction error " + std::to_string(err));
  const double secs = seconds_since(t0);
  c.require(secs < 1.0, "runtime " + std::to_string(secs) + "s >= 1s");
  return c;
}

// --- criterion 4: toy-note decomposition ----------------------------------

Check criterion_4() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const ToyNotes toy = generate_toy_notes(4);
  const ComplexSpectrogram spec = stft(toy.wave);

  const NMFModel nmf = nmf_train(spec.magnitude, 4, 500, 14);
  const double cos_score =
      best_permutation_min_score(4, [&](std::size_t truth, std::size_t learned) {
        return cosine_similarity(column(toy.templates, truth), column(nmf.w, learned));
      });
  c.require(cos_score > 0.95, "template cosine " + std::to_string(cos_score));

  // Fixed input scaling: softplus layers train poorly when the spectrogram
  // mean sits far below the nonlinearity's active range.
  Matrix x = spec.magnitude;
  x *= 30.0 * static_cast<double>(x.size()) / x.sum();
  TrainConfig cfg;
  cfg.seed = 1;
  cfg.lambda = 0.1;
  cfg.max_iterations = 10000;
  const std::size_t bins = x.rows();
  const NAEModel nae = nae_train(x, {bins, 4, bins}, cfg);
  const Matrix h = nae_forward(nae, x).latent(nae.depth_L);
  const double corr_score =
      best_permutation_min_score(4, [&](std::size_t truth, std::size_t learned) {
        return pearson(row(toy.gates, truth), row(h, learned));
      });
  c.require(corr_score > 0.9, "gate correlation " + std::to_string(corr_score));

  const double secs = seconds_since(t0);
  c.require(secs < 120.0, "runtime " + std::to_string(secs) + "s >= 120s");
  return c;
}

// --- criterion 5: disjoint-band separation sanity -------------------------

Check criterion_5() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const double sr = 16000.0;
  const Waveform train1 = band_noise(48000, sr, 100.0, 2000.0, 51);
  const Waveform train2 = band_noise(48000, sr, 3000.0, 5000.0, 52);
  const Waveform test1 = band_noise(32000, sr, 100.0, 2000.0, 53);
  const Waveform test2 = band_noise(32000, sr, 3000.0, 5000.0, 54);
  const Mixture mixture = make_mixture(test1, test2, 0.0);
  const ComplexSpectrogram spec = stft(mixture.mix);

  struct Pipeline {
    std::string name;
    ModelKind kind;
  };
  for (const Pipeline& p : {Pipeline{"nmf", ModelKind::NMF}, Pipeline{"nae", ModelKind::NAEShallow}}) {
    TrainConfig tc;
    tc.seed = 55;
    tc.lambda = 0.1;
    tc.max_iterations = 1000;
    const SourceModel m1 = train_source_model({train1}, p.kind, 20, tc, {}, 300);
    TrainConfig tc2 = tc;
    tc2.seed = 56;
    const SourceModel m2 = train_source_model({train2}, p.kind, 20, tc2, {}, 300);

    TrainConfig fit_cfg;
    fit_cfg.seed = 57;
    fit_cfg.lambda = 0.1;
    fit_cfg.max_iterations = 500;
    const MixtureFit fit = mixture_fit({m1, m2}, spec.magnitude, fit_cfg);

    // Soft masks partition unity bin by bin.
    double worst = 0.0;
    for (std::size_t k = 0; k < spec.magnitude.size(); ++k) {
      const double total = fit.estimates[0][k] + fit.estimates[1][k];
      const double s = fit.estimates[0][k] / total + fit.estimates[1][k] / total;
      worst = std::max(worst, std::fabs(s - 1.0));
    }
    c.require(worst < 1e-12, p.name + " mask sum off by " + std::to_string(worst));

    const std::vector<Waveform> outs = mask_reconstruct(fit.estimates, spec);
    std::vector<double> total(outs[0].samples.size(), 0.0);
    for (const auto& o : outs)
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += o.samples[i];
    const double cons = relative_l2(total, mixture.mix.samples);
    c.require(cons < 1e-6, p.name + " conservation error " + std::to_string(cons));

    const EvalResult eval = bss_eval(outs, {mixture.s1, mixture.s2}, 512);
    for (std::size_t src = 0; src < 2; ++src) {
      c.require(eval.sir[src] >= 15.0, p.name + " source " + std::to_string(src) +
                                           " SIR " + std::to_string(eval.sir[src]));
      c.require(eval.sdr[src] >= 10.0, p.name + " source " + std::to_string(src) +
                                           " SDR " + std::to_string(eval.sdr[src]));
    }
    std::fprintf(stderr, "  %s: SDR %.1f/%.1f dB, SIR %.1f/%.1f dB\n", p.name.c_str(),
                 eval.sdr[0], eval.sdr[1], eval.sir[0], eval.sir[1]);
  }
  const double secs = seconds_since(t0);
  c.require(secs < 300.0, "runtime " + std::to_string(secs) + "s >= 300s");
  return c;
}

// --- criterion 6: rank/depth direction on a synthetic corpus --------------

double cell_median_sdr(const nlohmann::ordered_json& summary, const std::string& method,
                       std::size_t rank) {
  for (const auto& cell : summary.at("cells"))
    if (cell.at("method") == method && cell.at("rank") == rank)
      return cell.at("sdr").at("median").get<double>();
  throw std::runtime_error("missing summary cell " + method + "/" + std::to_string(rank));
}

Check criterion_6() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  int wins = 0;
  const std::vector<std::uint64_t> master_seeds = {101, 202, 303};
  for (std::uint64_t seed : master_seeds) {
    const fs::path corpus = fresh_dir("naesep_acc6_corpus_" + std::to_string(seed));
    make_synthetic_corpus(corpus.string(), seed, 4, 10, 8000.0, 1.5);

    ExperimentConfig cfg;
    cfg.corpus_root = corpus.string();
    cfg.n_mixtures = 8;
    cfg.lambda = 0.1;
    // A stiff fit-time sparsity penalty keeps the high-capacity decoders from
    // absorbing the other source during the joint fit.
    cfg.fit_lambda = 10.0;
    cfg.train_iterations = 500;
    cfg.nmf_iterations = 300;
    cfg.fit_iterations = 300;
    cfg.filter_len = 512;
    cfg.master_seed = seed;

    cfg.methods = {ModelKind::NAEShallow};
    cfg.ranks = {20, 100};
    cfg.output_dir = fresh_dir("naesep_acc6_shallow_" + std::to_string(seed)).string();
    const ExperimentOutput shallow = run_experiment(cfg);

    cfg.methods = {ModelKind::NAEDeep};
    cfg.ranks = {100};
    cfg.output_dir = fresh_dir("naesep_acc6_deep_" + std::to_string(seed)).string();
    const ExperimentOutput deep = run_experiment(cfg);

    const double sh20 = cell_median_sdr(shallow.summary, "nae", 20);
    const double sh100 = cell_median_sdr(shallow.summary, "nae", 100);
    const double dp100 = cell_median_sdr(deep.summary, "nae-deep", 100);
    const bool win = dp100 >= sh100 && sh20 >= sh100 - 1.0;
    std::fprintf(stderr,
                 "  seed %llu: shallow20 %.2f dB, shallow100 %.2f dB, deep100 %.2f dB -> %s\n",
                 static_cast<unsigned long long>(seed), sh20, sh100, dp100,
                 win ? "holds" : "violated");
    if (win) ++wins;

    fs::remove_all(corpus);
    fs::remove_all(fs::temp_directory_path() / ("naesep_acc6_shallow_" + std::to_string(seed)));
    fs::remove_all(fs::temp_directory_path() / ("naesep_acc6_deep_" + std::to_string(seed)));
  }
  c.require(wins * 2 > static_cast<int>(master_seeds.size()),
            "direction held on " + std::to_string(wins) + "/" +
                std::to_string(master_seeds.size()) + " seeds");
  const double secs = seconds_since(t0);
  c.require(secs < 1800.0, "runtime " + std::to_string(secs) + "s >= 1800s");
  return c;
}

// --- criterion 7: bss_eval oracle -----------------------------------------

Check criterion_7() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(71);
  Waveform r1, r2;
  r1.sample_rate = r2.sample_rate = 8000.0;
  r1.samples.assign(4000, 0.0);
  r2.samples.assign(4000, 0.0);
  for (std::size_t i = 0; i < 4000; i += 2) r1.samples[i] = rng.uniform(0.5, 1.0);
  for (std::size_t i = 1; i < 4000; i += 2) r2.samples[i] = rng.uniform(0.5, 1.0);
  const double g = std::sqrt(bss_detail::energy(r1.samples) / bss_detail::energy(r2.samples));
  for (double& s : r2.samples) s *= g;

  const EvalResult exact = bss_eval({r1, r2}, {r1, r2}, 512);
  for (std::size_t i = 0; i < 2; ++i) {
    c.require(exact.sdr[i] == kMetricCapDb, "exact-match SDR not at cap");
    c.require(exact.sir[i] == kMetricCapDb, "exact-match SIR not at cap");
    c.require(exact.sar[i] == kMetricCapDb, "exact-match SAR not at cap");
  }

  Waveform est = r1;
  for (std::size_t i = 0; i < est.samples.size(); ++i) est.samples[i] += 0.1 * r2.samples[i];
  const EvalResult mixed = bss_eval({est, r2}, {r1, r2}, 1);
  c.require(std::fabs(mixed.sir[0] - 20.0) < 0.1,
            "orthogonal-interference SIR " + std::to_string(mixed.sir[0]));

  Waveform scaled = est;
  for (double& s : scaled.samples) s *= 5.7;
  const EvalResult a = bss_eval({est, r2}, {r1, r2}, 8);
  const EvalResult b = bss_eval({scaled, r2}, {r1, r2}, 8);
  c.require(std::fabs(a.sdr[0] - b.sdr[0]) < 1e-6 && std::fabs(a.sir[0] - b.sir[0]) < 1e-6 &&
                std::fabs(a.sar[0] - b.sar[0]) < 1e-6,
            "metrics moved under estimate scaling");

  const double secs = seconds_since(t0);
  c.require(secs < 5.0, "runtime " + std::to_string(secs) + "s >= 5s");
  return c;
}

// --- criterion 8: determinism ---------------------------------------------

Check criterion_8() {
  Check c;
  const fs::path corpus = fresh_dir("naesep_acc8_corpus");
  make_synthetic_corpus(corpus.string(), 8, 2, 3, 8000.0, 0.5);

  ExperimentConfig cfg;
  cfg.corpus_root = corpus.string();
  cfg.n_mixtures = 2;
  cfg.methods = {ModelKind::NMF, ModelKind::NAEShallow};
  cfg.ranks = {6};
  cfg.stft = {128, 32};
  cfg.train_iterations = 150;
  cfg.nmf_iterations = 100;
  cfg.fit_iterations = 100;
  cfg.filter_len = 32;
  cfg.master_seed = 88;

  cfg.output_dir = fresh_dir("naesep_acc8_out1").string();
  run_experiment(cfg);
  const std::string csv1 = slurp(fs::path(cfg.output_dir) / "results.csv");
  cfg.output_dir = fresh_dir("naesep_acc8_out2").string();
  run_experiment(cfg);
  const std::string csv2 = slurp(fs::path(cfg.output_dir) / "results.csv");
  c.require(!csv1.empty() && csv1 == csv2, "results.csv differs between identical runs");

  // Model persistence is bitwise-exact: save, load, save again.
  TrainConfig tc;
  tc.seed = 89;
  tc.max_iterations = 100;
  const NAEModel model = nae_train(random_nonneg(8, 12, 90), {8, 4, 4, 4, 8}, tc);
  const fs::path p1 = fs::temp_directory_path() / "naesep_acc8_m1.bin";
  const fs::path p2 = fs::temp_directory_path() / "naesep_acc8_m2.bin";
  save_nae_model(model, p1.string());
  const NAEModel loaded = load_nae_model(p1.string());
  save_nae_model(loaded, p2.string());
  c.require(slurp(p1) == slurp(p2), "model bytes changed across save/load/save");
  bool weights_equal = loaded.weights.size() == model.weights.size();
  for (std::size_t i = 0; weights_equal && i < model.weights.size(); ++i)
    weights_equal = loaded.weights[i] == model.weights[i];
  c.require(weights_equal, "loaded weights differ from saved weights");

  fs::remove_all(corpus);
  fs::remove_all(fs::temp_directory_path() / "naesep_acc8_out1");
  fs::remove_all(fs::temp_directory_path() / "naesep_acc8_out2");
  fs::remove(p1);
  fs::remove(p2);
  return c;
}

struct Criterion {
  int id;
  const char* description;
  std::function<Check()> run;
};

const std::vector<Criterion> kCriteria = {
    {1, "analytic gradients match finite differences (rel err < 1e-4)", criterion_1},
    {2, "NMF KL cost is monotone over 500 iterations at ranks 4 and 20", criterion_2},
    {3, "STFT round-trip error < 1e-6 on 1 s of noise", criterion_3},
    {4, "toy notes: NMF templates cosine > 0.95, sparse NAE gates corr > 0.9", criterion_4},
    {5, "disjoint-band separation: SIR >= 15 dB, SDR >= 10 dB, masks/conservation", criterion_5},
    {6, "corpus direction: deep@100 >= shallow@100, shallow@20 >= shallow@100 - 1 dB", criterion_6},
    {7, "bss_eval oracle: cap, 20 dB SIR construction, scale invariance", criterion_7},
    {8, "determinism: identical CSVs across runs, bitwise model round-trip", criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
      if (only < 1 || only > 8) {
        std::fprintf(stderr, "error: --only expects a criterion number 1..8\n");
        return 2;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }

  int failures = 0;
  for (const Criterion& crit : kCriteria) {
    if (only != 0 && crit.id != only) continue;
    Check result;
    try {
      result = crit.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s%s%s\n", result.ok ? "PASS" : "FAIL", crit.id,
                crit.description, result.detail.empty() ? "" : " -- ",
                result.detail.c_str());
    std::fflush(stdout);
    if (!result.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
