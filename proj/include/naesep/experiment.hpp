#ifndef NAESEP_EXPERIMENT_HPP
#define NAESEP_EXPERIMENT_HPP

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "naesep/corpus.hpp"
#include "naesep/dsp.hpp"
#include "naesep/metrics.hpp"
#include "naesep/model_io.hpp"
#include "naesep/separation.hpp"

namespace naesep {

struct ExperimentConfig {
  std::string corpus_root;
  std::string output_dir;
  std::size_t n_mixtures = 32;
  std::vector<ModelKind> methods = {ModelKind::NMF, ModelKind::NAEShallow};
  std::vector<std::size_t> ranks = {20};
  StftParams stft;
  double lambda = 0.1;      // training sparsity weight
  double fit_lambda = 0.1;  // sparsity weight for the joint mixture fit
  std::size_t train_iterations = 2000;   // NAE RProp budget
  std::size_t nmf_iterations = 500;
  std::size_t fit_iterations = 500;      // mixture-fit budget
  double tol = 1e-6;
  std::size_t filter_len = 512;
  std::uint64_t master_seed = 0;
};

struct ResultRow {
  std::size_t mixture_id = 0;
  std::string speaker_a, speaker_b;
  std::string method;
  std::size_t rank = 0;
  std::size_t depth = 0;   // 0 = NMF, 1 = shallow NAE, 2 = deep NAE
  std::size_t source_index = 0;
  double sdr = 0.0, sir = 0.0, sar = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  nlohmann::ordered_json summary;
};

namespace exp_detail {

inline std::size_t method_depth(ModelKind kind) {
  switch (kind) {
    case ModelKind::NMF: return 0;
    case ModelKind::NAEShallow: return 1;
    case ModelKind::NAEDeep: return 2;
  }
  return 0;
}

inline std::uint64_t cell_seed(std::uint64_t master, std::size_t mixture, ModelKind method,
                               std::size_t rank) {
  std::uint64_t s = seed_combine(master, hash_string(to_string(method)));
  s = seed_combine(s, rank);
  return seed_combine(s, mixture);
}

inline std::uint64_t model_seed(std::uint64_t master, const std::string& speaker,
                                ModelKind method, std::size_t rank) {
  std::uint64_t s = seed_combine(master, hash_string(speaker + "/" + to_string(method)));
  return seed_combine(s, rank);
}

inline std::string fmt_db(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string row_key(const ResultRow& r) {
  return std::to_string(r.mixture_id) + "|" + r.method + "|" + std::to_string(r.rank) +
         "|" + std::to_string(r.source_index);
}

inline std::string csv_line(const ResultRow& r) {
  std::ostringstream os;
  os << r.mixture_id << ',' << r.speaker_a << ',' << r.speaker_b << ',' << r.method << ','
     << r.rank << ',' << r.depth << ',' << r.source_index << ',' << fmt_db(r.sdr) << ','
     << fmt_db(r.sir) << ',' << fmt_db(r.sar) << ',' << r.seed;
  return os.str();
}

inline const char* kCsvHeader =
    "mixture_id,speaker_a,speaker_b,method,rank,depth,source_index,"
    "sdr_db,sir_db,sar_db,seed";

inline std::vector<ResultRow> parse_results_csv(const std::string& path) {
  std::vector<ResultRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 11) continue;
    ResultRow r;
    r.mixture_id = std::stoul(fields[0]);
    r.speaker_a = fields[1];
    r.speaker_b = fields[2];
    r.method = fields[3];
    r.rank = std::stoul(fields[4]);
    r.depth = std::stoul(fields[5]);
    r.source_index = std::stoul(fields[6]);
    r.sdr = std::stod(fields[7]);
    r.sir = std::stod(fields[8]);
    r.sar = std::stod(fields[9]);
    r.seed = std::stoull(fields[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace exp_detail

inline nlohmann::ordered_json summarize_rows(const std::vector<ResultRow>& rows,
                                             const ExperimentConfig& config) {
  using nlohmann::ordered_json;
  std::map<std::pair<std::string, std::size_t>, std::vector<ResultRow>> cells;
  for (const ResultRow& r : rows) cells[{r.method, r.rank}].push_back(r);

  ordered_json summary;
  summary["schema_version"] = 1;
  summary["master_seed"] = config.master_seed;
  summary["n_mixtures"] = config.n_mixtures;
  summary["quartile_method"] = "linear-interpolation (R type 7)";
  summary["cells"] = ordered_json::array();
  for (const auto& [key, cell_rows] : cells) {
    std::vector<EvalResult> results;
    for (const ResultRow& r : cell_rows) {
      EvalResult e;
      e.sdr = {r.sdr};
      e.sir = {r.sir};
      e.sar = {r.sar};
      results.push_back(std::move(e));
    }
    const EvalSummary s = median_aggregate(results);
    ordered_json cell;
    cell["method"] = key.first;
    cell["rank"] = key.second;
    cell["depth"] = cell_rows.front().depth;
    cell["n"] = cell_rows.size();
    auto metric = [](const MetricSummary& m) {
      ordered_json j;
      j["median"] = m.median;
      j["q1"] = m.q1;
      j["q3"] = m.q3;
      return j;
    };
    cell["sdr"] = metric(s.sdr);
    cell["sir"] = metric(s.sir);
    cell["sar"] = metric(s.sar);
    summary["cells"].push_back(std::move(cell));
  }
  return summary;
}

/// Runs the full mixture-by-method-by-rank grid. Cells already present in
/// an existing results.csv are reused; everything recomputed is a pure
/// function of (config, master_seed). Writes results.csv and summary.json
/// under output_dir; wall-clock timings go to timings.csv, kept out of the
/// deterministic outputs.
inline ExperimentOutput run_experiment(const ExperimentConfig& config) {
  using namespace exp_detail;
  namespace fs = std::filesystem;
  if (config.n_mixtures < 1) throw std::invalid_argument("run_experiment: n_mixtures < 1");
  if (config.ranks.empty() || config.methods.empty())
    throw std::invalid_argument("run_experiment: empty method/rank grid");

  const auto corpus = list_corpus(config.corpus_root);
  std::vector<std::string> speakers;
  for (const auto& [name, clips] : corpus) {
    if (clips.size() < 2)
      throw std::runtime_error("speaker needs >= 2 clips (train + test): " +
                               config.corpus_root + "/" + name);
    speakers.push_back(name);
  }

  fs::create_directories(config.output_dir);
  const std::string results_path = (fs::path(config.output_dir) / "results.csv").string();
  const std::string summary_path = (fs::path(config.output_dir) / "summary.json").string();
  const std::string timings_path = (fs::path(config.output_dir) / "timings.csv").string();

  std::map<std::string, ResultRow> done;
  for (ResultRow& r : parse_results_csv(results_path)) done[row_key(r)] = std::move(r);

  // Speaker pair per mixture, drawn from the master seed.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t m = 0; m < config.n_mixtures; ++m) {
    Rng rng(seed_combine(config.master_seed, seed_combine(hash_string("pair"), m)));
    const std::size_t a = rng.index(speakers.size());
    std::size_t b = rng.index(speakers.size() - 1);
    if (b >= a) ++b;
    pairs.emplace_back(a, b);
  }

  // Split rule: lexicographically last clip is the test clip.
  auto train_clips = [&](const std::string& speaker) {
    const auto& clips = corpus.at(speaker);
    std::vector<Waveform> waves;
    for (std::size_t i = 0; i + 1 < clips.size(); ++i) waves.push_back(read_wav(clips[i]));
    return waves;
  };
  auto test_clip = [&](const std::string& speaker) {
    return read_wav(corpus.at(speaker).back());
  };

  std::map<std::tuple<std::string, std::string, std::size_t>, SourceModel> model_cache;
  auto get_model = [&](const std::string& speaker, ModelKind method, std::size_t rank) {
    const auto key = std::make_tuple(speaker, to_string(method), rank);
    auto it = model_cache.find(key);
    if (it != model_cache.end()) return it->second;
    TrainConfig tc;
    tc.lambda = config.lambda;
    tc.max_iterations = config.train_iterations;
    tc.tol = config.tol;
    tc.seed = model_seed(config.master_seed, speaker, method, rank);
    SourceModel model = train_source_model(train_clips(speaker), method, rank, tc,
                                           config.stft, config.nmf_iterations);
    model_cache[key] = model;
    return model;
  };

  std::vector<ResultRow> rows;
  std::ofstream timings(timings_path);
  timings << "mixture_id,method,rank,seconds\n";

  for (ModelKind method : config.methods) {
    for (std::size_t rank : config.ranks) {
      for (std::size_t m = 0; m < config.n_mixtures; ++m) {
        const std::string method_name = to_string(method);
        bool have_all = true;
        for (std::size_t src = 0; src < 2; ++src) {
          ResultRow probe;
          probe.mixture_id = m;
          probe.method = method_name;
          probe.rank = rank;
          probe.source_index = src;
          if (!done.count(row_key(probe))) have_all = false;
        }
        if (have_all) {
          for (std::size_t src = 0; src < 2; ++src) {
            ResultRow probe;
            probe.mixture_id = m;
            probe.method = method_name;
            probe.rank = rank;
            probe.source_index = src;
            rows.push_back(done.at(row_key(probe)));
          }
          continue;
        }

        const auto start = std::chrono::steady_clock::now();
        const auto& [ia, ib] = pairs[m];
        const std::string& spk_a = speakers[ia];
        const std::string& spk_b = speakers[ib];
        const SourceModel model_a = get_model(spk_a, method, rank);
        const SourceModel model_b = get_model(spk_b, method, rank);

        const Mixture mixture = make_mixture(test_clip(spk_a), test_clip(spk_b), 0.0);
        TrainConfig fit_cfg;
        fit_cfg.lambda = config.fit_lambda;
        fit_cfg.max_iterations = config.fit_iterations;
        fit_cfg.tol = config.tol;
        fit_cfg.seed = cell_seed(config.master_seed, m, method, rank);
        const std::vector<Waveform> separated =
            separate(mixture.mix, {model_a, model_b}, fit_cfg, config.stft);
        const EvalResult eval =
            bss_eval(separated, {mixture.s1, mixture.s2}, config.filter_len);

        for (std::size_t src = 0; src < 2; ++src) {
          ResultRow r;
          r.mixture_id = m;
          r.speaker_a = spk_a;
          r.speaker_b = spk_b;
          r.method = method_name;
          r.rank = rank;
          r.depth = method_depth(method);
          r.source_index = src;
          r.sdr = eval.sdr[src];
          r.sir = eval.sir[src];
          r.sar = eval.sar[src];
          r.seed = fit_cfg.seed;
          rows.push_back(std::move(r));
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        timings << m << ',' << method_name << ',' << rank << ',' << secs << '\n';
        std::cerr << "cell mixture=" << m << " method=" << method_name << " rank=" << rank
                  << " done in " << secs << "s\n";
      }
    }
  }

  // Canonical ordering regardless of completion order.
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.mixture_id, a.method, a.rank, a.source_index) <
           std::tie(b.mixture_id, b.method, b.rank, b.source_index);
  });

  const std::size_t expected = config.n_mixtures * config.methods.size() *
                               config.ranks.size() * 2;
  if (rows.size() != expected)
    throw std::runtime_error("run_experiment: row count " + std::to_string(rows.size()) +
                             " != expected " + std::to_string(expected));

  std::ofstream out(results_path);
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) out << csv_line(r) << '\n';

  ExperimentOutput output;
  output.rows = std::move(rows);
  output.summary = summarize_rows(output.rows, config);
  std::ofstream js(summary_path);
  js << output.summary.dump(2) << '\n';
  return output;
}

}  // namespace naesep

#endif  // NAESEP_EXPERIMENT_HPP
