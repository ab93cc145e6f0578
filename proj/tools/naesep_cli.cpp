// Command line front end: model training, separation, evaluation, the
// experiment grid, and the synthetic-signal generators.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "naesep/naesep.hpp"

namespace fs = std::filesystem;
using namespace naesep;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Waveform> load_inputs(const std::vector<std::string>& inputs) {
  std::vector<Waveform> waves;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> files;
      for (const auto& f : fs::directory_iterator(in))
        if (f.path().extension() == ".wav") files.push_back(f.path().string());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) waves.push_back(read_wav(f));
    } else {
      waves.push_back(read_wav(in));
    }
  }
  return waves;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-negative autoencoder source separation toolkit"};
  app.require_subcommand(1);

  // Shared DSP defaults: 512-pt DFT, sqrt-Hann, 25% hop.
  StftParams stft_params;

  // train
  auto* train = app.add_subcommand("train", "Train a source model from clean audio");
  std::vector<std::string> train_inputs;
  std::string train_kind = "nae", train_out;
  std::size_t train_rank = 20, train_iters = 2000, train_nmf_iters = 500;
  double train_lambda = 0.1;
  std::uint64_t train_seed = 0;
  train->add_option("-i,--input", train_inputs, "Training wav file(s) or directory")
      ->required();
  train->add_option("-k,--kind", train_kind, "Model kind: nmf | nae | nae-deep")
      ->capture_default_str();
  train->add_option("-r,--rank", train_rank, "Rank / latent size")->capture_default_str();
  train->add_option("--lambda", train_lambda, "Sparsity weight")->capture_default_str();
  train->add_option("--iters", train_iters, "Max RProp iterations (NAE)")
      ->capture_default_str();
  train->add_option("--nmf-iters", train_nmf_iters, "NMF iterations")->capture_default_str();
  train->add_option("--seed", train_seed, "Training seed")->capture_default_str();
  train->add_option("--n-fft", stft_params.n_fft, "DFT size")->capture_default_str();
  train->add_option("--hop", stft_params.hop, "Hop size in samples")->capture_default_str();
  train->add_option("-o,--output", train_out, "Output model file")->required();

  // separate
  auto* sep = app.add_subcommand("separate", "Separate a mixture with trained models");
  std::string sep_mixture, sep_outdir = ".";
  std::vector<std::string> sep_models;
  std::size_t sep_iters = 500;
  double sep_lambda = 0.1;
  std::uint64_t sep_seed = 0;
  sep->add_option("-m,--mixture", sep_mixture, "Mixture wav")->required();
  sep->add_option("--model", sep_models, "Model file (repeat per source)")
      ->required()
      ->expected(-2);
  sep->add_option("-o,--out-dir", sep_outdir, "Output directory")->capture_default_str();
  sep->add_option("--lambda", sep_lambda, "Sparsity weight for the joint fit")
      ->capture_default_str();
  sep->add_option("--iters", sep_iters, "Mixture-fit iterations")->capture_default_str();
  sep->add_option("--seed", sep_seed, "Fit seed")->capture_default_str();
  sep->add_option("--n-fft", stft_params.n_fft, "DFT size");
  sep->add_option("--hop", stft_params.hop, "Hop size in samples");

  // eval
  auto* ev = app.add_subcommand("eval", "BSS_EVAL metrics for estimates vs references");
  std::vector<std::string> ev_estimates, ev_references;
  std::size_t ev_filter_len = 512;
  ev->add_option("-e,--estimate", ev_estimates, "Estimated wav (repeat per source)")
      ->required();
  ev->add_option("-r,--reference", ev_references, "Reference wav (repeat per source)")
      ->required();
  ev->add_option("--filter-len", ev_filter_len, "Projection filter taps")
      ->capture_default_str();

  // experiment
  auto* ex = app.add_subcommand("experiment", "Run the mixture x method x rank grid");
  ExperimentConfig config;
  std::string ex_methods = "nmf,nae", ex_ranks = "20";
  bool seed_set = false;
  ex->add_option("-c,--corpus", config.corpus_root, "Corpus root (<root>/<speaker>/*.wav)")
      ->required();
  ex->add_option("-o,--out", config.output_dir, "Output directory")->required();
  ex->add_option("-n,--n-mixtures", config.n_mixtures, "Number of mixtures")
      ->capture_default_str();
  ex->add_option("--methods", ex_methods, "Comma list of nmf,nae,nae-deep")
      ->capture_default_str();
  ex->add_option("--ranks", ex_ranks, "Comma list of ranks")->capture_default_str();
  ex->add_option("--lambda", config.lambda, "Training sparsity weight")->capture_default_str();
  ex->add_option("--fit-lambda", config.fit_lambda, "Mixture-fit sparsity weight")
      ->capture_default_str();
  ex->add_option("--train-iters", config.train_iterations, "NAE training budget")
      ->capture_default_str();
  ex->add_option("--nmf-iters", config.nmf_iterations, "NMF training budget")
      ->capture_default_str();
  ex->add_option("--fit-iters", config.fit_iterations, "Mixture-fit budget")
      ->capture_default_str();
  ex->add_option("--filter-len", config.filter_len, "BSS_EVAL filter taps")
      ->capture_default_str();
  ex->add_option("--n-fft", config.stft.n_fft, "DFT size")->capture_default_str();
  ex->add_option("--hop", config.stft.hop, "Hop size in samples")->capture_default_str();
  ex->add_option("--seed", config.master_seed, "Master seed (required)")
      ->required()
      ->each([&](const std::string&) { seed_set = true; });

  // toy
  auto* toy_cmd = app.add_subcommand("toy", "Write the five-note toy signal");
  std::string toy_out = "toy.wav";
  std::uint64_t toy_seed = 0;
  toy_cmd->add_option("-o,--output", toy_out, "Output wav")->capture_default_str();
  toy_cmd->add_option("--seed", toy_seed, "Seed")->capture_default_str();

  // make-corpus
  auto* mc = app.add_subcommand("make-corpus", "Generate a synthetic speaker corpus");
  std::string mc_out;
  std::size_t mc_speakers = 4, mc_clips = 10;
  std::uint64_t mc_seed = 0;
  double mc_rate = 8000.0, mc_seconds = 1.0;
  mc->add_option("-o,--out", mc_out, "Corpus root directory")->required();
  mc->add_option("--speakers", mc_speakers, "Number of speakers")->capture_default_str();
  mc->add_option("--clips", mc_clips, "Clips per speaker")->capture_default_str();
  mc->add_option("--seed", mc_seed, "Seed")->capture_default_str();
  mc->add_option("--sample-rate", mc_rate, "Sample rate in Hz")->capture_default_str();
  mc->add_option("--clip-seconds", mc_seconds, "Clip length in seconds")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      TrainConfig tc;
      tc.lambda = train_lambda;
      tc.max_iterations = train_iters;
      tc.seed = train_seed;
      const SourceModel model =
          train_source_model(load_inputs(train_inputs), model_kind_from_string(train_kind),
                             train_rank, tc, stft_params, train_nmf_iters);
      save_source_model(model, train_out);
      std::cout << "trained " << train_kind << " rank=" << train_rank
                << " final_cost=" << model.final_cost << " -> " << train_out << "\n";
    } else if (*sep) {
      std::vector<SourceModel> models;
      for (const auto& path : sep_models) models.push_back(load_source_model(path));
      TrainConfig tc;
      tc.lambda = sep_lambda;
      tc.max_iterations = sep_iters;
      tc.seed = sep_seed;
      const Waveform mixture = read_wav(sep_mixture);
      const std::vector<Waveform> outputs = separate(mixture, models, tc, stft_params);
      fs::create_directories(sep_outdir);
      for (std::size_t i = 0; i < outputs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "source_%02zu.wav", i);
        const std::string path = (fs::path(sep_outdir) / name).string();
        write_wav(path, outputs[i]);
        std::cout << path << "\n";
      }
    } else if (*ev) {
      std::vector<Waveform> estimates, references;
      for (const auto& p : ev_estimates) estimates.push_back(read_wav(p));
      for (const auto& p : ev_references) references.push_back(read_wav(p));
      const EvalResult result = bss_eval(estimates, references, ev_filter_len);
      std::cout << "source,sdr_db,sir_db,sar_db\n";
      for (std::size_t i = 0; i < result.sdr.size(); ++i)
        std::printf("%zu,%.6f,%.6f,%.6f\n", i, result.sdr[i], result.sir[i], result.sar[i]);
    } else if (*ex) {
      (void)seed_set;
      config.methods.clear();
      for (const auto& m : split_csv(ex_methods))
        config.methods.push_back(model_kind_from_string(m));
      config.ranks.clear();
      for (const auto& r : split_csv(ex_ranks)) config.ranks.push_back(std::stoul(r));
      const ExperimentOutput out = run_experiment(config);
      std::cout << out.summary.dump(2) << "\n";
    } else if (*toy_cmd) {
      const ToyNotes toy = generate_toy_notes(toy_seed);
      write_wav(toy_out, toy.wave);
      std::cout << toy_out << "\n";
    } else if (*mc) {
      make_synthetic_corpus(mc_out, mc_seed, mc_speakers, mc_clips, mc_rate, mc_seconds);
      std::cout << mc_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
