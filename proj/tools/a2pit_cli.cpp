// tools/a2pit_cli.cpp

// Copyright 2026  The a2pit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "a2pit/detector.hpp"
#include "a2pit/evalkit.hpp"
#include "a2pit/mixkit.hpp"
#include "a2pit/rng.hpp"
#include "a2pit/toytrain.hpp"
#include "a2pit/wav.hpp"

namespace fs = std::filesystem;
using namespace a2pit;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

constexpr std::uint64_t kFieldEvalSelect = 64;

struct UsageError : Error {
  using Error::Error;
};

struct SynthOpts {
  std::uint64_t count = 10;
  std::vector<int> speakers{1, 2, 3, 4};
  bool noisy = false;
  bool pcm16 = false;
  std::uint64_t seed = 0;
  double seconds = 6.0;
  int sample_rate = 16000;
  std::string out;
  std::string source_dir;
  std::string noise_dir;
  std::size_t pool_size = 32;
};

struct DetectOpts {
  std::string est_dir;
  std::string mix_dir;
  std::optional<double> threshold;
  std::string preset;
  std::optional<Eigen::Index> hop;
  bool energy = false;
  double energy_threshold = -40.0;
  std::string out;
};

struct EvalOpts {
  std::string est_dir;
  std::string manifest;
  std::string selection = "both";
  std::optional<double> threshold;
  std::string preset;
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct HistOpts {
  std::string est_dir;
  std::string manifest;
  double bin = 1.0;
  double lo = kHistogramLo;
  std::string out = "hist.csv";
};

struct TrainOpts {
  int steps = 4000;
  double lr = 2e-2;
  std::string schedule = "cosine";
  int n_outputs = 3;
  std::uint64_t seed = 0;
  std::size_t train_size = 64;
  int batch = 4;
  std::string out = ".";
};

// utt{index:06}
std::string utterance_stem(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "utt%06llu", static_cast<unsigned long long>(index));
  return buf;
}

// {stem}_est0.wav, {stem}_est1.wav, ... up to the first missing file.
std::vector<Waveform> load_estimates(const fs::path& dir, const std::string& stem) {
  std::vector<Waveform> outs;
  for (int k = 0;; ++k) {
    const fs::path p = dir / (stem + "_est" + std::to_string(k) + ".wav");
    if (!fs::exists(p)) break;
    outs.push_back(read_wav(p));
  }
  if (outs.empty()) throw DataError("no estimates for " + stem + " in " + dir.string());
  return outs;
}

DetectionConfig detection_config(const std::optional<double>& threshold, const std::string& preset) {
  DetectionConfig cfg;
  if (!preset.empty()) {
    const auto t = preset_threshold(preset);
    if (!t) throw UsageError("unknown preset '" + preset + "'");
    cfg.threshold_db = *t;
  }
  if (threshold) cfg.threshold_db = *threshold;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void require_dir(const std::string& dir, const char* flag) {
  if (!fs::is_directory(dir)) throw IoError(std::string(flag) + ": not a directory: " + dir);
}

int run_synth(const SynthOpts& o) {
  SynthesisConfig cfg;
  cfg.utterance_seconds = o.seconds;
  cfg.sample_rate = o.sample_rate;
  cfg.speaker_counts = o.speakers;
  cfg.noisy = o.noisy;
  cfg.seed = o.seed;
  for (int m : o.speakers) {
    if (m < 1 || m > 4) throw UsageError("--speakers: counts must lie in 1..4, got " + std::to_string(m));
  }
  cfg.validate();
  if (!o.noise_dir.empty() && !o.noisy) throw UsageError("--noise-dir requires --noisy");

  const AudioPool sources = o.source_dir.empty()
                                ? synthetic_speech_pool(o.pool_size, o.sample_rate, o.seconds, o.seed)
                                : load_pool(o.source_dir);
  AudioPool noise;
  if (o.noisy) {
    noise = o.noise_dir.empty() ? synthetic_noise_pool(o.pool_size, o.sample_rate, o.seconds, o.seed)
                                : load_pool(o.noise_dir);
  }
  const auto entries = write_dataset(cfg, o.count, sources, noise, o.out,
                                     o.pcm16 ? WavEncoding::kPcm16 : WavEncoding::kFloat32);
  std::cerr << "wrote " << entries.size() << " utterances to " << o.out << '\n';
  return 0;
}

int run_detect(const DetectOpts& o) {
  DetectionConfig cfg = detection_config(o.threshold, o.preset);
  if (o.energy) {
    cfg.mode = DetectionMode::kEnergyBaseline;
    cfg.energy_threshold_db = o.energy_threshold;
  }
  if (o.hop) cfg.frame_hop = *o.hop;
  cfg.validate();
  require_dir(o.est_dir, "--est-dir");
  require_dir(o.mix_dir, "--mix-dir");

  std::vector<fs::path> mixes;
  for (const auto& e : fs::directory_iterator(o.mix_dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 9 && name.ends_with("_mix0.wav")) mixes.push_back(e.path());
  }
  std::sort(mixes.begin(), mixes.end());
  if (mixes.empty()) throw DataError("no *_mix0.wav files in " + o.mix_dir);

  nlohmann::ordered_json report;
  report["utterances"] = nlohmann::ordered_json::array();
  for (const auto& mp : mixes) {
    const std::string name = mp.filename().string();
    const std::string stem = name.substr(0, name.size() - 9);
    const Waveform mixture = read_wav(mp);
    const auto outs = load_estimates(o.est_dir, stem);
    const auto result = detect(outs, mixture, cfg);
    std::vector<std::vector<double>> frames;
    if (o.hop) frames = frame_scores(outs, mixture, cfg);
    nlohmann::ordered_json u = nlohmann::ordered_json::object({{"utterance", stem}});
    u.update(detection_to_json(result, cfg, o.hop ? &frames : nullptr));
    report["utterances"].push_back(std::move(u));
  }
  const std::string text = report.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return 0;
}

int run_eval(const EvalOpts& o) {
  std::vector<SelectionMode> modes;
  if (o.selection == "both") {
    modes = {SelectionMode::kOracle, SelectionMode::kPredicted};
  } else {
    try {
      modes = {parse_selection_mode(o.selection)};
    } catch (const ParameterError& e) {
      throw UsageError(std::string("--selection: ") + e.what());
    }
  }
  const DetectionConfig det = detection_config(o.threshold, o.preset);
  det.validate();
  require_dir(o.est_dir, "--est-dir");

  const fs::path manifest(o.manifest);
  const auto entries = read_manifest(manifest);
  const fs::path dataset_dir = manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");

  ConfusionMatrix cm;
  SeparationReport rep;
  for (const auto& e : entries) {
    const UtteranceRecord rec = load_record(e, dataset_dir);
    const auto outs = load_estimates(o.est_dir, utterance_stem(e.index));
    const std::uint64_t seed = CounterRng(o.seed, e.index, kFieldEvalSelect).next_u64();
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const auto ev = eval_utterance(outs, rec, det, modes[i], seed);
      if (i == 0) cm.add(ev.predicted_count, ev.m);
      rep.add(ev);
    }
  }

  ensure_dir(o.out);
  write_text(fs::path(o.out) / "confusion.csv", cm.to_csv());
  write_text(fs::path(o.out) / "separation.csv", rep.to_csv());
  nlohmann::ordered_json sidecar;
  sidecar["manifest"] = o.manifest;
  sidecar["est_dir"] = o.est_dir;
  sidecar["selection"] = o.selection;
  sidecar["preset"] = o.preset.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(o.preset);
  sidecar["threshold_db"] = det.threshold_db;
  sidecar["seed"] = o.seed;
  sidecar["utterances"] = entries.size();
  sidecar["separation_mean"] = "per_source";
  sidecar["clean_single_speaker_metric"] = "si_sdr";
  write_text(fs::path(o.out) / "config.json", sidecar.dump(2) + "\n");
  std::cerr << "evaluated " << entries.size() << " utterances, counting accuracy "
            << cm.accuracy() << '\n';
  return 0;
}

int run_hist(const HistOpts& o) {
  if (!(o.bin > 0.0)) throw UsageError("--bin must be positive");
  if (!(o.lo < kSisdrCap)) throw UsageError("--lo must lie below the score cap");
  require_dir(o.est_dir, "--est-dir");
  const fs::path manifest(o.manifest);
  const auto entries = read_manifest(manifest);
  const fs::path dataset_dir = manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
  std::vector<double> scores;
  for (const auto& e : entries) {
    const Waveform mixture = read_wav(dataset_dir / e.mix_path);
    for (const auto& est : load_estimates(o.est_dir, utterance_stem(e.index))) {
      scores.push_back(sisdr(mixture, est));
    }
  }
  write_text(o.out, histogram(scores, o.bin, o.lo).to_csv());
  return 0;
}

int run_train(const TrainOpts& o) {
  TrainConfig cfg;
  cfg.steps = o.steps;
  cfg.learning_rate = o.lr;
  cfg.schedule = parse_lr_schedule(o.schedule);
  cfg.seed = o.seed;
  cfg.batch = o.batch;
  cfg.validate();
  if (o.n_outputs < 2) throw UsageError("--n-outputs must be >= 2 for two-source mixtures");
  if (o.train_size < 1) throw UsageError("--train-size must be >= 1");
  ensure_dir(o.out);
  const auto data = toy_dataset(o.train_size, o.seed);
  const auto result = train(ToyModel::near_identity(o.n_outputs, kToyFrame, o.seed), data, cfg);
  write_weights(fs::path(o.out) / "weights.bin", result.model);
  write_text(fs::path(o.out) / "loss_curve.csv", loss_curve_csv(result.curve));
  if (!result.curve.empty()) std::cerr << "final loss " << result.curve.back().l_obj << '\n';
  return 0;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const ConfigError*>(&e)) {
    return kExitUsage;
  }
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"A2PIT separation toolkit: synthesis, detection, evaluation and toy training"};
  app.set_config("--config", "", "Read flags from a TOML/INI file");
  app.require_subcommand(1);

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "Synthesize a mixture dataset");
  synth->add_option("--count", so.count, "Number of utterances")->capture_default_str();
  synth->add_option("--speakers", so.speakers, "Allowed speaker counts")->delimiter(',')->capture_default_str();
  synth->add_flag("--noisy", so.noisy, "Add background noise");
  synth->add_flag("--pcm16", so.pcm16, "Write 16-bit PCM instead of float32 (clips loud mixtures)");
  synth->add_option("--seed", so.seed)->capture_default_str();
  synth->add_option("--seconds", so.seconds, "Utterance length")->capture_default_str();
  synth->add_option("--sample-rate", so.sample_rate)->capture_default_str();
  synth->add_option("--source-dir", so.source_dir, "Directory of source WAVs (default: synthetic pool)");
  synth->add_option("--noise-dir", so.noise_dir, "Directory of noise WAVs (default: synthetic pool)");
  synth->add_option("--pool-size", so.pool_size, "Synthetic pool size")->capture_default_str();
  synth->add_option("--out", so.out, "Output directory")->required();

  DetectOpts dopt;
  auto* det = app.add_subcommand("detect", "Detect invalid outputs and count speakers");
  det->add_option("--est-dir", dopt.est_dir)->required();
  det->add_option("--mix-dir", dopt.mix_dir)->required();
  det->add_option("--threshold", dopt.threshold, "Threshold in dB (overrides --preset)");
  det->add_option("--preset", dopt.preset, "clean | noisy-23 | noisy-234 | noisy-1234");
  det->add_option("--hop", dopt.hop, "Emit cumulative frame scores with this hop");
  det->add_flag("--energy-baseline", dopt.energy, "Use the energy threshold instead");
  det->add_option("--energy-threshold", dopt.energy_threshold)->capture_default_str();
  det->add_option("--out", dopt.out, "JSON report path (default: stdout)");

  EvalOpts eo;
  auto* ev = app.add_subcommand("eval", "Score estimates against a dataset");
  ev->add_option("--est-dir", eo.est_dir)->required();
  ev->add_option("--manifest", eo.manifest)->required();
  ev->add_option("--selection", eo.selection, "oracle | predicted | both")->capture_default_str();
  ev->add_option("--threshold", eo.threshold, "Threshold in dB (overrides --preset)");
  ev->add_option("--preset", eo.preset);
  ev->add_option("--seed", eo.seed)->capture_default_str();
  ev->add_option("--out", eo.out, "Report directory")->capture_default_str();

  HistOpts ho;
  auto* hist = app.add_subcommand("hist", "Histogram of autoencoding scores");
  hist->add_option("--est-dir", ho.est_dir)->required();
  hist->add_option("--manifest", ho.manifest)->required();
  hist->add_option("--bin", ho.bin, "Bin width in dB")->capture_default_str();
  hist->add_option("--lo", ho.lo, "Lower edge in dB")->capture_default_str();
  hist->add_option("--out", ho.out)->capture_default_str();

  TrainOpts to;
  auto* tr = app.add_subcommand("train-toy", "Train the toy separator");
  tr->add_option("--steps", to.steps)->capture_default_str();
  tr->add_option("--lr", to.lr, "Peak learning rate")->capture_default_str();
  tr->add_option("--schedule", to.schedule, "cosine or constant")->capture_default_str();
  tr->add_option("--n-outputs", to.n_outputs)->capture_default_str();
  tr->add_option("--seed", to.seed)->capture_default_str();
  tr->add_option("--train-size", to.train_size)->capture_default_str();
  tr->add_option("--batch", to.batch)->capture_default_str();
  tr->add_option("--out", to.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return run_synth(so);
    if (det->parsed()) return run_detect(dopt);
    if (ev->parsed()) return run_eval(eo);
    if (hist->parsed()) return run_hist(ho);
    if (tr->parsed()) return run_train(to);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
