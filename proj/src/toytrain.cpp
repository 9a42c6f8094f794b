// toytrain.cpp

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

#include "a2pit/toytrain.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "a2pit/rng.hpp"

namespace a2pit {

namespace {

constexpr std::uint64_t kFieldInit = 48;
constexpr std::uint64_t kFieldBatch = 49;
constexpr std::uint64_t kFieldToySource = 50;
constexpr std::uint64_t kFieldToyGain = 51;
constexpr std::string_view kWeightsFormat = "a2pit-toy-weights";

using FrameMap = Eigen::Map<const Eigen::MatrixXd>;

FrameMap frames_of(const ToyModel& model, const Waveform& mixture) {
  if (model.frame < 1 || model.weights.rows() != model.n_outputs * model.frame ||
      model.weights.cols() != model.frame) {
    throw DimensionError("toy model weights have the wrong shape");
  }
  const Eigen::Index len = mixture.size();
  if (len == 0 || len % model.frame != 0) {
    throw DimensionError("mixture length " + std::to_string(len) +
                         " is not a multiple of the frame length " + std::to_string(model.frame));
  }
  return FrameMap(mixture.samples.data(), model.frame, len / model.frame);
}

// Multi-tone on bins of the frame DFT grid, so every analysis frame holds
// whole periods of each component.
Eigen::VectorXd band_tones(CounterRng& rng, std::span<const int> bins, Eigen::Index len) {
  std::vector<int> pool(bins.begin(), bins.end());
  for (std::size_t i = 0; i < 3; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(len);
  for (std::size_t t = 0; t < 3; ++t) {
    const double amp = rng.uniform(0.3, 1.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double w = 2.0 * std::numbers::pi * pool[t] / static_cast<double>(kToyFrame);
    for (Eigen::Index i = 0; i < len; ++i) x(i) += amp * std::sin(w * static_cast<double>(i) + phase);
  }
  return x;
}

}  // namespace

ToyModel ToyModel::random(int n_outputs, Eigen::Index frame, std::uint64_t seed, double scale) {
  ToyModel m = zeros(n_outputs, frame);
  m.seed = seed;
  CounterRng rng(seed, 0, kFieldInit);
  const double sd = scale / std::sqrt(static_cast<double>(frame));
  for (Eigen::Index i = 0; i < m.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.weights.cols(); ++j) m.weights(i, j) = sd * rng.normal();
  }
  return m;
}

ToyModel ToyModel::near_identity(int n_outputs, Eigen::Index frame, std::uint64_t seed,
                                 double noise) {
  ToyModel m = random(n_outputs, frame, seed, noise);
  for (int n = 0; n < n_outputs; ++n) {
    m.weights.middleRows(n * frame, frame).diagonal().array() += 1.0;
  }
  return m;
}

ToyModel ToyModel::zeros(int n_outputs, Eigen::Index frame) {
  if (n_outputs < 1 || frame < 1) throw ParameterError("toy model needs n_outputs, frame >= 1");
  ToyModel m;
  m.n_outputs = n_outputs;
  m.frame = frame;
  m.weights = Eigen::MatrixXd::Zero(n_outputs * frame, frame);
  return m;
}

std::vector<Waveform> forward(const ToyModel& model, const Waveform& mixture) {
  const FrameMap x = frames_of(model, mixture);
  const Eigen::MatrixXd y = model.weights * x;
  std::vector<Waveform> outs;
  outs.reserve(static_cast<std::size_t>(model.n_outputs));
  for (int n = 0; n < model.n_outputs; ++n) {
    const Eigen::MatrixXd block = y.middleRows(n * model.frame, model.frame);
    outs.emplace_back(Eigen::Map<const Eigen::VectorXd>(block.data(), mixture.size()),
                      mixture.sample_rate);
  }
  return outs;
}

void TrainConfig::validate() const {
  if (steps < 0) throw ParameterError("steps must be >= 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning rate must be finite and non-negative");
  }
  if (batch < 1) throw ParameterError("batch must be >= 1");
}

std::string_view to_string(LrSchedule schedule) {
  return schedule == LrSchedule::kCosine ? "cosine" : "constant";
}

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "cosine") return LrSchedule::kCosine;
  if (name == "constant") return LrSchedule::kConstant;
  throw ParameterError("unknown schedule '" + std::string(name) + "'");
}

double TrainConfig::rate_at(int step) const {
  if (schedule == LrSchedule::kConstant || steps == 0) return learning_rate;
  const double t = static_cast<double>(step) / static_cast<double>(steps);
  return learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

A2PITConfig TrainConfig::objective(int n_outputs) const {
  A2PITConfig c;
  c.n_outputs = n_outputs;
  c.alpha_ae = alpha_ae;
  c.alpha_sep = alpha_sep;
  c.single_speaker_alpha = single_speaker_alpha;
  c.reduction = reduction;
  c.validate();
  return c;
}

LossAndGradient loss_and_gradient(const ToyModel& model, std::span<const UtteranceRecord> batch,
                                  const TrainConfig& config) {
  if (batch.empty()) throw DimensionError("empty batch");
  const A2PITConfig objective = config.objective(model.n_outputs);
  LossAndGradient out;
  out.weight_grad = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  for (const auto& rec : batch) {
    const FrameMap x = frames_of(model, rec.mixture);
    const auto outputs = forward(model, rec.mixture);
    const A2PITGradient g = a2pit_loss_grad(outputs, rec.sources, rec.mixture, objective);
    for (int n = 0; n < model.n_outputs; ++n) {
      const auto& gn = g.outputs[static_cast<std::size_t>(n)];
      const Eigen::Map<const Eigen::MatrixXd> gframes(gn.data(), model.frame, x.cols());
      out.weight_grad.middleRows(n * model.frame, model.frame).noalias() += gframes * x.transpose();
    }
    out.loss.l_obj += g.assignment.total_loss;
    out.loss.l_sep += g.assignment.l_sep;
    out.loss.l_ae += g.assignment.l_ae;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.weight_grad *= inv;
  out.loss.l_obj *= inv;
  out.loss.l_sep *= inv;
  out.loss.l_ae *= inv;
  return out;
}

LossPoint train_step(ToyModel& model, std::span<const UtteranceRecord> batch,
                     const TrainConfig& config) {
  config.validate();
  LossAndGradient lg = loss_and_gradient(model, batch, config);
  model.weights.noalias() -= config.learning_rate * lg.weight_grad;
  return lg.loss;
}

TrainResult train(ToyModel model, std::span<const UtteranceRecord> dataset,
                  const TrainConfig& config) {
  config.validate();
  TrainResult result{std::move(model), {}};
  if (config.steps > 0 && dataset.empty()) throw DimensionError("empty training set");
  result.curve.reserve(static_cast<std::size_t>(config.steps));
  std::vector<UtteranceRecord> batch;
  TrainConfig step_config = config;
  for (int step = 0; step < config.steps; ++step) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(step), kFieldBatch);
    batch.clear();
    for (int b = 0; b < config.batch; ++b) batch.push_back(dataset[rng.below(dataset.size())]);
    step_config.learning_rate = config.rate_at(step);
    LossPoint p = train_step(result.model, batch, step_config);
    p.step = step;
    result.curve.push_back(p);
  }
  return result;
}

std::string loss_curve_csv(const std::vector<LossPoint>& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "step,l_obj,l_sep,l_ae\n";
  for (const auto& p : curve) out << p.step << ',' << p.l_obj << ',' << p.l_sep << ',' << p.l_ae << '\n';
  return out.str();
}

void write_weights(const std::filesystem::path& path, const ToyModel& model) {
  static_assert(std::endian::native == std::endian::little, "weights are stored little-endian");
  nlohmann::ordered_json header;
  header["format"] = kWeightsFormat;
  header["version"] = 1;
  header["rows"] = model.weights.rows();
  header["cols"] = model.weights.cols();
  header["n_outputs"] = model.n_outputs;
  header["frame"] = model.frame;
  header["hop"] = model.frame;
  header["seed"] = model.seed;
  header["dtype"] = "float64-le";
  header["order"] = "row-major";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << header.dump() << '\n';
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = model.weights;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

ToyModel read_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header in " + path.string());
  ToyModel m;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  try {
    const auto h = nlohmann::json::parse(line);
    if (h.at("format").get<std::string>() != kWeightsFormat) throw FormatError("not a weights file");
    rows = h.at("rows").get<Eigen::Index>();
    cols = h.at("cols").get<Eigen::Index>();
    m.n_outputs = h.at("n_outputs").get<int>();
    m.frame = h.at("frame").get<Eigen::Index>();
    m.seed = h.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad weights header in " + path.string() + ": " + e.what());
  }
  if (rows != m.n_outputs * m.frame || cols != m.frame || rows <= 0) {
    throw FormatError("inconsistent weight shape in " + path.string());
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(rm.size() * sizeof(double))) {
    throw FormatError("truncated weights in " + path.string());
  }
  m.weights = rm;
  return m;
}

std::vector<UtteranceRecord> toy_dataset(std::size_t count, std::uint64_t seed, int m) {
  if (m != 1 && m != 2) throw ParameterError("toy dataset supports m = 1 or 2");
  static constexpr std::array<int, 6> kLow{1, 2, 3, 4, 5, 6};
  static constexpr std::array<int, 7> kHigh{9, 10, 11, 12, 13, 14, 15};
  const Eigen::Index len = kToySampleRate;  // one second
  std::vector<UtteranceRecord> records;
  records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng src_rng(seed, i, kFieldToySource);
    CounterRng gain_rng(seed, i, kFieldToyGain);
    UtteranceRecord r;
    r.seed = seed;
    r.index = i;
    r.m = m;
    r.overlap_ratio = 1.0;
    std::vector<Waveform> segs;
    for (int k = 0; k < m; ++k) {
      const bool low = m == 2 ? k == 0 : src_rng.uniform() < 0.5;
      Waveform w{band_tones(src_rng, low ? std::span<const int>(kLow) : std::span<const int>(kHigh), len),
                 kToySampleRate};
      const double g = gain_rng.uniform(-2.5, 2.5);
      segs.push_back(rescale_to_energy(w, g));
      r.gains_db.push_back(g);
      r.offsets.push_back(0);
      r.active_lengths.push_back(len);
    }
    r.sources = place_with_overlap(segs, 1.0, len);
    r.mixture = mix(r.sources);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace a2pit
