// a2pit/toytrain.hpp

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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "a2pit/mixkit.hpp"
#include "a2pit/pit.hpp"

namespace a2pit {

/// Linear separator. The mixture is cut into non-overlapping frames of
/// `frame` samples; output n of frame t is weights.middleRows(n * frame,
/// frame) times input frame t.
struct ToyModel {
  Eigen::MatrixXd weights;  // (n_outputs * frame) x frame
  int n_outputs = 0;
  Eigen::Index frame = 0;
  std::uint64_t seed = 0;

  /// Gaussian weights with standard deviation `scale / sqrt(frame)`.
  static ToyModel random(int n_outputs, Eigen::Index frame, std::uint64_t seed,
                         double scale = 1.0);
  /// Every output starts as a copy of the input plus Gaussian weights of
  /// standard deviation `noise / sqrt(frame)`; the noise breaks the
  /// symmetry between outputs.
  static ToyModel near_identity(int n_outputs, Eigen::Index frame, std::uint64_t seed,
                                double noise = 0.1);
  static ToyModel zeros(int n_outputs, Eigen::Index frame);
};

std::vector<Waveform> forward(const ToyModel& model, const Waveform& mixture);

enum class LrSchedule { kConstant, kCosine };

std::string_view to_string(LrSchedule schedule);
LrSchedule parse_lr_schedule(std::string_view name);

struct TrainConfig {
  int steps = 4000;
  // Peak rate. The loss sharpens as the error shrinks, so a constant rate
  // stalls at an error floor proportional to it; cosine decay to zero
  // avoids the floor.
  double learning_rate = 2e-2;
  LrSchedule schedule = LrSchedule::kCosine;
  double alpha_ae = 0.3;
  double alpha_sep = 0.0;
  double single_speaker_alpha = 0.3;
  Reduction reduction = Reduction::kMean;
  int batch = 4;
  std::uint64_t seed = 0;

  void validate() const;
  A2PITConfig objective(int n_outputs) const;
  // learning_rate * (1 + cos(pi step / steps)) / 2 for the cosine schedule.
  double rate_at(int step) const;
};

struct LossPoint {
  int step = 0;
  double l_obj = 0.0;
  double l_sep = 0.0;
  double l_ae = 0.0;
};

struct LossAndGradient {
  LossPoint loss;              // batch means
  Eigen::MatrixXd weight_grad;  // d mean(L_obj) / d weights
};

LossAndGradient loss_and_gradient(const ToyModel& model, std::span<const UtteranceRecord> batch,
                                  const TrainConfig& config);

/// One plain gradient-descent update; returns the batch-mean loss measured
/// before the update.
LossPoint train_step(ToyModel& model, std::span<const UtteranceRecord> batch,
                     const TrainConfig& config);

struct TrainResult {
  ToyModel model;
  std::vector<LossPoint> curve;
};

/// Runs config.steps steps at config.rate_at(step), each on `batch` records
/// drawn (with replacement) from `dataset` by a generator keyed on
/// (seed, step).
TrainResult train(ToyModel model, std::span<const UtteranceRecord> dataset,
                  const TrainConfig& config);

/// Header "step,l_obj,l_sep,l_ae".
std::string loss_curve_csv(const std::vector<LossPoint>& curve);

/// One JSON header line (shape, frame, seed, dtype) followed by the weights
/// as little-endian float64 in row-major order.
void write_weights(const std::filesystem::path& path, const ToyModel& model);
ToyModel read_weights(const std::filesystem::path& path);

inline constexpr int kToySampleRate = 8000;
inline constexpr Eigen::Index kToyFrame = 32;

/// Built-in toy corpus: 1 s mixtures at 8 kHz. Source 0 is a multi-tone
/// from a low band of frame-periodic frequencies, source 1 from a disjoint
/// high band, so a per-frame linear projection separates them exactly.
/// With m = 1 a single source from either band is drawn.
std::vector<UtteranceRecord> toy_dataset(std::size_t count, std::uint64_t seed, int m = 2);

}  // namespace a2pit
