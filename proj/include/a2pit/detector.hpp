// a2pit/detector.hpp

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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "a2pit/signal.hpp"

namespace a2pit {

enum class DetectionMode { kAutoencoding, kEnergyBaseline };

struct DetectionConfig {
  // Outputs whose autoencoding SI-SDR exceeds this are invalid. A score
  // equal to the threshold is still valid.
  double threshold_db = 20.0;
  DetectionMode mode = DetectionMode::kAutoencoding;
  // Baseline only: outputs quieter than this are invalid.
  double energy_threshold_db = -40.0;
  Eigen::Index frame_hop = 160;

  void validate() const;
};

struct ThresholdPreset {
  std::string_view name;
  double threshold_db;
};

// clean = 20 dB; noisy-23 = 12; noisy-234 = 12; noisy-1234 = 8.
std::span<const ThresholdPreset> threshold_presets();
std::optional<double> preset_threshold(std::string_view name);

struct DetectionResult {
  std::vector<double> scores_db;
  std::vector<bool> valid_mask;
  int predicted_count = 0;

  std::vector<int> valid_indices() const;
};

/// Scores every output against the mixture and counts the valid ones.
DetectionResult detect(const std::vector<Waveform>& outputs, const Waveform& mixture,
                       const DetectionConfig& config);

int count_speakers(const std::vector<Waveform>& outputs, const Waveform& mixture,
                   const DetectionConfig& config);

/// Fault-tolerant choice of exactly `required_m` outputs, sorted ascending:
/// pads an undercount with random invalid outputs and subsamples an
/// overcount from the valid ones. Pure in (result, required_m, seed).
std::vector<int> select_outputs(const DetectionResult& result, int required_m, std::uint64_t seed);

/// Running a, b, c2 over a prefix of a (target, estimate) pair.
class CumulativeSimilarity {
 public:
  void push(double target, double estimate) {
    stats_.push(target, estimate);
    ++count_;
  }
  double sisdr() const { return sisdr_from_stats(stats_); }
  Eigen::Index count() const { return count_; }
  const SimilarityStats& stats() const { return stats_; }

 private:
  SimilarityStats stats_;
  Eigen::Index count_ = 0;
};

/// For each output, the SI-SDR against the mixture over [0, (t+1) hop),
/// one value per hop; the last prefix is the whole signal.
std::vector<std::vector<double>> frame_scores(const std::vector<Waveform>& outputs,
                                              const Waveform& mixture,
                                              const DetectionConfig& config);

/// {"mode", "threshold_db", "scores_db", "valid", "predicted_count"[, "frame_hop", "frame_scores"]}
nlohmann::ordered_json detection_to_json(const DetectionResult& result,
                                         const DetectionConfig& config,
                                         const std::vector<std::vector<double>>* frames = nullptr);

}  // namespace a2pit
