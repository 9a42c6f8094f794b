// detector.cpp

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

#include "a2pit/detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "a2pit/rng.hpp"

namespace a2pit {

namespace {

constexpr std::array<ThresholdPreset, 4> kPresets{{
    {"clean", 20.0},
    {"noisy-23", 12.0},
    {"noisy-234", 12.0},
    {"noisy-1234", 8.0},
}};

constexpr std::uint64_t kFieldSelect = 32;

void check_outputs(const std::vector<Waveform>& outputs, const Waveform& mixture) {
  if (outputs.empty()) throw DimensionError("no outputs");
  if (mixture.size() == 0) throw DimensionError("empty mixture");
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].size() != mixture.size()) {
      throw DimensionError("output " + std::to_string(i) + " length differs from mixture");
    }
  }
}

}  // namespace

void DetectionConfig::validate() const {
  if (frame_hop < 1) throw ParameterError("frame_hop must be >= 1");
  if (mode == DetectionMode::kAutoencoding && std::isnan(threshold_db)) {
    throw ParameterError("threshold must not be NaN");
  }
  if (mode == DetectionMode::kEnergyBaseline && std::isnan(energy_threshold_db)) {
    throw ParameterError("energy threshold must not be NaN");
  }
}

std::span<const ThresholdPreset> threshold_presets() { return kPresets; }

std::optional<double> preset_threshold(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p.threshold_db;
  }
  return std::nullopt;
}

std::vector<int> DetectionResult::valid_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < valid_mask.size(); ++i) {
    if (valid_mask[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

DetectionResult detect(const std::vector<Waveform>& outputs, const Waveform& mixture,
                       const DetectionConfig& config) {
  config.validate();
  check_outputs(outputs, mixture);
  DetectionResult r;
  for (const auto& out : outputs) {
    double score;
    bool valid;
    if (config.mode == DetectionMode::kAutoencoding) {
      score = sisdr(mixture, out);
      valid = score <= config.threshold_db;
    } else {
      score = 10.0 * std::log10(std::max(mean_power(out.samples), 1e-30));
      valid = score >= config.energy_threshold_db;
    }
    r.scores_db.push_back(score);
    r.valid_mask.push_back(valid);
    r.predicted_count += valid ? 1 : 0;
  }
  return r;
}

int count_speakers(const std::vector<Waveform>& outputs, const Waveform& mixture,
                   const DetectionConfig& config) {
  return detect(outputs, mixture, config).predicted_count;
}

std::vector<int> select_outputs(const DetectionResult& result, int required_m, std::uint64_t seed) {
  const auto n = static_cast<int>(result.valid_mask.size());
  if (required_m < 0) throw ParameterError("required_m must be >= 0");
  if (required_m > n) {
    throw CapacityError("cannot select " + std::to_string(required_m) + " of " +
                        std::to_string(n) + " outputs");
  }
  std::vector<int> valid;
  std::vector<int> invalid;
  for (int i = 0; i < n; ++i) (result.valid_mask[static_cast<std::size_t>(i)] ? valid : invalid).push_back(i);

  CounterRng rng(seed, 0, kFieldSelect);
  // First `take` entries of a partial Fisher-Yates shuffle.
  auto draw = [&rng](std::vector<int> pool, std::size_t take) {
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    }
    pool.resize(take);
    return pool;
  };

  const auto m = static_cast<std::size_t>(required_m);
  std::vector<int> chosen;
  if (valid.size() < m) {
    chosen = valid;
    const auto extra = draw(invalid, m - valid.size());
    chosen.insert(chosen.end(), extra.begin(), extra.end());
  } else if (valid.size() > m) {
    chosen = draw(valid, m);
  } else {
    chosen = valid;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::vector<double>> frame_scores(const std::vector<Waveform>& outputs,
                                              const Waveform& mixture,
                                              const DetectionConfig& config) {
  config.validate();
  check_outputs(outputs, mixture);
  const Eigen::Index len = mixture.size();
  const Eigen::Index hop = config.frame_hop;
  std::vector<std::vector<double>> all;
  all.reserve(outputs.size());
  for (const auto& out : outputs) {
    CumulativeSimilarity acc;
    std::vector<double> series;
    series.reserve(static_cast<std::size_t>((len + hop - 1) / hop));
    for (Eigen::Index i = 0; i < len; ++i) {
      acc.push(mixture.samples(i), out.samples(i));
      if ((i + 1) % hop == 0 || i + 1 == len) series.push_back(acc.sisdr());
    }
    all.push_back(std::move(series));
  }
  return all;
}

nlohmann::ordered_json detection_to_json(const DetectionResult& result,
                                         const DetectionConfig& config,
                                         const std::vector<std::vector<double>>* frames) {
  nlohmann::ordered_json j;
  if (config.mode == DetectionMode::kAutoencoding) {
    j["mode"] = "autoencoding";
    j["threshold_db"] = config.threshold_db;
  } else {
    j["mode"] = "energy_baseline";
    j["threshold_db"] = config.energy_threshold_db;
  }
  j["scores_db"] = result.scores_db;
  j["valid"] = result.valid_mask;
  j["predicted_count"] = result.predicted_count;
  if (frames != nullptr) {
    j["frame_hop"] = config.frame_hop;
    j["frame_scores"] = *frames;
  }
  return j;
}

}  // namespace a2pit
