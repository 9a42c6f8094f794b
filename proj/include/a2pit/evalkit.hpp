// a2pit/evalkit.hpp

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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "a2pit/detector.hpp"
#include "a2pit/mixkit.hpp"
#include "a2pit/signal.hpp"

namespace a2pit {

enum class SelectionMode { kOracle, kPredicted };

std::string_view to_string(SelectionMode mode);
SelectionMode parse_selection_mode(std::string_view name);

/// SI-SDR improvement of `est` over the unprocessed mixture, both against
/// `target`.
double sisdri(const Waveform& est, const Waveform& target, const Waveform& mixture);

struct UtteranceEval {
  int m = 0;
  SelectionMode mode = SelectionMode::kOracle;
  // True for clean single-speaker utterances, where raw SI-SDR is reported
  // because the mixture already equals the target.
  bool raw_sisdr = false;
  std::vector<double> per_source_db;  // indexed by source
  std::vector<int> output_for_source;
  int predicted_count = 0;

  std::string_view metric() const { return raw_sisdr ? "si_sdr" : "si_sdri"; }
};

/// Oracle mode picks the M outputs and their pairing with the sources that
/// maximize total SI-SDR. Predicted mode detects, applies the fault-tolerant
/// selection, then pairs the chosen outputs with the sources by PIT.
UtteranceEval eval_utterance(const std::vector<Waveform>& outputs, const UtteranceRecord& record,
                             const DetectionConfig& detection, SelectionMode mode,
                             std::uint64_t seed);

/// Predicted count (rows, 0 allowed) by oracle count (columns).
class ConfusionMatrix {
 public:
  void add(int predicted, int oracle);
  int count(int predicted, int oracle) const;
  int oracle_total(int oracle) const;
  int total() const;
  // Fraction of utterances on the diagonal.
  double accuracy() const;

  // Oracle columns 1..max(4, largest oracle seen).
  std::vector<int> oracle_domain() const;
  // Predicted rows 0..max(largest column, largest prediction seen).
  std::vector<int> predicted_domain() const;

  // Header "predicted,oracle_1,...", one row per predicted count.
  std::string to_csv() const;

 private:
  std::map<std::pair<int, int>, int> counts_;
};

/// Counts speakers for every record; `outputs` is keyed by utterance index.
ConfusionMatrix confusion(std::span<const UtteranceRecord> records,
                          const std::map<std::uint64_t, std::vector<Waveform>>& outputs,
                          const DetectionConfig& detection);

struct SeparationRow {
  int m = 0;
  SelectionMode mode = SelectionMode::kOracle;
  std::string metric;
  double mean_db = 0.0;  // mean over sources
  long num_sources = 0;
};

/// Per-(M, selection mode) mean scores.
class SeparationReport {
 public:
  void add(const UtteranceEval& eval);
  std::vector<SeparationRow> rows() const;
  // Header "m,selection_mode,metric,mean_db_per_source,num_sources".
  std::string to_csv() const;

 private:
  struct Acc {
    double sum = 0.0;
    long n = 0;
  };
  std::map<std::tuple<int, int, std::string>, Acc> acc_;
};

/// Fixed-width bins [lo + k w, lo + (k + 1) w); scores outside [lo, hi] are
/// clamped into the first or last bin.
struct Histogram {
  double lo = 0.0;
  double bin_width = 1.0;
  std::vector<long> counts;

  double bin_lo(std::size_t k) const { return lo + static_cast<double>(k) * bin_width; }
  double bin_hi(std::size_t k) const { return lo + static_cast<double>(k + 1) * bin_width; }
  long total() const;
  // Header "bin_lo,bin_hi,count".
  std::string to_csv() const;
};

inline constexpr double kHistogramLo = -40.0;

Histogram histogram(std::span<const double> scores, double bin_width, double lo = kHistogramLo,
                    double hi = kSisdrCap);

}  // namespace a2pit
