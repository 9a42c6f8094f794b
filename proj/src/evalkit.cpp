// evalkit.cpp

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

#include "a2pit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "a2pit/pit.hpp"

namespace a2pit {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Minimizes sum(cost(i, perm[i])) with zero-cost padding columns when the
// matrix is wide in rows. Returns the column of each row.
std::vector<int> best_pairing(const Eigen::MatrixXd& cost) {
  const Eigen::Index n = cost.rows();
  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(n, n);
  square.leftCols(cost.cols()) = cost;
  const PairwiseLossMatrix pm = make_loss_matrix(square, Reduction::kSum);
  const AssignmentResult r = n <= kBruteForceMaxSize ? assign_brute_force(pm) : assign_hungarian(pm);
  return r.permutation;
}

}  // namespace

std::string_view to_string(SelectionMode mode) {
  return mode == SelectionMode::kOracle ? "oracle" : "predicted";
}

SelectionMode parse_selection_mode(std::string_view name) {
  if (name == "oracle") return SelectionMode::kOracle;
  if (name == "predicted") return SelectionMode::kPredicted;
  throw ParameterError("unknown selection mode '" + std::string(name) + "'");
}

double sisdri(const Waveform& est, const Waveform& target, const Waveform& mixture) {
  return sisdr(target, est) - sisdr(target, mixture);
}

UtteranceEval eval_utterance(const std::vector<Waveform>& outputs, const UtteranceRecord& record,
                             const DetectionConfig& detection, SelectionMode mode,
                             std::uint64_t seed) {
  const int m = record.m;
  const auto n = static_cast<int>(outputs.size());
  if (m < 1 || static_cast<std::size_t>(m) != record.sources.size()) {
    throw DataError("utterance " + std::to_string(record.index) + ": inconsistent source count");
  }
  if (n < m) {
    throw CapacityError("utterance " + std::to_string(record.index) + ": " + std::to_string(n) +
                        " outputs for " + std::to_string(m) + " sources");
  }

  UtteranceEval ev;
  ev.m = m;
  ev.mode = mode;
  ev.raw_sisdr = m == 1 && !record.noisy();
  const DetectionResult det = detect(outputs, record.mixture, detection);
  ev.predicted_count = det.predicted_count;

  std::vector<int> candidates;
  if (mode == SelectionMode::kOracle) {
    candidates.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) candidates[static_cast<std::size_t>(i)] = i;
  } else {
    candidates = select_outputs(det, m, seed);
  }

  Eigen::MatrixXd cost(static_cast<Eigen::Index>(candidates.size()), m);
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    for (int j = 0; j < m; ++j) {
      cost(static_cast<Eigen::Index>(r), j) =
          -sisdr(record.sources[static_cast<std::size_t>(j)],
                 outputs[static_cast<std::size_t>(candidates[r])]);
    }
  }
  const std::vector<int> column = best_pairing(cost);
  ev.output_for_source.assign(static_cast<std::size_t>(m), -1);
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    if (column[r] < m) ev.output_for_source[static_cast<std::size_t>(column[r])] = candidates[r];
  }

  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const Waveform& est = outputs[static_cast<std::size_t>(ev.output_for_source[ju])];
    ev.per_source_db.push_back(ev.raw_sisdr ? sisdr(record.sources[ju], est)
                                            : sisdri(est, record.sources[ju], record.mixture));
  }
  return ev;
}

void ConfusionMatrix::add(int predicted, int oracle) {
  if (predicted < 0 || oracle < 0) throw ParameterError("speaker counts must be >= 0");
  ++counts_[{predicted, oracle}];
}

int ConfusionMatrix::count(int predicted, int oracle) const {
  const auto it = counts_.find({predicted, oracle});
  return it == counts_.end() ? 0 : it->second;
}

int ConfusionMatrix::oracle_total(int oracle) const {
  int n = 0;
  for (const auto& [key, c] : counts_) {
    if (key.second == oracle) n += c;
  }
  return n;
}

int ConfusionMatrix::total() const {
  int n = 0;
  for (const auto& kv : counts_) n += kv.second;
  return n;
}

double ConfusionMatrix::accuracy() const {
  const int t = total();
  if (t == 0) return 0.0;
  int diag = 0;
  for (const auto& [key, c] : counts_) {
    if (key.first == key.second) diag += c;
  }
  return static_cast<double>(diag) / t;
}

std::vector<int> ConfusionMatrix::oracle_domain() const {
  int hi = 4;
  for (const auto& kv : counts_) hi = std::max(hi, kv.first.second);
  std::vector<int> d;
  for (int m = 1; m <= hi; ++m) d.push_back(m);
  return d;
}

std::vector<int> ConfusionMatrix::predicted_domain() const {
  int hi = oracle_domain().back();
  for (const auto& kv : counts_) hi = std::max(hi, kv.first.first);
  std::vector<int> d;
  for (int k = 0; k <= hi; ++k) d.push_back(k);
  return d;
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream out;
  const auto cols = oracle_domain();
  out << "predicted";
  for (int m : cols) out << ",oracle_" << m;
  out << '\n';
  for (int k : predicted_domain()) {
    out << k;
    for (int m : cols) out << ',' << count(k, m);
    out << '\n';
  }
  return out.str();
}

ConfusionMatrix confusion(std::span<const UtteranceRecord> records,
                          const std::map<std::uint64_t, std::vector<Waveform>>& outputs,
                          const DetectionConfig& detection) {
  ConfusionMatrix cm;
  for (const auto& r : records) {
    const auto it = outputs.find(r.index);
    if (it == outputs.end() || it->second.empty()) {
      throw DataError("no outputs for utterance " + std::to_string(r.index));
    }
    cm.add(count_speakers(it->second, r.mixture, detection), r.m);
  }
  return cm;
}

void SeparationReport::add(const UtteranceEval& eval) {
  auto& a = acc_[{eval.m, static_cast<int>(eval.mode), std::string(eval.metric())}];
  for (double v : eval.per_source_db) {
    a.sum += v;
    ++a.n;
  }
}

std::vector<SeparationRow> SeparationReport::rows() const {
  std::vector<SeparationRow> rows;
  for (const auto& [key, a] : acc_) {
    SeparationRow row;
    row.m = std::get<0>(key);
    row.mode = static_cast<SelectionMode>(std::get<1>(key));
    row.metric = std::get<2>(key);
    row.mean_db = a.n > 0 ? a.sum / static_cast<double>(a.n) : 0.0;
    row.num_sources = a.n;
    rows.push_back(row);
  }
  return rows;
}

std::string SeparationReport::to_csv() const {
  std::ostringstream out;
  out << "m,selection_mode,metric,mean_db_per_source,num_sources\n";
  for (const auto& r : rows()) {
    out << r.m << ',' << to_string(r.mode) << ',' << r.metric << ',' << fmt_double(r.mean_db)
        << ',' << r.num_sources << '\n';
  }
  return out.str();
}

long Histogram::total() const {
  long n = 0;
  for (long c : counts) n += c;
  return n;
}

std::string Histogram::to_csv() const {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out << fmt_double(bin_lo(k)) << ',' << fmt_double(bin_hi(k)) << ',' << counts[k] << '\n';
  }
  return out.str();
}

Histogram histogram(std::span<const double> scores, double bin_width, double lo, double hi) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ParameterError("bin width must be positive");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ParameterError("histogram range must satisfy lo < hi");
  }
  Histogram h;
  h.lo = lo;
  h.bin_width = bin_width;
  const auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width));
  h.counts.assign(std::max<std::size_t>(nbins, 1), 0);
  for (double s : scores) {
    if (std::isnan(s)) throw ValueError("NaN score");
    const double pos = std::floor((std::clamp(s, lo, hi) - lo) / bin_width);
    const auto k = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), h.counts.size() - 1);
    ++h.counts[k];
  }
  return h;
}

}  // namespace a2pit
