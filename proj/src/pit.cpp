// pit.cpp

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

#include "a2pit/pit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace a2pit {

void A2PITConfig::validate() const {
  if (n_outputs < 1) throw ParameterError("n_outputs must be >= 1");
  for (double a : {alpha_ae, alpha_sep, single_speaker_alpha}) detail::check_alpha(a);
}

int TargetSet::num_valid() const {
  return static_cast<int>(std::count(kinds.begin(), kinds.end(), TargetKind::kValidSource));
}

double PairwiseLossMatrix::column_weight(Eigen::Index j) const {
  if (reduction == Reduction::kSum) return 1.0;
  const auto n = std::count(kinds.begin(), kinds.end(), kinds[static_cast<std::size_t>(j)]);
  return 1.0 / static_cast<double>(n);
}

Eigen::MatrixXd PairwiseLossMatrix::weighted() const {
  Eigen::MatrixXd w = entries;
  for (Eigen::Index j = 0; j < w.cols(); ++j) w.col(j) *= column_weight(j);
  return w;
}

TargetSet build_targets(const std::vector<Waveform>& sources, const Waveform& mixture,
                        const A2PITConfig& config) {
  config.validate();
  const auto m = static_cast<int>(sources.size());
  if (m == 0) throw CapacityError("no valid targets");
  if (m > config.n_outputs) {
    throw CapacityError(std::to_string(m) + " sources exceed " +
                        std::to_string(config.n_outputs) + " outputs");
  }
  TargetSet t;
  t.signals.reserve(static_cast<std::size_t>(config.n_outputs));
  for (const auto& s : sources) {
    if (s.size() != mixture.size()) throw DimensionError("source and mixture lengths differ");
    t.signals.push_back(s);
    t.kinds.push_back(TargetKind::kValidSource);
  }
  for (int k = m; k < config.n_outputs; ++k) {
    t.signals.push_back(mixture);
    t.kinds.push_back(TargetKind::kAuxiliaryMixture);
  }
  return t;
}

PairwiseLossMatrix pairwise_matrix(const std::vector<Waveform>& outputs, const TargetSet& targets,
                                   const A2PITConfig& config) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(outputs.size());
  if (n == 0 || static_cast<std::size_t>(n) != targets.signals.size() ||
      targets.kinds.size() != targets.signals.size()) {
    throw DimensionError("output and target counts differ");
  }
  const bool single = targets.num_valid() == 1;
  PairwiseLossMatrix pm;
  pm.entries.resize(n, n);
  pm.kinds = targets.kinds;
  pm.reduction = config.reduction;
  pm.alphas.resize(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (targets.kinds[ju] == TargetKind::kAuxiliaryMixture) {
      pm.alphas[ju] = config.alpha_ae;
    } else {
      pm.alphas[ju] = single ? config.single_speaker_alpha : config.alpha_sep;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      pm.entries(i, j) = -alpha_sisdr(targets.signals[ju], outputs[static_cast<std::size_t>(i)],
                                      pm.alphas[ju]);
    }
  }
  return pm;
}

PairwiseLossMatrix make_loss_matrix(Eigen::MatrixXd entries, Reduction reduction) {
  if (entries.rows() != entries.cols()) throw DimensionError("loss matrix must be square");
  PairwiseLossMatrix pm;
  const auto n = static_cast<std::size_t>(entries.rows());
  pm.entries = std::move(entries);
  pm.kinds.assign(n, TargetKind::kValidSource);
  pm.alphas.assign(n, 0.0);
  pm.reduction = reduction;
  return pm;
}

namespace {

void check_matrix(const PairwiseLossMatrix& m) {
  if (m.entries.rows() != m.entries.cols() || m.entries.rows() == 0) {
    throw DimensionError("loss matrix must be square and non-empty");
  }
  if (m.kinds.size() != static_cast<std::size_t>(m.entries.cols())) {
    throw DimensionError("one kind tag per column required");
  }
  if (!m.entries.allFinite()) throw ValueError("loss matrix has non-finite entries");
}

// Row-order sum of the weighted costs of a permutation.
double permutation_cost(const Eigen::MatrixXd& w, const std::vector<int>& perm) {
  double acc = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) acc += w(static_cast<Eigen::Index>(i), perm[i]);
  return acc;
}

// Pairs rows with columns in ascending order inside every group of
// bitwise-identical columns. Cost is unchanged since the swapped entries
// are equal.
void canonicalize_duplicates(const Eigen::MatrixXd& w, std::vector<int>& perm) {
  const auto n = static_cast<int>(perm.size());
  std::vector<int> row_of(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) row_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int j = 0; j < n; ++j) {
    if (seen[static_cast<std::size_t>(j)]) continue;
    std::vector<int> cols{j};
    for (int k = j + 1; k < n; ++k) {
      if (!seen[static_cast<std::size_t>(k)] && w.col(k) == w.col(j)) cols.push_back(k);
    }
    for (int c : cols) seen[static_cast<std::size_t>(c)] = true;
    if (cols.size() < 2) continue;
    std::vector<int> rows;
    for (int c : cols) rows.push_back(row_of[static_cast<std::size_t>(c)]);
    std::sort(rows.begin(), rows.end());
    for (std::size_t k = 0; k < cols.size(); ++k) perm[static_cast<std::size_t>(rows[k])] = cols[k];
  }
}

}  // namespace

AssignmentResult evaluate_permutation(const PairwiseLossMatrix& matrix,
                                      std::vector<int> permutation) {
  const auto n = matrix.size();
  if (permutation.size() != static_cast<std::size_t>(n)) {
    throw DimensionError("permutation length differs from matrix size");
  }
  AssignmentResult r;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = permutation[static_cast<std::size_t>(i)];
    const double v = matrix.entries(i, j) * matrix.column_weight(j);
    if (matrix.kinds[static_cast<std::size_t>(j)] == TargetKind::kValidSource) {
      r.l_sep += v;
    } else {
      r.l_ae += v;
    }
  }
  r.total_loss = r.l_sep + r.l_ae;
  r.permutation = std::move(permutation);
  return r;
}

AssignmentResult assign_brute_force(const PairwiseLossMatrix& matrix) {
  check_matrix(matrix);
  const auto n = static_cast<int>(matrix.size());
  if (n > kBruteForceMaxSize) {
    throw SizeError("brute-force assignment limited to N <= " +
                    std::to_string(kBruteForceMaxSize) + "; use assign_hungarian");
  }
  const Eigen::MatrixXd w = matrix.weighted();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = permutation_cost(w, perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double c = permutation_cost(w, perm);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  }
  return evaluate_permutation(matrix, std::move(best));
}

AssignmentResult assign_hungarian(const PairwiseLossMatrix& matrix) {
  check_matrix(matrix);
  const Eigen::MatrixXd w = matrix.weighted();
  const auto n = static_cast<int>(w.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Potentials u (rows), v (columns); match[j] is the 1-based row on column j.
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (used[ju]) continue;
        const double cur = w(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[ju];
        if (cur < minv[ju]) {
          minv[ju] = cur;
          way[ju] = j0;
        }
        if (minv[ju] < delta) {
          delta = minv[ju];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (used[ju]) {
          u[static_cast<std::size_t>(match[ju])] += delta;
          v[ju] -= delta;
        } else {
          minv[ju] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) perm[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  canonicalize_duplicates(w, perm);
  return evaluate_permutation(matrix, std::move(perm));
}

namespace {

void check_outputs(const std::vector<Waveform>& outputs, const A2PITConfig& config) {
  if (static_cast<int>(outputs.size()) != config.n_outputs) {
    throw DimensionError("expected " + std::to_string(config.n_outputs) + " outputs, got " +
                         std::to_string(outputs.size()));
  }
}

}  // namespace

AssignmentResult a2pit_loss(const std::vector<Waveform>& outputs,
                            const std::vector<Waveform>& sources, const Waveform& mixture,
                            const A2PITConfig& config) {
  check_outputs(outputs, config);
  const TargetSet targets = build_targets(sources, mixture, config);
  return assign_hungarian(pairwise_matrix(outputs, targets, config));
}

A2PITGradient a2pit_loss_grad(const std::vector<Waveform>& outputs,
                              const std::vector<Waveform>& sources, const Waveform& mixture,
                              const A2PITConfig& config) {
  check_outputs(outputs, config);
  const TargetSet targets = build_targets(sources, mixture, config);
  const PairwiseLossMatrix pm = pairwise_matrix(outputs, targets, config);
  A2PITGradient g;
  g.assignment = assign_hungarian(pm);
  g.outputs.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const int j = g.assignment.permutation[i];
    const auto ju = static_cast<std::size_t>(j);
    g.outputs.push_back(-pm.column_weight(j) *
                        alpha_sisdr_grad(targets.signals[ju], outputs[i], pm.alphas[ju]));
  }
  return g;
}

}  // namespace a2pit
