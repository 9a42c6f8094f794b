// a2pit/pit.hpp

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

#include <vector>

#include <Eigen/Core>

#include "a2pit/signal.hpp"

namespace a2pit {

enum class Reduction { kMean, kSum };

enum class TargetKind { kValidSource, kAuxiliaryMixture };

/// Objective settings: N outputs, the skew applied to autoencoding targets
/// and to separation targets, and how each group of pair losses reduces.
struct A2PITConfig {
  int n_outputs = 2;
  double alpha_ae = 0.3;
  double alpha_sep = 0.0;
  // Used for the valid column instead of alpha_sep when there is one source.
  double single_speaker_alpha = 0.3;
  Reduction reduction = Reduction::kMean;

  void validate() const;
};

struct TargetSet {
  std::vector<Waveform> signals;
  std::vector<TargetKind> kinds;

  int num_valid() const;
};

/// entries(i, j) is the loss of output i against target j, i.e. the negated
/// skewed SI-SDR with the column's alpha.
struct PairwiseLossMatrix {
  Eigen::MatrixXd entries;
  std::vector<TargetKind> kinds;
  std::vector<double> alphas;
  Reduction reduction = Reduction::kMean;

  Eigen::Index size() const { return entries.rows(); }
  // Weight of column j in the total: 1/|group| under mean, 1 under sum.
  double column_weight(Eigen::Index j) const;
  Eigen::MatrixXd weighted() const;
};

struct AssignmentResult {
  std::vector<int> permutation;  // output index -> target index
  double total_loss = 0.0;
  double l_sep = 0.0;
  double l_ae = 0.0;
};

struct A2PITGradient {
  std::vector<Eigen::VectorXd> outputs;  // dL_obj / d output_i
  AssignmentResult assignment;
};

/// Sources first, then N - M copies of the mixture as autoencoding targets.
TargetSet build_targets(const std::vector<Waveform>& sources, const Waveform& mixture,
                        const A2PITConfig& config);

PairwiseLossMatrix pairwise_matrix(const std::vector<Waveform>& outputs, const TargetSet& targets,
                                   const A2PITConfig& config);

// Plain PairwiseLossMatrix from raw costs; every column is a valid source.
PairwiseLossMatrix make_loss_matrix(Eigen::MatrixXd entries, Reduction reduction = Reduction::kSum);

inline constexpr int kBruteForceMaxSize = 8;

/// Exhaustive search over all N! permutations in lexicographic order; the
/// first minimum wins. N must not exceed kBruteForceMaxSize.
AssignmentResult assign_brute_force(const PairwiseLossMatrix& matrix);

/// O(N^3) shortest augmenting path solver. Among columns that are exactly
/// equal (duplicate mixture targets), rows are paired in ascending order.
AssignmentResult assign_hungarian(const PairwiseLossMatrix& matrix);

/// Splits the loss of a fixed permutation into its separation and
/// autoencoding groups.
AssignmentResult evaluate_permutation(const PairwiseLossMatrix& matrix,
                                      std::vector<int> permutation);

AssignmentResult a2pit_loss(const std::vector<Waveform>& outputs,
                            const std::vector<Waveform>& sources, const Waveform& mixture,
                            const A2PITConfig& config);

/// Gradient of L_obj with the minimizing permutation held fixed.
A2PITGradient a2pit_loss_grad(const std::vector<Waveform>& outputs,
                              const std::vector<Waveform>& sources, const Waveform& mixture,
                              const A2PITConfig& config);

}  // namespace a2pit
