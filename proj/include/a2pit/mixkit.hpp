// a2pit/mixkit.hpp

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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "a2pit/signal.hpp"
#include "a2pit/wav.hpp"

namespace a2pit {

struct DbRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Recipe for simulated mixtures: 1-4 speakers at random energies, shifted
/// by a random overlap ratio, optionally over a repeated noise clip.
struct SynthesisConfig {
  double utterance_seconds = 6.0;
  int sample_rate = 16000;
  std::vector<int> speaker_counts{1, 2, 3, 4};
  DbRange speech_db{-2.5, 2.5};
  DbRange noise_db{-20.0, -10.0};
  DbRange overlap{0.0, 1.0};
  bool noisy = false;
  std::uint64_t seed = 0;

  Eigen::Index total_samples() const;
  void validate() const;
};

/// Every random decision for one utterance.
struct SynthesisParams {
  int m = 0;
  double overlap_ratio = 0.0;
  std::vector<double> gains_db;
  std::optional<double> noise_db;
  std::vector<std::size_t> source_picks;
  std::optional<std::size_t> noise_pick;
};

/// A synthesized mixture with its ground truth. `sources` are post-gain,
/// post-shift and padded to the utterance length; source k is non-zero only
/// on [offsets[k], offsets[k] + active_lengths[k]).
struct UtteranceRecord {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  Waveform mixture;
  std::vector<Waveform> sources;
  std::optional<Waveform> noise;
  int m = 0;
  double overlap_ratio = 0.0;
  std::vector<double> gains_db;
  std::optional<double> noise_db;
  std::vector<Eigen::Index> offsets;
  std::vector<Eigen::Index> active_lengths;
  std::vector<std::size_t> source_picks;
  std::optional<std::size_t> noise_pick;

  bool noisy() const { return noise.has_value(); }
};

struct AudioPool {
  std::vector<Waveform> clips;
  std::vector<std::string> names;

  std::size_t size() const { return clips.size(); }
  bool empty() const { return clips.empty(); }
};

/// All *.wav files under `dir` (non-recursive), sorted by filename.
AudioPool load_pool(const std::filesystem::path& dir);

/// Harmonic multi-tone clips with a syllable-rate envelope, 0.6x to 1.3x
/// the requested duration.
AudioPool synthetic_speech_pool(std::size_t count, int sample_rate, double seconds,
                                std::uint64_t seed);

/// Low-pass filtered noise with random bursts, 0.3x to 0.9x the requested
/// duration so that repetition is exercised.
AudioPool synthetic_noise_pool(std::size_t count, int sample_rate, double seconds,
                               std::uint64_t seed);

/// Deterministic in (config.seed, index). Speaker counts are balanced: each
/// consecutive block of |speaker_counts| indices holds a seeded permutation
/// of the allowed counts.
SynthesisParams sample_params(const SynthesisConfig& config, std::uint64_t index,
                            std::size_t source_pool_size, std::size_t noise_pool_size);

/// Chain placement: source k starts at round(k (1 - ratio) total_len / m).
std::vector<Eigen::Index> overlap_offsets(int m, double overlap_ratio, Eigen::Index total_len);

std::vector<Waveform> place_with_overlap(const std::vector<Waveform>& sources,
                                         double overlap_ratio, Eigen::Index total_len);

/// Repeats `clip` end to end and truncates to `length` samples.
Waveform tile_to_length(const Waveform& clip, Eigen::Index length);

UtteranceRecord synth_utterance(const SynthesisConfig& config, std::uint64_t index,
                                const AudioPool& source_pool, const AudioPool& noise_pool);

/// One manifest line: the record metadata plus paths relative to the
/// dataset directory.
struct ManifestEntry {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  int m = 0;
  int sample_rate = 0;
  Eigen::Index num_samples = 0;
  double overlap_ratio = 0.0;
  std::vector<double> gains_db;
  std::optional<double> noise_db;
  std::vector<Eigen::Index> offsets;
  std::vector<Eigen::Index> active_lengths;
  std::vector<std::size_t> source_picks;
  std::optional<std::size_t> noise_pick;
  std::string mix_path;
  std::vector<std::string> source_paths;
  std::optional<std::string> noise_path;

  bool noisy() const { return noise_path.has_value(); }
};

/// utt{index:06}_{role}{k}.wav
std::string utterance_filename(std::uint64_t index, std::string_view role, int k);

ManifestEntry make_manifest_entry(const UtteranceRecord& record);
std::string to_manifest_line(const ManifestEntry& entry);
ManifestEntry parse_manifest_line(const std::string& line);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Rebuilds a record from a manifest entry by reading its audio files.
UtteranceRecord load_record(const ManifestEntry& entry, const std::filesystem::path& dataset_dir);

inline constexpr std::string_view kManifestName = "manifest.jsonl";

/// Synthesizes `count` utterances into `out_dir` and writes the manifest.
/// Float32 is the default encoding: unit-power speech peaks above full
/// scale, so PCM16 output clips.
std::vector<ManifestEntry> write_dataset(const SynthesisConfig& config, std::uint64_t count,
                                         const AudioPool& source_pool,
                                         const AudioPool& noise_pool,
                                         const std::filesystem::path& out_dir,
                                         WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace a2pit
