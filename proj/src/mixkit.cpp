// mixkit.cpp

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

#include "a2pit/mixkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include "json.hpp"

#include "a2pit/rng.hpp"
#include "a2pit/wav.hpp"

namespace a2pit {

namespace {

// Stream ids for CounterRng; each random decision has its own stream.
enum Field : std::uint64_t {
  kFieldSpeakerBlock = 1,
  kFieldOverlap = 2,
  kFieldGains = 3,
  kFieldSources = 4,
  kFieldNoise = 5,
  kFieldSpeechPool = 16,
  kFieldNoisePool = 17,
};

void check_range(const DbRange& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw ConfigError(std::string(name) + " range must be finite with lo <= hi");
  }
}

Eigen::Index clip_length(CounterRng& rng, int sample_rate, double seconds, double lo, double hi) {
  const double n = rng.uniform(lo, hi) * seconds * sample_rate;
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(n)));
}

}  // namespace

Eigen::Index SynthesisConfig::total_samples() const {
  return static_cast<Eigen::Index>(std::llround(utterance_seconds * sample_rate));
}

void SynthesisConfig::validate() const {
  if (!(utterance_seconds > 0.0) || !std::isfinite(utterance_seconds)) {
    throw ConfigError("utterance_seconds must be positive");
  }
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  if (total_samples() < 1) throw ConfigError("utterance shorter than one sample");
  if (speaker_counts.empty()) throw ConfigError("speaker_counts is empty");
  for (int m : speaker_counts) {
    if (m < 1) throw ConfigError("speaker counts must be >= 1");
  }
  check_range(speech_db, "speech_db");
  check_range(noise_db, "noise_db");
  check_range(overlap, "overlap");
  if (overlap.lo < 0.0 || overlap.hi > 1.0) throw ConfigError("overlap range must lie in [0, 1]");
}

AudioPool load_pool(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  AudioPool pool;
  for (const auto& f : files) {
    pool.clips.push_back(read_wav(f));
    pool.names.push_back(f.filename().string());
  }
  return pool;
}

AudioPool synthetic_speech_pool(std::size_t count, int sample_rate, double seconds,
                                std::uint64_t seed) {
  if (sample_rate <= 0 || !(seconds > 0.0)) throw ParameterError("bad pool geometry");
  AudioPool pool;
  const double nyquist = 0.5 * sample_rate;
  for (std::size_t c = 0; c < count; ++c) {
    CounterRng rng(seed, c, kFieldSpeechPool);
    const Eigen::Index n = clip_length(rng, sample_rate, seconds, 0.6, 1.3);
    const double f0 = rng.uniform(90.0, 300.0);
    const int harmonics = 3 + static_cast<int>(rng.below(4));
    const double rate = rng.uniform(2.0, 6.0);
    const double env_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int h = 1; h <= harmonics; ++h) {
      const double f = f0 * h;
      if (f >= nyquist) break;
      const double amp = rng.uniform(0.3, 1.0) / h;
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      for (Eigen::Index i = 0; i < n; ++i) {
        x(i) += amp * std::sin(2.0 * std::numbers::pi * f * i / sample_rate + phase);
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      x(i) *= 0.3 + 0.7 * (0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * rate * t + env_phase));
    }
    pool.clips.emplace_back(std::move(x), sample_rate);
    pool.names.push_back("synthetic_speech_" + std::to_string(c));
  }
  return pool;
}

AudioPool synthetic_noise_pool(std::size_t count, int sample_rate, double seconds,
                               std::uint64_t seed) {
  if (sample_rate <= 0 || !(seconds > 0.0)) throw ParameterError("bad pool geometry");
  AudioPool pool;
  for (std::size_t c = 0; c < count; ++c) {
    CounterRng rng(seed, c, kFieldNoisePool);
    const Eigen::Index n = clip_length(rng, sample_rate, seconds, 0.3, 0.9);
    const double pole = rng.uniform(0.0, 0.95);
    const Eigen::Index burst = std::max<Eigen::Index>(1, sample_rate / 4);
    Eigen::VectorXd x(n);
    double y = 0.0;
    double level = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i % burst == 0) level = rng.uniform() < 0.5 ? 1.0 : 0.3;
      y = pole * y + (1.0 - pole) * rng.normal();
      x(i) = level * y;
    }
    pool.clips.emplace_back(std::move(x), sample_rate);
    pool.names.push_back("synthetic_noise_" + std::to_string(c));
  }
  return pool;
}

SynthesisParams sample_params(const SynthesisConfig& config, std::uint64_t index,
                            std::size_t source_pool_size, std::size_t noise_pool_size) {
  config.validate();
  if (source_pool_size == 0) throw ConfigError("source pool is empty");
  if (config.noisy && noise_pool_size == 0) throw ConfigError("noise pool is empty");

  SynthesisParams p;
  const std::uint64_t k = config.speaker_counts.size();
  {
    CounterRng rng(config.seed, index / k, kFieldSpeakerBlock);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = k; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    p.m = config.speaker_counts[order[index % k]];
  }
  if (source_pool_size < static_cast<std::size_t>(p.m)) {
    throw ConfigError("source pool has " + std::to_string(source_pool_size) +
                      " clips, fewer than " + std::to_string(p.m) + " speakers");
  }
  {
    CounterRng rng(config.seed, index, kFieldOverlap);
    p.overlap_ratio = rng.uniform(config.overlap.lo, config.overlap.hi);
  }
  {
    CounterRng rng(config.seed, index, kFieldGains);
    for (int s = 0; s < p.m; ++s) p.gains_db.push_back(rng.uniform(config.speech_db.lo, config.speech_db.hi));
  }
  {
    CounterRng rng(config.seed, index, kFieldSources);
    while (p.source_picks.size() < static_cast<std::size_t>(p.m)) {
      const std::size_t pick = rng.below(source_pool_size);
      if (std::find(p.source_picks.begin(), p.source_picks.end(), pick) == p.source_picks.end()) {
        p.source_picks.push_back(pick);
      }
    }
  }
  if (config.noisy) {
    CounterRng rng(config.seed, index, kFieldNoise);
    p.noise_db = rng.uniform(config.noise_db.lo, config.noise_db.hi);
    p.noise_pick = rng.below(noise_pool_size);
  }
  return p;
}

std::vector<Eigen::Index> overlap_offsets(int m, double overlap_ratio, Eigen::Index total_len) {
  if (total_len <= 0) throw ParameterError("total length must be positive");
  if (m < 1) throw ParameterError("need at least one source");
  if (!(overlap_ratio >= 0.0 && overlap_ratio <= 1.0)) {
    throw ParameterError("overlap ratio must lie in [0, 1]");
  }
  std::vector<Eigen::Index> offsets(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double start = k * (1.0 - overlap_ratio) * static_cast<double>(total_len) / m;
    offsets[static_cast<std::size_t>(k)] =
        std::min<Eigen::Index>(total_len - 1, static_cast<Eigen::Index>(std::llround(start)));
  }
  return offsets;
}

std::vector<Waveform> place_with_overlap(const std::vector<Waveform>& sources,
                                         double overlap_ratio, Eigen::Index total_len) {
  const auto offsets = overlap_offsets(static_cast<int>(sources.size()), overlap_ratio, total_len);
  std::vector<Waveform> placed;
  placed.reserve(sources.size());
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const Waveform& s = sources[k];
    if (s.size() == 0) throw DimensionError("empty source " + std::to_string(k));
    const Eigen::Index off = offsets[k];
    const Eigen::Index n = std::min(s.size(), total_len - off);
    Waveform w{Eigen::VectorXd::Zero(total_len), s.sample_rate};
    w.samples.segment(off, n) = s.samples.head(n);
    placed.push_back(std::move(w));
  }
  return placed;
}

Waveform tile_to_length(const Waveform& clip, Eigen::Index length) {
  if (clip.size() == 0) throw DimensionError("cannot tile an empty clip");
  if (length <= 0) throw ParameterError("tile length must be positive");
  Waveform out{Eigen::VectorXd(length), clip.sample_rate};
  for (Eigen::Index pos = 0; pos < length; pos += clip.size()) {
    const Eigen::Index n = std::min(clip.size(), length - pos);
    out.samples.segment(pos, n) = clip.samples.head(n);
  }
  return out;
}

UtteranceRecord synth_utterance(const SynthesisConfig& config, std::uint64_t index,
                                const AudioPool& source_pool, const AudioPool& noise_pool) {
  const SynthesisParams p = sample_params(config, index, source_pool.size(), noise_pool.size());
  const Eigen::Index total = config.total_samples();

  UtteranceRecord r;
  r.seed = config.seed;
  r.index = index;
  r.m = p.m;
  r.overlap_ratio = p.overlap_ratio;
  r.gains_db = p.gains_db;
  r.source_picks = p.source_picks;
  r.offsets = overlap_offsets(p.m, p.overlap_ratio, total);

  // Gains are applied to the part of each clip that lands inside the
  // utterance, so the active region carries exactly the sampled energy.
  std::vector<Waveform> segments;
  for (int k = 0; k < p.m; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Waveform& clip = source_pool.clips[p.source_picks[ku]];
    const std::string& name = source_pool.names.empty() ? std::string("?")
                                                        : source_pool.names[p.source_picks[ku]];
    if (clip.sample_rate != config.sample_rate) {
      throw FormatError("source " + name + " has sample rate " + std::to_string(clip.sample_rate) +
                        ", expected " + std::to_string(config.sample_rate));
    }
    if (clip.size() == 0) throw DegenerateSignalError("source " + name + " is empty");
    const Eigen::Index active = std::min(clip.size(), total - r.offsets[ku]);
    Waveform seg{clip.samples.head(active), clip.sample_rate};
    if (mean_power(seg.samples) == 0.0) {
      throw DegenerateSignalError("source " + name + " is silent over its active region");
    }
    segments.push_back(rescale_to_energy(seg, p.gains_db[ku]));
    r.active_lengths.push_back(active);
  }
  r.sources = place_with_overlap(segments, p.overlap_ratio, total);

  if (p.noise_db) {
    const Waveform& clip = noise_pool.clips[*p.noise_pick];
    const std::string name = noise_pool.names.empty() ? std::string("?") : noise_pool.names[*p.noise_pick];
    if (clip.sample_rate != config.sample_rate) {
      throw FormatError("noise " + name + " has sample rate " + std::to_string(clip.sample_rate) +
                        ", expected " + std::to_string(config.sample_rate));
    }
    if (clip.size() == 0 || mean_power(clip.samples) == 0.0) {
      throw DegenerateSignalError("noise " + name + " is silent");
    }
    r.noise = rescale_to_energy(tile_to_length(clip, total), *p.noise_db);
    r.noise_db = p.noise_db;
    r.noise_pick = p.noise_pick;
    r.mixture = mix(r.sources, *r.noise);
  } else {
    r.mixture = mix(r.sources);
  }
  return r;
}

std::string utterance_filename(std::uint64_t index, std::string_view role, int k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "utt%06llu_%.*s%d.wav", static_cast<unsigned long long>(index),
                static_cast<int>(role.size()), role.data(), k);
  return buf;
}

ManifestEntry make_manifest_entry(const UtteranceRecord& record) {
  ManifestEntry e;
  e.index = record.index;
  e.seed = record.seed;
  e.m = record.m;
  e.sample_rate = record.mixture.sample_rate;
  e.num_samples = record.mixture.size();
  e.overlap_ratio = record.overlap_ratio;
  e.gains_db = record.gains_db;
  e.noise_db = record.noise_db;
  e.offsets = record.offsets;
  e.active_lengths = record.active_lengths;
  e.source_picks = record.source_picks;
  e.noise_pick = record.noise_pick;
  e.mix_path = utterance_filename(record.index, "mix", 0);
  for (int k = 0; k < record.m; ++k) e.source_paths.push_back(utterance_filename(record.index, "src", k));
  if (record.noisy()) e.noise_path = utterance_filename(record.index, "noise", 0);
  return e;
}

namespace {

template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string to_manifest_line(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["index"] = e.index;
  j["seed"] = e.seed;
  j["m"] = e.m;
  j["sample_rate"] = e.sample_rate;
  j["num_samples"] = e.num_samples;
  j["overlap_ratio"] = e.overlap_ratio;
  j["overlap_scheme"] = "chain";
  j["energy_reference"] = "mean_square_re_unit_full_scale";
  j["gains_db"] = e.gains_db;
  j["noise_db"] = optional_json(e.noise_db);
  j["offsets"] = e.offsets;
  j["active_lengths"] = e.active_lengths;
  j["source_picks"] = e.source_picks;
  j["noise_pick"] = optional_json(e.noise_pick);
  j["mix"] = e.mix_path;
  j["sources"] = e.source_paths;
  j["noise"] = optional_json(e.noise_path);
  return j.dump();
}

ManifestEntry parse_manifest_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ManifestEntry e;
    e.index = j.at("index").get<std::uint64_t>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.m = j.at("m").get<int>();
    e.sample_rate = j.at("sample_rate").get<int>();
    e.num_samples = j.at("num_samples").get<Eigen::Index>();
    e.overlap_ratio = j.at("overlap_ratio").get<double>();
    e.gains_db = j.at("gains_db").get<std::vector<double>>();
    if (!j.at("noise_db").is_null()) e.noise_db = j.at("noise_db").get<double>();
    e.offsets = j.at("offsets").get<std::vector<Eigen::Index>>();
    e.active_lengths = j.at("active_lengths").get<std::vector<Eigen::Index>>();
    e.source_picks = j.at("source_picks").get<std::vector<std::size_t>>();
    if (!j.at("noise_pick").is_null()) e.noise_pick = j.at("noise_pick").get<std::size_t>();
    e.mix_path = j.at("mix").get<std::string>();
    e.source_paths = j.at("sources").get<std::vector<std::string>>();
    if (!j.at("noise").is_null()) e.noise_path = j.at("noise").get<std::string>();
    if (e.m < 1 || e.source_paths.size() != static_cast<std::size_t>(e.m)) {
      throw DataError("manifest entry " + std::to_string(e.index) + ": m disagrees with sources");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed manifest line: ") + ex.what());
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    entries.push_back(parse_manifest_line(line));
  }
  return entries;
}

UtteranceRecord load_record(const ManifestEntry& e, const std::filesystem::path& dir) {
  auto load = [&](const std::string& rel) {
    const auto path = dir / rel;
    if (!std::filesystem::exists(path)) {
      throw DataError("utterance " + std::to_string(e.index) + ": missing " + path.string());
    }
    Waveform w = read_wav(path);
    if (w.size() != e.num_samples || w.sample_rate != e.sample_rate) {
      throw DataError("utterance " + std::to_string(e.index) + ": " + path.string() +
                      " does not match manifest length/rate");
    }
    return w;
  };
  UtteranceRecord r;
  r.seed = e.seed;
  r.index = e.index;
  r.m = e.m;
  r.overlap_ratio = e.overlap_ratio;
  r.gains_db = e.gains_db;
  r.noise_db = e.noise_db;
  r.offsets = e.offsets;
  r.active_lengths = e.active_lengths;
  r.source_picks = e.source_picks;
  r.noise_pick = e.noise_pick;
  r.mixture = load(e.mix_path);
  for (const auto& p : e.source_paths) r.sources.push_back(load(p));
  if (e.noise_path) r.noise = load(*e.noise_path);
  return r;
}

std::vector<ManifestEntry> write_dataset(const SynthesisConfig& config, std::uint64_t count,
                                         const AudioPool& source_pool,
                                         const AudioPool& noise_pool,
                                         const std::filesystem::path& out_dir,
                                         WavEncoding encoding) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<ManifestEntry> entries;
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const UtteranceRecord r = synth_utterance(config, i, source_pool, noise_pool);
    ManifestEntry e = make_manifest_entry(r);
    write_wav(out_dir / e.mix_path, r.mixture, encoding);
    for (int k = 0; k < r.m; ++k) {
      write_wav(out_dir / e.source_paths[static_cast<std::size_t>(k)],
                r.sources[static_cast<std::size_t>(k)], encoding);
    }
    if (r.noise) write_wav(out_dir / *e.noise_path, *r.noise, encoding);
    entries.push_back(std::move(e));
  }

  const auto manifest = out_dir / std::string(kManifestName);
  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + manifest.string());
  for (const auto& e : entries) out << to_manifest_line(e) << '\n';
  if (!out) throw IoError("write failed for " + manifest.string());
  return entries;
}

}  // namespace a2pit
