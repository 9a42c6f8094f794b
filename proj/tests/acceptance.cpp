// tests/acceptance.cpp

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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "a2pit/detector.hpp"
#include "a2pit/evalkit.hpp"
#include "a2pit/mixkit.hpp"
#include "a2pit/pit.hpp"
#include "a2pit/toytrain.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace a2pit;
using a2pit::testing::central_difference;
using a2pit::testing::enumerate_min_cost;
using a2pit::testing::orthogonal_tones;
using a2pit::testing::random_vector;
using a2pit::testing::random_wave;
using a2pit::testing::relative_error;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs >= budget_s && o.pass) {
    o.pass = false;
    o.detail = "runtime " + fmt("%.2f", secs) + " s exceeds " + fmt("%.0f", budget_s) + " s; " + o.detail;
  }
  if (!o.pass) ++failures;
  std::printf("%s [%2d] %-24s %.3f s  %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
  std::fflush(stdout);
}

Eigen::VectorXd correlated(CounterRng& rng, const Eigen::VectorXd& x) {
  return rng.uniform(-2.0, 2.0) * x + rng.uniform(0.05, 3.0) * random_vector(rng, x.size());
}

Outcome alpha_cap() {
  Outcome o;
  CounterRng rng(1, 0, 0);
  const double expect = 10.0 * std::log10(1.0 / 0.3);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Waveform x = random_wave(rng, 16 + static_cast<Eigen::Index>(rng.below(4000)));
    worst = std::max(worst, std::abs(alpha_sisdr(x, x, 0.3) - expect));
  }
  require(o, worst < 1e-6, "max deviation " + fmt("%.3g", worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max |dev| ") + fmt("%.3g", worst);
  return o;
}

Outcome scale_invariance() {
  Outcome o;
  CounterRng rng(2, 0, 0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::VectorXd x = random_vector(rng, 256);
    const Eigen::VectorXd xh = correlated(rng, x);
    const double base = sisdr(x, xh);
    for (double beta : {0.1, 1.0, 3.0, 100.0}) {
      worst = std::max(worst, std::abs(sisdr(x, Eigen::VectorXd(beta * xh)) - base));
    }
  }
  require(o, worst < 1e-9, "max deviation " + fmt("%.3g", worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max |dev| ") + fmt("%.3g", worst);
  return o;
}

Outcome reduction() {
  Outcome o;
  CounterRng rng(3, 0, 0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::VectorXd x = random_vector(rng, 128);
    const Eigen::VectorXd xh = correlated(rng, x);
    worst = std::max(worst, std::abs(alpha_sisdr(x, xh, 0.0) - sisdr(x, xh)));
  }
  require(o, worst < 1e-12, "max deviation " + fmt("%.3g", worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max |dev| ") + fmt("%.3g", worst);
  return o;
}

Outcome gradient_oracle() {
  Outcome o;
  CounterRng rng(4, 0, 0);
  double worst = 0.0;
  for (Eigen::Index n : {8, 64, 1024}) {
    for (int t = 0; t < 100; ++t) {
      const Eigen::VectorXd x = random_vector(rng, n);
      const Eigen::VectorXd xh = correlated(rng, x);
      const double alpha = t % 2 ? 0.3 : rng.uniform(0.0, 1.0);
      const Eigen::VectorXd g = alpha_sisdr_grad(x, xh, alpha);
      const Eigen::VectorXd fd = central_difference(
          [&](const Eigen::VectorXd& v) { return alpha_sisdr(x, v, alpha); }, xh, 1e-6);
      worst = std::max(worst, relative_error(g, fd));
    }
  }
  require(o, worst < 1e-5, "signal gradient rel err " + fmt("%.3g", worst));

  double toy_worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n_out = 2 + static_cast<int>(rng.below(3));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_out)));
    const ToyModel model = ToyModel::random(n_out, 8, 100 + static_cast<std::uint64_t>(t));
    std::vector<UtteranceRecord> batch(2);
    for (auto& r : batch) {
      r.m = m;
      for (int k = 0; k < m; ++k) r.sources.push_back({random_vector(rng, 64), kToySampleRate});
      r.mixture = mix(r.sources);
    }
    TrainConfig cfg;
    cfg.reduction = t % 2 ? Reduction::kSum : Reduction::kMean;
    const auto lg = loss_and_gradient(model, batch, cfg);
    const Eigen::VectorXd w0 = Eigen::Map<const Eigen::VectorXd>(model.weights.data(), model.weights.size());
    const Eigen::VectorXd fd = central_difference(
        [&](const Eigen::VectorXd& w) {
          ToyModel probe = model;
          Eigen::Map<Eigen::VectorXd>(probe.weights.data(), probe.weights.size()) = w;
          return loss_and_gradient(probe, batch, cfg).loss.l_obj;
        },
        w0, 1e-6);
    const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(lg.weight_grad.data(), lg.weight_grad.size());
    toy_worst = std::max(toy_worst, relative_error(g, fd));
  }
  require(o, toy_worst < 1e-4, "toy gradient rel err " + fmt("%.3g", toy_worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("signal ") + fmt("%.3g", worst) + ", toy " +
              fmt("%.3g", toy_worst);
  return o;
}

Outcome assignment_equivalence() {
  Outcome o;
  CounterRng rng(5, 0, 0);
  double worst = 0.0;
  for (int n = 2; n <= 6; ++n) {
    for (int t = 0; t < 1000; ++t) {
      Eigen::MatrixXd c(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = t % 3 == 0 ? std::round(rng.uniform(-3.0, 3.0)) : rng.uniform(-50.0, 50.0);
      const auto pm = make_loss_matrix(c);
      const double h = assign_hungarian(pm).total_loss;
      const double b = assign_brute_force(pm).total_loss;
      worst = std::max(worst, std::abs(h - b));
    }
  }
  require(o, worst < 1e-9, "max |hungarian - brute| " + fmt("%.3g", worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max |diff| ") + fmt("%.3g", worst);
  return o;
}

Outcome decomposition() {
  Outcome o;
  CounterRng rng(6, 0, 0);
  double worst = 0.0, worst_min = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    std::vector<Waveform> src, outs;
    for (int k = 0; k < m; ++k) src.push_back(random_wave(rng, 128));
    const Waveform mixture = mix(src);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd v = 0.7 * random_vector(rng, 128);
      v += rng.uniform() < 0.4 ? mixture.samples : src[rng.below(static_cast<std::uint64_t>(m))].samples;
      outs.push_back({v, 16000});
    }
    A2PITConfig cfg;
    cfg.n_outputs = n;
    cfg.reduction = t % 2 ? Reduction::kSum : Reduction::kMean;
    const auto r = a2pit_loss(outs, src, mixture, cfg);
    worst = std::max(worst, std::abs(r.l_sep + r.l_ae - r.total_loss));
    const auto pm = pairwise_matrix(outs, build_targets(src, mixture, cfg), cfg);
    worst_min = std::max(worst_min, std::abs(r.total_loss - enumerate_min_cost(pm.weighted())));
  }
  require(o, worst < 1e-9, "decomposition gap " + fmt("%.3g", worst));
  require(o, worst_min < 1e-9, "total differs from enumerated minimum by " + fmt("%.3g", worst_min));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max gap ") + fmt("%.3g", worst) +
              ", vs enumeration " + fmt("%.3g", worst_min);
  return o;
}

Outcome synthesis_fidelity() {
  Outcome o;
  SynthesisConfig cfg;  // 6 s at 16 kHz, 1-4 speakers
  cfg.noisy = true;
  cfg.seed = 2024;
  const std::uint64_t count = 200;
  const auto speech = synthetic_speech_pool(48, cfg.sample_rate, cfg.utterance_seconds, 11);
  const auto noise = synthetic_noise_pool(12, cfg.sample_rate, cfg.utterance_seconds, 12);

  const fs::path root = fs::temp_directory_path() / "a2pit_acceptance_synth";
  fs::remove_all(root);
  write_dataset(cfg, count, speech, noise, root / "run1");
  write_dataset(cfg, count, speech, noise, root / "run2");
  const std::string m1 = slurp(root / "run1" / std::string(kManifestName));
  const std::string m2 = slurp(root / "run2" / std::string(kManifestName));
  require(o, !m1.empty() && m1 == m2, "manifests differ between runs");
  const auto entries = read_manifest(root / "run1" / std::string(kManifestName));
  require(o, entries.size() == count, "manifest has wrong length");

  double sum_err = 0.0, gain_err = 0.0;
  std::map<int, int> hist;
  for (const auto& e : entries) {
    const auto r = synth_utterance(cfg, e.index, speech, noise);
    Eigen::VectorXd acc = r.sources[0].samples;
    for (std::size_t k = 1; k < r.sources.size(); ++k) acc += r.sources[k].samples;
    if (r.noise) acc += r.noise->samples;
    sum_err = std::max(sum_err, (r.mixture.samples - acc).cwiseAbs().maxCoeff());
    for (int k = 0; k < e.m; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double p = power_db(r.sources[ku].samples.segment(e.offsets[ku], e.active_lengths[ku]));
      gain_err = std::max(gain_err, std::abs(p - e.gains_db[ku]));
    }
    if (e.noise_db) gain_err = std::max(gain_err, std::abs(power_db(r.noise->samples) - *e.noise_db));
    ++hist[e.m];
  }
  fs::remove_all(root);
  require(o, sum_err == 0.0, "mixture-sum residual " + fmt("%.3g", sum_err));
  require(o, gain_err < 0.01, "gain error " + fmt("%.4f", gain_err) + " dB");
  double freq_dev = 0.0;
  for (int m = 1; m <= 4; ++m) {
    freq_dev = std::max(freq_dev, std::abs(hist[m] / static_cast<double>(count) - 0.25));
  }
  require(o, freq_dev <= 0.05, "speaker-count frequency deviation " + fmt("%.3f", freq_dev));
  std::ostringstream d;
  d << "sum residual " << sum_err << ", max gain err " << fmt("%.2e", gain_err) << " dB, counts";
  for (const auto& [m, n] : hist) d << ' ' << m << ':' << n;
  d << ", manifests identical";
  o.detail += (o.detail.empty() ? "" : "; ") + d.str();
  return o;
}

Outcome detection_mechanics() {
  Outcome o;
  CounterRng rng(8, 0, 0);
  const Eigen::Index len = 4000;
  const DetectionConfig clean{*preset_threshold("clean")};
  int cases = 0;
  for (int n = 1; n <= 4; ++n) {
    for (int k = 1; k <= n; ++k) {
      for (int trial = 0; trial < 10; ++trial) {
        // k sources plus an orthogonal background 10 dB down; the background
        // keeps a lone source distinct from the mixture.
        auto tones = orthogonal_tones(rng, k + 1, len);
        std::vector<Waveform> src;
        for (int s = 0; s < k; ++s) {
          src.push_back(rescale_to_energy(tones[static_cast<std::size_t>(s)], rng.uniform(-2.5, 2.5)));
        }
        const Waveform background = rescale_to_energy(tones.back(), -10.0);
        const Waveform mixture = mix(src, background);
        std::vector<Waveform> outs = src;
        while (static_cast<int>(outs.size()) < n) outs.push_back(mixture);
        for (int i = n - 1; i > 0; --i) {
          std::swap(outs[static_cast<std::size_t>(i)], outs[rng.below(static_cast<std::uint64_t>(i) + 1)]);
        }
        const int got = count_speakers(outs, mixture, clean);
        require(o, got == k, "(k=" + std::to_string(k) + ", N=" + std::to_string(n) + ") predicted " +
                                 std::to_string(got));
        if (k >= 2) {
          const Waveform dry = mix(src);
          std::vector<Waveform> dry_outs = src;
          while (static_cast<int>(dry_outs.size()) < n) dry_outs.push_back(dry);
          const int g2 = count_speakers(dry_outs, dry, clean);
          require(o, g2 == k, "clean mixture (k=" + std::to_string(k) + ", N=" + std::to_string(n) +
                                  ") predicted " + std::to_string(g2));
        }
        ++cases;
      }
    }
    const Waveform mixture = mix(orthogonal_tones(rng, 2, len));
    const std::vector<Waveform> copies(static_cast<std::size_t>(n), mixture);
    require(o, count_speakers(copies, mixture, clean) == 0, "all-mixture outputs not K=0 at N=" + std::to_string(n));
  }
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(cases) + " constructed cases, K=0 for N=1..4";
  return o;
}

Outcome streaming() {
  Outcome o;
  CounterRng rng(9, 0, 0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index len = 1600 + static_cast<Eigen::Index>(rng.below(14400));
    const Waveform mixture = random_wave(rng, len);
    const Waveform out{correlated(rng, mixture.samples), 16000};
    const double full = detect({out}, mixture, DetectionConfig{}).scores_db[0];
    for (Eigen::Index hop : {1, 160, 1600}) {
      DetectionConfig cfg;
      cfg.frame_hop = hop;
      const auto frames = frame_scores({out}, mixture, cfg);
      worst = std::max(worst, std::abs(frames[0].back() - full));
    }
  }
  require(o, worst < 1e-9, "final frame score deviates by " + fmt("%.3g", worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max |dev| ") + fmt("%.3g", worst);
  return o;
}

Outcome selection_rules() {
  Outcome o;
  CounterRng rng(10, 0, 0);
  for (int t = 0; t < 10000; ++t) {
    const int n = 1 + static_cast<int>(rng.below(8));
    DetectionResult r;
    for (int i = 0; i < n; ++i) {
      r.valid_mask.push_back(rng.uniform() < 0.5);
      r.scores_db.push_back(0.0);
    }
    r.predicted_count = static_cast<int>(std::count(r.valid_mask.begin(), r.valid_mask.end(), true));
    const int m = static_cast<int>(rng.below(static_cast<std::uint64_t>(n) + 1));
    const std::uint64_t seed = rng.next_u64();
    const auto sel = select_outputs(r, m, seed);
    const std::set<int> uniq(sel.begin(), sel.end());
    const auto valid = r.valid_indices();
    const int k = r.predicted_count;
    bool ok = static_cast<int>(sel.size()) == m && uniq.size() == sel.size() &&
              std::is_sorted(sel.begin(), sel.end()) && (sel.empty() || (sel.front() >= 0 && sel.back() < n));
    if (k <= m) {
      for (int v : valid) ok = ok && uniq.count(v) == 1;
    } else {
      for (int s : sel) ok = ok && r.valid_mask[static_cast<std::size_t>(s)];
    }
    if (k == m) ok = ok && sel == valid;
    ok = ok && select_outputs(r, m, seed) == sel;
    require(o, ok, "trial " + std::to_string(t) + " violates the selection rules");
  }
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("10000 trials");
  return o;
}

Outcome toy_convergence() {
  Outcome o;
  const int n_out = 3;
  TrainConfig cfg;  // 4000 steps
  cfg.seed = 1;
  const auto train_set = toy_dataset(64, 1);
  const auto test_set = toy_dataset(200, 2);
  const auto res = train(ToyModel::near_identity(n_out, kToyFrame, 1), train_set, cfg);
  require(o, cfg.steps <= 5000, "too many steps");

  const DetectionConfig det{*preset_threshold("clean")};
  const A2PITConfig objective = cfg.objective(n_out);
  double min_sep = INFINITY, sum_sep = 0.0, min_ae = INFINITY;
  int sep_n = 0;
  ConfusionMatrix cm;
  for (const auto& rec : test_set) {
    const auto outs = forward(res.model, rec.mixture);
    const auto a = a2pit_loss(outs, rec.sources, rec.mixture, objective);
    for (int i = 0; i < n_out; ++i) {
      const int col = a.permutation[static_cast<std::size_t>(i)];
      const Waveform& y = outs[static_cast<std::size_t>(i)];
      if (col < rec.m) {
        const double s = sisdr(rec.sources[static_cast<std::size_t>(col)], y);
        min_sep = std::min(min_sep, s);
        sum_sep += s;
        ++sep_n;
      } else {
        min_ae = std::min(min_ae, sisdr(rec.mixture, y));
      }
    }
    cm.add(count_speakers(outs, rec.mixture, det), rec.m);
  }
  require(o, min_sep >= 20.0, "valid-output SI-SDR min " + fmt("%.2f", min_sep) + " dB");
  require(o, min_ae >= 20.0, "autoencoding score min " + fmt("%.2f", min_ae) + " dB");
  require(o, cm.accuracy() >= 0.95, "confusion diagonal " + fmt("%.3f", cm.accuracy()));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("steps ") + std::to_string(cfg.steps) +
              ", SI-SDR min/mean " + fmt("%.2f", min_sep) + "/" + fmt("%.2f", sum_sep / sep_n) +
              " dB, autoencoding min " + fmt("%.2f", min_ae) + " dB, diagonal " + fmt("%.3f", cm.accuracy());
  return o;
}

Outcome report_formats() {
  Outcome o;
  CounterRng rng(12, 0, 0);
  ConfusionMatrix cm;
  SeparationReport rep;
  const DetectionConfig det{*preset_threshold("clean")};
  for (int m = 1; m <= 3; ++m) {
    UtteranceRecord r;
    r.m = m;
    auto tones = orthogonal_tones(rng, m, 1600);
    r.sources = tones;
    r.mixture = mix(r.sources);
    std::vector<Waveform> outs = r.sources;
    for (auto& w : outs) w.samples += 0.05 * random_vector(rng, 1600);
    while (outs.size() < 4) outs.push_back(r.mixture);
    for (auto mode : {SelectionMode::kOracle, SelectionMode::kPredicted}) {
      const auto ev = eval_utterance(outs, r, det, mode, 3);
      if (mode == SelectionMode::kOracle) cm.add(ev.predicted_count, ev.m);
      rep.add(ev);
    }
  }
  const std::string conf = cm.to_csv();
  const std::string expect_conf_head = "predicted,oracle_1,oracle_2,oracle_3,oracle_4\n0,";
  require(o, conf.rfind(expect_conf_head, 0) == 0, "confusion header/zero row: " + conf.substr(0, 60));
  require(o, std::count(conf.begin(), conf.end(), '\n') == 6, "confusion grid must have rows 0..4");
  const std::string sep = rep.to_csv();
  require(o, sep.rfind("m,selection_mode,metric,mean_db_per_source,num_sources\n", 0) == 0, "separation header");
  for (const char* row : {"\n1,oracle,si_sdr,", "\n1,predicted,si_sdr,", "\n2,oracle,si_sdri,",
                          "\n2,predicted,si_sdri,", "\n3,oracle,si_sdri,", "\n3,predicted,si_sdri,"}) {
    require(o, sep.find(row) != std::string::npos, std::string("missing separation row ") + (row + 1));
  }
  const std::string hist = histogram(std::vector<double>{1.0, 2.5}, 1.0).to_csv();
  require(o, hist.rfind("bin_lo,bin_hi,count\n-40.000000,-39.000000,0\n", 0) == 0, "histogram header");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("confusion grid, separation rows, histogram ok");
  return o;
}

}  // namespace

int main() {
  criterion(1, "alpha_cap", 1.0, alpha_cap);
  criterion(2, "scale_invariance", 5.0, scale_invariance);
  criterion(3, "alpha_zero_reduction", 0.0, reduction);
  criterion(4, "gradient_oracle", 30.0, gradient_oracle);
  criterion(5, "assignment_equivalence", 30.0, assignment_equivalence);
  criterion(6, "a2pit_decomposition", 0.0, decomposition);
  criterion(7, "synthesis_fidelity", 60.0, synthesis_fidelity);
  criterion(8, "detection_mechanics", 0.0, detection_mechanics);
  criterion(9, "streaming_consistency", 0.0, streaming);
  criterion(10, "fault_tolerant_selection", 0.0, selection_rules);
  criterion(11, "toy_convergence", 300.0, toy_convergence);
  criterion(12, "report_formats", 0.0, report_formats);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures;
}
