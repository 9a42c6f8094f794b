// a2pit/signal.hpp

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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "a2pit/errors.hpp"

namespace a2pit {

/// Mono sample buffer. Amplitudes are relative to 1.0 full scale.
template <typename Scalar>
struct BasicWaveform {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector samples;
  int sample_rate = 16000;

  BasicWaveform() = default;
  BasicWaveform(Vector s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  Eigen::Index size() const { return samples.size(); }
};

using Waveform = BasicWaveform<double>;

// Floor applied to the target and estimate energies before they divide.
inline constexpr double kEnergyFloor = 1e-8;
// Squared cosine similarity is clamped to [kCosSqFloor, kCosSqCeil].
inline constexpr double kCosSqFloor = 1e-12;
inline constexpr double kCosSqCeil = 1.0 - 1e-12;
// SI-SDR at the upper and lower clamps (about +120 and -120 dB).
inline const double kSisdrCap = 10.0 * std::log10(kCosSqCeil / (1.0 - kCosSqCeil));
inline const double kSisdrFloor = 10.0 * std::log10(kCosSqFloor / (1.0 - kCosSqFloor));

/// Inner products of a (target, estimate) pair: a = x.x, b = xhat.x,
/// c2 = xhat.xhat. Accumulated sample by sample in a fixed order so that
/// a streaming scan and a whole-buffer call produce identical bits.
struct SimilarityStats {
  double a = 0.0;
  double b = 0.0;
  double c2 = 0.0;

  void push(double target, double estimate) {
    a += target * target;
    b += estimate * target;
    c2 += estimate * estimate;
  }
};

namespace detail {

template <typename DX, typename DY>
void check_pair(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& xhat) {
  if (x.cols() != 1 || xhat.cols() != 1) {
    throw DimensionError("signals must be column vectors");
  }
  if (x.size() != xhat.size()) {
    throw DimensionError("length mismatch: " + std::to_string(x.size()) + " vs " +
                         std::to_string(xhat.size()));
  }
  if (x.size() == 0) throw DimensionError("empty signal");
}

inline void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ParameterError("alpha must be finite and non-negative, got " + std::to_string(alpha));
  }
}

inline double clamp_cos_sq(double c) {
  return std::clamp(c * c, kCosSqFloor, kCosSqCeil);
}

inline double skewed_ratio_db(double cos_sq, double alpha) {
  return 10.0 * std::log10(cos_sq / ((1.0 + alpha) - cos_sq));
}

}  // namespace detail

template <typename DX, typename DY>
SimilarityStats similarity_stats(const Eigen::MatrixBase<DX>& x,
                                 const Eigen::MatrixBase<DY>& xhat) {
  detail::check_pair(x, xhat);
  SimilarityStats s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s.push(static_cast<double>(x(i)), static_cast<double>(xhat(i)));
  }
  if (!std::isfinite(s.a) || !std::isfinite(s.b) || !std::isfinite(s.c2)) {
    throw ValueError("non-finite samples");
  }
  return s;
}

/// Cosine similarity b / sqrt(a c2) with floored energies, clamped to [-1, 1].
inline double cosine_from_stats(const SimilarityStats& s) {
  if (s.a == 0.0 && s.c2 == 0.0) {
    throw DegenerateSignalError("both target and estimate are all-zero");
  }
  const double denom = std::sqrt(std::max(s.a, kEnergyFloor) * std::max(s.c2, kEnergyFloor));
  return std::clamp(s.b / denom, -1.0, 1.0);
}

inline double alpha_sisdr_from_stats(const SimilarityStats& s, double alpha) {
  detail::check_alpha(alpha);
  return detail::skewed_ratio_db(detail::clamp_cos_sq(cosine_from_stats(s)), alpha);
}

inline double sisdr_from_stats(const SimilarityStats& s) {
  return alpha_sisdr_from_stats(s, 0.0);
}

template <typename DX, typename DY>
double cosine_sim(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& xhat) {
  return cosine_from_stats(similarity_stats(x, xhat));
}

/// Scale-invariant SDR of estimate `xhat` against target `x`, in dB,
/// bounded to [kSisdrFloor, kSisdrCap].
template <typename DX, typename DY>
double sisdr(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& xhat) {
  return sisdr_from_stats(similarity_stats(x, xhat));
}

/// Skewed SI-SDR: 10 log10(c^2 / (1 + alpha - c^2)). Its maximum for
/// alpha > 0 is 10 log10(1 / alpha); alpha = 0 is plain SI-SDR.
template <typename DX, typename DY>
double alpha_sisdr(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& xhat,
                   double alpha) {
  return alpha_sisdr_from_stats(similarity_stats(x, xhat), alpha);
}

/// Derivative of alpha_sisdr with respect to every sample of `xhat`.
/// Zero when c^2 sits on either clamp boundary.
template <typename DX, typename DY>
Eigen::Matrix<typename DY::Scalar, Eigen::Dynamic, 1> alpha_sisdr_grad(
    const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& xhat, double alpha) {
  using Scalar = typename DY::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  detail::check_alpha(alpha);
  const SimilarityStats s = similarity_stats(x, xhat);
  const double c = cosine_from_stats(s);
  const double q = c * c;
  if (q <= kCosSqFloor || q >= kCosSqCeil) return Vector::Zero(xhat.size());

  const double a = std::max(s.a, kEnergyFloor);
  const bool est_floored = s.c2 <= kEnergyFloor;
  const double c2 = std::max(s.c2, kEnergyFloor);
  const double df_dq = 10.0 / std::numbers::ln10 * (1.0 / q + 1.0 / ((1.0 + alpha) - q));
  // q = b^2 / (a c2); db/dxhat = x, dc2/dxhat = 2 xhat (unless floored).
  const double w_target = df_dq * 2.0 * s.b / (a * c2);
  const double w_estimate = est_floored ? 0.0 : -df_dq * 2.0 * s.b * s.b / (a * c2 * c2);
  return (w_target * x.template cast<double>() + w_estimate * xhat.template cast<double>())
      .template cast<Scalar>();
}

template <typename S>
double cosine_sim(const BasicWaveform<S>& x, const BasicWaveform<S>& xhat) {
  return cosine_sim(x.samples, xhat.samples);
}

template <typename S>
double sisdr(const BasicWaveform<S>& x, const BasicWaveform<S>& xhat) {
  return sisdr(x.samples, xhat.samples);
}

template <typename S>
double alpha_sisdr(const BasicWaveform<S>& x, const BasicWaveform<S>& xhat, double alpha) {
  return alpha_sisdr(x.samples, xhat.samples, alpha);
}

template <typename S>
typename BasicWaveform<S>::Vector alpha_sisdr_grad(const BasicWaveform<S>& x,
                                                    const BasicWaveform<S>& xhat,
                                                    double alpha) {
  return alpha_sisdr_grad(x.samples, xhat.samples, alpha);
}

/// Mean-square power, accumulated in sample order.
template <typename Derived>
double mean_power(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) throw DimensionError("empty signal");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = static_cast<double>(x(i));
    acc += v * v;
  }
  return acc / static_cast<double>(x.size());
}

/// Power in dB relative to a unit-amplitude mean square.
template <typename Derived>
double power_db(const Eigen::MatrixBase<Derived>& x) {
  return 10.0 * std::log10(mean_power(x));
}

template <typename S>
BasicWaveform<S> rescale_to_energy(const BasicWaveform<S>& x, double target_db) {
  const double p = mean_power(x.samples);
  if (p == 0.0) throw DegenerateSignalError("cannot rescale an all-zero signal");
  if (!std::isfinite(target_db)) throw ParameterError("target energy must be finite");
  const double gain = std::sqrt(std::pow(10.0, target_db / 10.0) / p);
  return {(x.samples.template cast<double>() * gain).template cast<S>(), x.sample_rate};
}

namespace detail {

template <typename S>
void check_mixable(const BasicWaveform<S>& ref, const BasicWaveform<S>& w) {
  if (w.size() != ref.size()) throw DimensionError("mix: length mismatch");
  if (w.sample_rate != ref.sample_rate) throw DimensionError("mix: sample-rate mismatch");
}

}  // namespace detail

/// Sample-wise sum, accumulated left to right over `sources`.
template <typename S>
BasicWaveform<S> mix(std::span<const BasicWaveform<S>> sources) {
  if (sources.empty()) throw DimensionError("mix: no sources");
  BasicWaveform<S> out = sources.front();
  for (std::size_t k = 1; k < sources.size(); ++k) {
    detail::check_mixable(out, sources[k]);
    out.samples += sources[k].samples;
  }
  return out;
}

template <typename S>
BasicWaveform<S> mix(std::span<const BasicWaveform<S>> sources, const BasicWaveform<S>& noise) {
  BasicWaveform<S> out = mix(sources);
  detail::check_mixable(out, noise);
  out.samples += noise.samples;
  return out;
}

inline Waveform mix(const std::vector<Waveform>& sources) {
  return mix(std::span<const Waveform>(sources));
}

inline Waveform mix(const std::vector<Waveform>& sources, const Waveform& noise) {
  return mix(std::span<const Waveform>(sources), noise);
}

}  // namespace a2pit
