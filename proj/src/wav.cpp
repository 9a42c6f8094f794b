// wav.cpp

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

#include "a2pit/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace a2pit {

namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xff));
}

void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file" + where);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw FormatError("truncated chunk" + where);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("short fmt chunk" + where);
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == 0xFFFE && size >= 26) format = le16(chunk + 32);  // extensible subformat
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || data == nullptr) throw FormatError("missing fmt or data chunk" + where);
  if (channels != 1) throw FormatError("expected mono audio, got " + std::to_string(channels) +
                                       " channels" + where);
  if (rate == 0) throw FormatError("zero sample rate" + where);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    const auto n = static_cast<Eigen::Index>(data_size / 2);
    w.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(le16(data + 2 * i));
      w.samples(i) = static_cast<double>(v) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const auto n = static_cast<Eigen::Index>(data_size / 4);
    w.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::uint32_t raw = le32(data + 4 * i);
      float f;
      std::memcpy(&f, &raw, sizeof f);
      w.samples(i) = static_cast<double>(f);
    }
  } else {
    throw FormatError("unsupported encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits)" + where);
  }
  return w;
}

void write_wav(const std::filesystem::path& path, const Waveform& wave, WavEncoding encoding) {
  if (wave.sample_rate <= 0) throw ParameterError("sample rate must be positive");
  if (!wave.samples.allFinite()) throw ValueError("non-finite sample in " + path.string());
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint32_t width = pcm ? 2 : 4;
  const auto n = static_cast<std::uint32_t>(wave.size());
  std::vector<unsigned char> out;
  out.reserve(44 + width * static_cast<std::size_t>(n));
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + width * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, pcm ? 1 : 3);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(wave.sample_rate));
  put32(out, static_cast<std::uint32_t>(wave.sample_rate) * width);
  put16(out, static_cast<std::uint16_t>(width));
  put16(out, static_cast<std::uint16_t>(8 * width));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, width * n);
  for (Eigen::Index i = 0; i < wave.size(); ++i) {
    if (pcm) {
      const double scaled = std::round(wave.samples(i) * 32768.0);
      const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      put16(out, static_cast<std::uint16_t>(v));
    } else {
      const auto f = static_cast<float>(wave.samples(i));
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      put32(out, raw);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace a2pit
