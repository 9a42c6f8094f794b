// a2pit/wav.hpp

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

#include <filesystem>

#include "a2pit/signal.hpp"

namespace a2pit {

/// Reads a mono RIFF/WAVE file: 16-bit PCM or 32-bit IEEE float.
/// PCM samples are scaled by 1/32768.
Waveform read_wav(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kFloat32 };

/// Writes mono little-endian audio. PCM16 samples are rounded after scaling
/// by 32768 and saturated to the int16 range; float32 keeps the full range.
void write_wav(const std::filesystem::path& path, const Waveform& wave,
               WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace a2pit
