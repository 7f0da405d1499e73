// Copyright 2026 The prosoref Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROSOREF_WAV_H_
#define PROSOREF_WAV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace prosoref {

// Mono audio, samples nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

enum class WavEncoding { kPcm16, kFloat32 };

// Accepts RIFF/WAVE with a single channel, either 16-bit PCM or 32-bit IEEE
// float. Unknown chunks are skipped.
Waveform DecodeWav(std::string_view bytes);
Waveform ReadWav(const std::filesystem::path& path);

std::string EncodeWav(const Waveform& wav, WavEncoding encoding);
void WriteWav(const std::filesystem::path& path, const Waveform& wav,
              WavEncoding encoding);

}  // namespace prosoref

#endif  // PROSOREF_WAV_H_
