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

#include "prosoref/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "prosoref/error.h"
#include "prosoref/text_format.h"

namespace prosoref {
namespace {

std::uint32_t ReadU32(std::string_view b, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24;
}

std::uint16_t ReadU16(std::string_view b, std::size_t off) {
  return static_cast<std::uint16_t>(
      static_cast<unsigned char>(b[off]) |
      static_cast<unsigned char>(b[off + 1]) << 8);
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform DecodeWav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    Fail(ErrorCode::kInvalidWave, "not a RIFF/WAVE stream");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t off = 12;
  while (off + 8 <= b.size()) {
    std::string_view id = b.substr(off, 4);
    std::uint32_t size = ReadU32(b, off + 4);
    std::size_t body = off + 8;
    if (body + size > b.size()) Fail(ErrorCode::kInvalidWave, "truncated chunk");
    if (id == "fmt ") {
      if (size < 16) Fail(ErrorCode::kInvalidWave, "short fmt chunk");
      format = ReadU16(b, body);
      channels = ReadU16(b, body + 2);
      rate = ReadU32(b, body + 4);
      bits = ReadU16(b, body + 14);
      // WAVE_FORMAT_EXTENSIBLE keeps the real tag in the sub-format GUID.
      if (format == 0xFFFE && size >= 26) format = ReadU16(b, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) Fail(ErrorCode::kInvalidWave, "data chunk before fmt");
      if (channels != 1) {
        Fail(ErrorCode::kInvalidWave, "expected mono, got " + std::to_string(channels) + " channels");
      }
      Waveform wav;
      wav.sample_rate = static_cast<int>(rate);
      if (format == 1 && bits == 16) {
        wav.samples.resize(size / 2);
        for (std::size_t i = 0; i < wav.samples.size(); ++i) {
          auto v = static_cast<std::int16_t>(ReadU16(b, body + 2 * i));
          wav.samples[i] = v / 32768.0;
        }
      } else if (format == 3 && bits == 32) {
        wav.samples.resize(size / 4);
        for (std::size_t i = 0; i < wav.samples.size(); ++i) {
          std::uint32_t raw = ReadU32(b, body + 4 * i);
          float f;
          std::memcpy(&f, &raw, sizeof(f));
          wav.samples[i] = f;
        }
      } else {
        Fail(ErrorCode::kInvalidWave, "unsupported encoding (format " +
                                          std::to_string(format) + ", " +
                                          std::to_string(bits) + " bits)");
      }
      return wav;
    }
    off = body + size + (size & 1);
  }
  Fail(ErrorCode::kInvalidWave, "no data chunk");
}

Waveform ReadWav(const std::filesystem::path& path) {
  try {
    return DecodeWav(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFileNotFound) throw;
    Fail(e.code(), path.string() + ": " + e.detail());
  }
}

std::string EncodeWav(const Waveform& wav, WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(wav.samples.size() * block);
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  PutU32(out, 36 + data_size);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, encoding == WavEncoding::kPcm16 ? 1 : 3);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(wav.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(wav.sample_rate) * block);
  PutU16(out, block);
  PutU16(out, bits);
  out += "data";
  PutU32(out, data_size);
  for (double s : wav.samples) {
    if (encoding == WavEncoding::kPcm16) {
      double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
      PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(
                      std::clamp(scaled, -32768.0, 32767.0))));
    } else {
      float f = static_cast<float>(s);
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof(raw));
      PutU32(out, raw);
    }
  }
  return out;
}

void WriteWav(const std::filesystem::path& path, const Waveform& wav,
              WavEncoding encoding) {
  WriteFile(path, EncodeWav(wav, encoding));
}

}  // namespace prosoref
