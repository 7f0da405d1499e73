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

#include "prosoref/manifest.h"

#include <algorithm>
#include <set>

#include "prosoref/error.h"
#include "prosoref/text_format.h"

namespace prosoref {

std::vector<std::string> Manifest::Speakers() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (std::find(out.begin(), out.end(), e.speaker) == out.end()) out.push_back(e.speaker);
  }
  return out;
}

Manifest ParseManifest(std::string_view text, const std::filesystem::path& base_dir) {
  Manifest manifest;
  std::set<std::string> ids;
  auto resolve = [&](std::string_view field) -> std::optional<std::filesystem::path> {
    field = Trim(field);
    if (field.empty()) return std::nullopt;
    std::filesystem::path p{std::string(field)};
    return p.is_absolute() ? p : base_dir / p;
  };
  auto lines = SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (Trim(line).empty() || Trim(line).front() == '#') continue;
    if (manifest.entries.empty() && line.substr(0, 3) == "id\t") continue;
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    auto f = SplitFields(line, '\t');
    if (f.size() != 5) {
      Fail(ErrorCode::kMalformedLine, where + "expected 5 tab-separated fields "
                                              "(id, audio, alignment, posteriorgram, speaker)");
    }
    ManifestEntry e;
    e.id = std::string(Trim(f[0]));
    if (e.id.empty()) Fail(ErrorCode::kMalformedLine, where + "empty id");
    auto audio = resolve(f[1]);
    if (!audio) Fail(ErrorCode::kMalformedLine, where + "missing audio path");
    e.audio = *audio;
    e.alignment = resolve(f[2]);
    e.posteriorgram = resolve(f[3]);
    e.speaker = std::string(Trim(f[4]));
    if (!ids.insert(e.id).second) Fail(ErrorCode::kDuplicateId, where + "id '" + e.id + "' repeats");
    if (!e.alignment && !e.posteriorgram) {
      Fail(ErrorCode::kMissingReference,
           where + "entry '" + e.id + "' has neither alignment nor posteriorgram");
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

Manifest ValidateManifest(const std::filesystem::path& path) {
  Manifest manifest;
  try {
    manifest = ParseManifest(ReadFile(path), path.parent_path());
  } catch (const Error& e) {
    Fail(e.code(), path.string() + ": " + e.detail());
  }
  std::vector<std::string> missing;
  for (const auto& e : manifest.entries) {
    for (const auto* p : {&e.audio}) {
      if (!std::filesystem::exists(*p)) missing.push_back(p->string());
    }
    if (e.alignment && !std::filesystem::exists(*e.alignment)) missing.push_back(e.alignment->string());
    if (e.posteriorgram && !std::filesystem::exists(*e.posteriorgram)) {
      missing.push_back(e.posteriorgram->string());
    }
  }
  if (!missing.empty()) {
    std::string msg = path.string() + ": " + std::to_string(missing.size()) + " missing file(s):";
    for (const auto& m : missing) msg += "\n  " + m;
    Fail(ErrorCode::kFileNotFound, msg);
  }
  return manifest;
}

}  // namespace prosoref
