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

#ifndef PROSOREF_MANIFEST_H_
#define PROSOREF_MANIFEST_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prosoref {

struct ManifestEntry {
  std::string id;
  std::filesystem::path audio;
  std::optional<std::filesystem::path> alignment;
  std::optional<std::filesystem::path> posteriorgram;
  std::string speaker;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<std::string> Speakers() const;
};

// TSV columns: id, audio, alignment, posteriorgram, speaker; an empty field
// means absent. Relative paths resolve against `base_dir`. A first line
// starting with "id<TAB>" is a header.
Manifest ParseManifest(std::string_view text, const std::filesystem::path& base_dir);

// Parses and additionally checks that every referenced file exists; all
// missing paths are reported in one kFileNotFound error.
Manifest ValidateManifest(const std::filesystem::path& path);

}  // namespace prosoref

#endif  // PROSOREF_MANIFEST_H_
