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

#ifndef PROSOREF_TEXT_FORMAT_H_
#define PROSOREF_TEXT_FORMAT_H_

// Small helpers shared by the plain-text readers and writers.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prosoref {

// Shortest decimal that parses back to the same double.
std::string FormatShortest(double value);

// Fixed-point with `decimals` digits after the point.
std::string FormatFixed(double value, int decimals);

std::optional<double> ParseDouble(std::string_view text);
std::optional<long long> ParseInt(std::string_view text);

std::vector<std::string_view> SplitFields(std::string_view line, char sep);

// Splits on '\n', dropping a trailing '\r' from each line. The final
// empty piece after a terminating newline is not returned.
std::vector<std::string_view> SplitLines(std::string_view text);

std::string_view Trim(std::string_view s);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);

}  // namespace prosoref

#endif  // PROSOREF_TEXT_FORMAT_H_
