// Copyright 2026 The DHM Authors.
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

// Small text helpers shared by the file readers and writers.

#ifndef DHM_TEXT_H_
#define DHM_TEXT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dhm {

// 17 significant digits; parses back to the identical double.
std::string FormatDouble(double v);

// Shortest form that round-trips. Used for report output.
std::string FormatShort(double v);

// Strict parse: the whole (trimmed) field must be a finite or infinite
// decimal number. Returns nullopt on any trailing garbage.
std::optional<double> ParseDouble(std::string_view s);
std::optional<long long> ParseInt(std::string_view s);

std::string_view Trim(std::string_view s);

// Splits on `sep`; no quoting support (none of the formats need it).
std::vector<std::string> Split(std::string_view line, char sep);

// Splits on runs of blanks.
std::vector<std::string> SplitWhitespace(std::string_view line);

// Reads a whole file into lines, stripping '\r'. Throws DataError if the
// file cannot be opened.
std::vector<std::string> ReadLines(const std::string& path);

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// Parses `key = value` lines; blank lines and lines starting with '#' are
// skipped. DataError (with source:line) for a malformed or repeated key.
std::vector<KeyValue> ParseKeyValues(const std::vector<std::string>& lines,
                                     const std::string& source);

// Writes `content` to `path`, throwing DataError on failure.
void WriteFile(const std::string& path, const std::string& content);

}  // namespace dhm

#endif  // DHM_TEXT_H_
