// Copyright 2026 The simpop Authors
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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simpop::text {

/// Reads a whole file. Paths ending in ".gz" are inflated with zlib.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
/// Returns false on an unterminated quote.
bool split_csv(std::string_view line, std::vector<std::string>& fields);
std::string csv_escape(std::string_view field);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

/// Iterates '\n'-separated lines of a buffer, dropping a trailing '\r'.
class LineCursor {
public:
    explicit LineCursor(std::string_view buffer) : rest_(buffer) {}
    bool next(std::string_view& line);
    std::size_t line_number() const noexcept { return line_; }

private:
    std::string_view rest_;
    std::size_t line_ = 0;
    bool done_ = false;
};

} // namespace simpop::text
