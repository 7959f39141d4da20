#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cohortlens::csv {

/// Splits RFC-4180-ish text into records. Accepts `\n` and `\r\n` line ends,
/// double-quoted fields with `""` escapes, and skips blank lines. Each record
/// keeps its 1-based source line.
struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Throws cohortlens::Error(MalformedCsv) on an unterminated quote.
std::vector<Record> read(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace cohortlens::csv
