#pragma once

// Minimal RFC 4180 reading and writing plus the number formats used in the
// data files and reports.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace examweight::csv {

struct Row {
  std::size_t line = 0;  // 1-based line in the file
  std::vector<std::string> fields;
};

struct Document {
  std::string path;
  std::vector<std::string> header;
  std::size_t header_line = 1;
  std::vector<Row> rows;  // blank lines dropped
};

/// Throws DataError("path:line: ...") on unterminated quotes or ragged rows.
Document parse(std::string_view text, const std::string& path);
Document read_file(const std::string& path);

/// "path:line:column" with a 1-based column.
std::string location(const std::string& path, std::size_t line, std::size_t column);

/// Strict decimal parse of the whole field; no thousands separators.
std::optional<double> parse_real(std::string_view field);

/// Shortest text that reads back to the same double.
std::string format_real(double v);
/// Fixed notation with `digits` decimals; negative zero prints as zero.
std::string format_fixed(double v, int digits);

/// Quote the field if it contains a comma, quote or newline.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace examweight::csv
