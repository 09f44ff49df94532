#include "examweight/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "examweight/errors.hpp"

namespace examweight::csv {

namespace {

bool blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

std::string location(const std::string& path, std::size_t line, std::size_t column) {
  return path + ":" + std::to_string(line) + ":" + std::to_string(column);
}

Document parse(std::string_view text, const std::string& path) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  Document doc;
  doc.path = path;

  std::vector<Row> records;
  Row cur;
  cur.line = 1;
  std::string field;
  std::size_t line = 1;
  bool in_quotes = false;
  bool any = false;  // current record has content
  auto end_record = [&] {
    cur.fields.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(cur));
    cur = Row{};
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (!any) {
      cur.line = line;
      any = true;
    }
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty()) {
      in_quotes = true;
    } else if (ch == ',') {
      cur.fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled by the '\n'
    } else if (ch == '\n') {
      end_record();
      ++line;
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) throw DataError(path + ":" + std::to_string(cur.line) + ": unterminated quote");
  if (any) end_record();

  std::size_t k = 0;
  while (k < records.size() && blank(records[k].fields)) ++k;
  if (k == records.size()) throw DataError(path + ": empty file, expected a header row");
  doc.header = std::move(records[k].fields);
  doc.header_line = records[k].line;
  for (++k; k < records.size(); ++k) {
    if (blank(records[k].fields)) continue;
    if (records[k].fields.size() != doc.header.size()) {
      throw DataError(path + ":" + std::to_string(records[k].line) + ": expected " +
                      std::to_string(doc.header.size()) + " fields, found " +
                      std::to_string(records[k].fields.size()));
    }
    doc.rows.push_back(std::move(records[k]));
  }
  return doc;
}

Document read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::optional<double> parse_real(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string format_real(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  std::string s(buf, ptr);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace examweight::csv
