#include "otpmart/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "otpmart/errors.hpp"

namespace otp {

namespace {

bool needs_quoting(const std::string& field) {
  return field.find_first_of(",\"\n\r") != std::string::npos;
}

}  // namespace

std::vector<CsvRow> csv_read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r':
        break;  // tolerate CRLF
      case '\n':
        if (row_started || !field.empty()) {
          row.push_back(std::move(field));
          field.clear();
          rows.push_back(std::move(row));
          row.clear();
          row_started = false;
        }
        break;
      default:
        field += c;
        row_started = true;
        break;
    }
  }
  if (in_quotes) {
    throw ParseError(path.string() + ": unterminated quoted field");
  }
  if (row_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_format_row(const CsvRow& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    const std::string& f = row[i];
    if (needs_quoting(f)) {
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += f;
    }
  }
  return out;
}

void csv_write_file(const std::filesystem::path& path,
                    const CsvRow& header,
                    const std::vector<CsvRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << csv_format_row(header) << '\n';
  for (const auto& row : rows) out << csv_format_row(row) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string format_days_field(std::int64_t seconds) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", seconds_to_days(seconds));
  return buf;
}

std::string format_days_field(std::optional<std::int64_t> seconds) {
  return seconds ? format_days_field(*seconds) : std::string{};
}

std::int64_t parse_days_field(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError("malformed day value '" + s + "'");
  }
  return days_to_seconds(v);
}

std::optional<std::int64_t> parse_opt_days_field(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_days_field(s);
}

std::string format_timestamp_field(std::optional<Timestamp> t) {
  return t ? t->to_string() : std::string{};
}

long long parse_int_field(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError("malformed integer '" + s + "'");
  }
  return v;
}

std::optional<int> parse_opt_flag_field(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return int(parse_int_field(s));
}

}  // namespace otp
