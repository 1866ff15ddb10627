#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "otpmart/timestamp.hpp"

namespace otp {

using CsvRow = std::vector<std::string>;

// RFC-4180-style: comma separated, double-quote escaping ("" inside quoted
// fields), "\n" record separator on write, "\r\n" tolerated on read.

// Reads the whole file, header row included. Throws IoError if the file
// cannot be opened, ParseError on structural damage (unterminated quote).
std::vector<CsvRow> csv_read_file(const std::filesystem::path& path);

std::string csv_format_row(const CsvRow& row);

// Writes header + rows. Throws IoError when the destination is unwritable.
void csv_write_file(const std::filesystem::path& path,
                    const CsvRow& header,
                    const std::vector<CsvRow>& rows);

// --- field codecs shared by source and mart IO ---------------------------

// Whole-second duration rendered as fractional days, 6 decimals.
std::string format_days_field(std::int64_t seconds);
std::string format_days_field(std::optional<std::int64_t> seconds);  // "" when absent

// Parses a fractional-day field back to whole seconds (nearest second).
std::int64_t parse_days_field(const std::string& s);
std::optional<std::int64_t> parse_opt_days_field(const std::string& s);

std::string format_timestamp_field(std::optional<Timestamp> t);  // "" when absent

long long parse_int_field(const std::string& s);
std::optional<int> parse_opt_flag_field(const std::string& s);  // "" -> absent

}  // namespace otp
