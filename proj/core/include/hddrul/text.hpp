#pragma once

#include <chrono>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hddrul {

using Day = std::chrono::sys_days;

// Strict YYYY-MM-DD. Returns nullopt for anything else, including
// out-of-range calendar dates.
std::optional<Day> parse_date(std::string_view text);
std::string format_date(Day day);

// Splits one CSV line. Handles double-quoted fields with "" escapes and
// strips a trailing CR.
std::vector<std::string> split_csv_line(std::string_view line);

// Reads the next non-empty line; false at end of stream.
bool next_line(std::istream& in, std::string& line);

// Shortest decimal text that round-trips through strtod (17 significant
// digits, %.17g).
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace hddrul
