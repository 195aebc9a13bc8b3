#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pressmap::text {

/// Splits on a single delimiter; empty fields are preserved.
std::vector<std::string_view> split(std::string_view line, char delim = ',');

std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

/// Reads the next line, stripping a trailing '\r'. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

std::string join(const std::vector<std::string>& parts, char delim = ',');

}  // namespace pressmap::text
