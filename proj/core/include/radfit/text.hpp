#pragma once

#include <string>
#include <vector>

namespace radfit {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Strict full-string double parse; throws ParseError on failure.
double parse_double(const std::string& text);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace radfit
