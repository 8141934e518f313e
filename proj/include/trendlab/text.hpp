#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trendlab {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace trendlab
