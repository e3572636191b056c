#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chemprompt {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Collapses runs of whitespace to single spaces and trims; used to compare
// answer payloads for voting.
std::string normalize_ws(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

// Shortest fixed-point rendering: integral values print without a decimal
// point, otherwise %.6f with trailing zeros stripped. 151.162 -> "151.162",
// 0.060 -> "0.06", 3 -> "3".
std::string format_value(double v);

// Fixed decimal count, for option grids where every value must share one
// width: format_decimals(4.7, 2) -> "4.70".
std::string format_decimals(double v, int decimals);

}  // namespace chemprompt
