#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spinach::text {

std::string_view trim(std::string_view s);

/// Collapses every run of whitespace to a single space and trims both ends.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view s);

} // namespace spinach::text
