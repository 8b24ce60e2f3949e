#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gpsr::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Lower-case, trim, and collapse internal whitespace runs to one space.
std::string normalize(std::string_view s);

// Whitespace-delimited tokens.
std::vector<std::string> words(std::string_view s);
std::size_t word_count(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace gpsr::text
