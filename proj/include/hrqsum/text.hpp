#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hrqsum {

// Lowercased word tokens. ASCII letters and digits and any non-ASCII code
// point outside the Unicode whitespace/punctuation ranges form words;
// everything else separates tokens and is dropped.
std::vector<std::string> tokenize(std::string_view text);

// Adjacent token pairs joined by a single space.
std::vector<std::string> bigrams(const std::vector<std::string>& tokens);

// Splits after '.', '!' or '?' when followed by whitespace. Segments are
// trimmed and never empty.
std::vector<std::string> segment(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace hrqsum
