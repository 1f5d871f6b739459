#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mpo {

std::string trim(std::string_view s);

/// Splits on '\n'; a trailing newline does not produce an empty last element.
std::vector<std::string> split_lines(std::string_view s);

/// Lowercased whitespace-delimited tokens (the ROUGE tokenization).
std::vector<std::string> tokenize_lower(std::string_view s);

/// Whitespace-delimited token count.
std::size_t word_count(std::string_view s);

/// Collapses interior whitespace runs to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view s);

/// Replaces every "{{key}}" with its value. Unknown placeholders are left
/// in place so callers can detect them.
std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& values);

bool contains(std::string_view haystack, std::string_view needle);

/// FNV-1a 64-bit digest, rendered as 16 lowercase hex characters. Stable
/// across runs and platforms; used to key scripted judge responses.
std::string fnv1a_hex(std::string_view data);

/// Shortest round-trippable decimal rendering of a double ("%.17g" pruned),
/// used everywhere a float enters a CSV or JSON artifact so that identical
/// runs produce identical bytes.
std::string format_double(double v);

}  // namespace mpo
