#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace icld {

bool is_word_char(char c);   // ASCII alphanumeric
bool is_token_char(char c);  // ASCII alphanumeric or '-'

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string lower_trim(std::string_view s);

// lower_trim plus stripping the surrounding punctuation set .,:;!?"'
// This is the normalization applied to label surfaces before exact matching.
std::string normalize_label_surface(std::string_view s);

// Copy with every '-' removed; second-pass text for label-space evidence.
std::string strip_hyphens(std::string_view s);

// FNV-1a, 64-bit, fixed offset basis. Trigram hashing and content
// fingerprints both use this hash.
std::uint64_t fnv1a64(std::string_view s);

std::string to_hex(std::uint64_t v);

}  // namespace icld
