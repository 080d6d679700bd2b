#include "icld/text.hpp"

#include <array>
#include <cctype>

namespace icld {

namespace {

bool is_surface_punct(char c) {
    switch (c) {
        case '.': case ',': case ':': case ';': case '!': case '?':
        case '"': case '\'':
            return true;
        default:
            return false;
    }
}

}  // namespace

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_token_char(char c) { return is_word_char(c) || c == '-'; }

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string lower_trim(std::string_view s) { return to_lower(trim(s)); }

std::string normalize_label_surface(std::string_view s) {
    std::string t = lower_trim(s);
    std::size_t b = 0;
    std::size_t e = t.size();
    while (b < e && is_surface_punct(t[b])) ++b;
    while (e > b && is_surface_punct(t[e - 1])) --e;
    // punctuation stripping can expose more whitespace
    return trim(std::string_view(t).substr(b, e - b));
}

std::string strip_hyphens(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (c != '-') out.push_back(c);
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

}  // namespace icld
