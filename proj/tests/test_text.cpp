#include <doctest.h>

#include <string>

#include "icld/text.hpp"

using namespace icld;

TEST_SUITE("text") {

TEST_CASE("character classes") {
    CHECK(is_word_char('a'));
    CHECK(is_word_char('Z'));
    CHECK(is_word_char('7'));
    CHECK_FALSE(is_word_char('-'));
    CHECK_FALSE(is_word_char(' '));
    CHECK_FALSE(is_word_char('.'));

    CHECK(is_token_char('a'));
    CHECK(is_token_char('-'));
    CHECK_FALSE(is_token_char(' '));
    CHECK_FALSE(is_token_char('_'));
}

TEST_CASE("trim and lowercasing") {
    CHECK(trim("  x  ") == "x");
    CHECK(trim("\t\nfoo bar \r") == "foo bar");
    CHECK(trim("") == "");
    CHECK(trim("   ") == "");
    CHECK(to_lower("AbC-9") == "abc-9");
    CHECK(lower_trim("  The Answer ") == "the answer");
}

TEST_CASE("label surface normalization strips edge punctuation") {
    CHECK(normalize_label_surface("Positive.") == "positive");
    CHECK(normalize_label_surface("  \"Negative\"  ") == "negative");
    CHECK(normalize_label_surface("'neutral',") == "neutral");
    CHECK(normalize_label_surface("non-entailment") == "non-entailment");
    // interior punctuation survives
    CHECK(normalize_label_surface("sci.tech") == "sci.tech");
    // stripping can expose whitespace that must also go
    CHECK(normalize_label_surface("! positive !") == "positive");
}

TEST_CASE("hyphen stripping") {
    CHECK(strip_hyphens("non-entailment") == "nonentailment");
    CHECK(strip_hyphens("--a--b--") == "ab");
    CHECK(strip_hyphens("plain") == "plain");
    CHECK(strip_hyphens("") == "");
}

// Frozen FNV-1a 64-bit vectors; the empty string is the offset basis and the
// rest match the widely published test values.
TEST_CASE("fnv1a64 reference outputs") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("hello") == 0xa430d84680aabd0bULL);
    CHECK(fnv1a64("abc") == 0xe71fa2190541574bULL);
}

TEST_CASE("to_hex renders fixed-width lowercase") {
    CHECK(to_hex(0) == "0000000000000000");
    CHECK(to_hex(0xdeadbeefULL) == "00000000deadbeef");
    CHECK(to_hex(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

}  // TEST_SUITE
