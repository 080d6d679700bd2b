#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icld/corpus.hpp"
#include "icld/model.hpp"
#include "icld/schema.hpp"

namespace icld {

enum class Category { OOS, ISOOF, ISIF };

std::string to_string(Category category);
Category category_from_string(const std::string& s);

struct Categorization {
    Category category = Category::OOS;
    // The three optionals are present exactly when category is ISIF.
    std::optional<CanonicalLabel> extracted_label;
    std::optional<std::size_t> match_position;
    std::optional<bool> correct;

    bool is_isif() const { return category == Category::ISIF; }
    bool is_correct() const { return correct.value_or(false); }
};

struct PatternMatch {
    CanonicalLabel label;
    std::size_t position = 0;
    std::size_t length = 0;
};

// Earliest word-boundary occurrence of any format pattern in the lowercased
// text; at equal positions the longest pattern wins.  A boundary here means
// the adjacent character is neither alphanumeric nor a hyphen, so
// "no-entailment" does not register the pattern "entailment".
std::optional<PatternMatch> find_format_match(const TaskSchema& schema, std::string_view text);

// Whether the text references the label space at all: any label value or
// synonym occurs with alphanumeric-only boundaries (a hyphen neighbor counts
// as a boundary, catching "no-entailment"), or occurs after stripping hyphens
// from both sides (catching split-ups like "posi-tive").
bool has_space_evidence(const TaskSchema& schema, std::string_view text);

// Format pattern found -> ISIF (correct iff extracted = gold); else space
// evidence -> ISOOF; else OOS.
Categorization categorize_text(const TaskSchema& schema, std::string_view text,
                               const CanonicalLabel& gold);

// As categorize_text, with responses flagged as refusals forced to OOS.
Categorization categorize_classification(const TaskSchema& schema, const ModelResponse& response,
                                         const CanonicalLabel& gold);

enum class PairCategory {
    IFOOS,                       // parseable pair, label outside the space
    ISIF_wrong_span,             // label in space, span matches no gold span
    ISIF_right_span_wrong_label, // span matches, label differs from gold
    ISIF_true_positive,          // span and label both match
};

std::string to_string(PairCategory category);

struct CategorizedPair {
    SpanLabelPair pair;                       // span and label surface as parsed
    std::optional<CanonicalLabel> canonical;  // absent exactly for IFOOS
    PairCategory category = PairCategory::IFOOS;
};

struct SeqCategorization {
    bool oof = false;  // no line of the response parsed as a span-label form
    std::vector<CategorizedPair> pairs;
    std::size_t gold_pair_count = 0;  // carried along for downstream F1 deltas
};

// Extracts span-label pairs from the closed set of line templates:
//   Entity: <span> | Type: <label>
//   Aspect Term: <span>, Sentiment: <label>
//   <label>: <span1>, <span2>          (short label head; "none" = no spans)
//   <span> (<label>)                   (comma-separated repetitions allowed)
// Leading list bullets ("-", "*", "1.", "2)") are stripped.  A line reading
// just "none" parses to zero pairs.  *parsed_any reports whether any line
// parsed at all.
std::vector<SpanLabelPair> parse_span_pairs(std::string_view response, bool* parsed_any = nullptr);

SeqCategorization categorize_sequence(const TaskSchema& schema, const ModelResponse& response,
                                      const std::vector<SpanLabelPair>& gold);

}  // namespace icld
