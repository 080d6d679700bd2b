#include "icld/categorize.hpp"

#include <algorithm>
#include <cctype>

#include "icld/errors.hpp"
#include "icld/text.hpp"

namespace icld {

std::string to_string(Category category) {
    switch (category) {
        case Category::OOS: return "OOS";
        case Category::ISOOF: return "ISOOF";
        case Category::ISIF: return "ISIF";
    }
    throw ConfigError("unknown category");
}

Category category_from_string(const std::string& s) {
    if (s == "OOS") return Category::OOS;
    if (s == "ISOOF") return Category::ISOOF;
    if (s == "ISIF") return Category::ISIF;
    throw ConfigError("unknown category: " + s);
}

std::string to_string(PairCategory category) {
    switch (category) {
        case PairCategory::IFOOS: return "IFOOS";
        case PairCategory::ISIF_wrong_span: return "ISIF_wrong_span";
        case PairCategory::ISIF_right_span_wrong_label: return "ISIF_right_span_wrong_label";
        case PairCategory::ISIF_true_positive: return "ISIF_true_positive";
    }
    throw ConfigError("unknown pair category");
}

namespace {

// Format matching treats hyphens as part of a token so that a pattern never
// fires inside a hyphenated variant; space-evidence matching treats hyphens
// as boundaries so those same variants still count as in-space.
bool boundary_ok(const std::string& text, std::size_t pos, std::size_t len,
                 bool (*is_inner)(char)) {
    bool left = pos == 0 || !is_inner(text[pos - 1]);
    bool right = pos + len == text.size() || !is_inner(text[pos + len]);
    return left && right;
}

// Earliest occurrence of needle in haystack passing the boundary test, or npos.
std::size_t find_bounded(const std::string& haystack, const std::string& needle,
                         bool (*is_inner)(char)) {
    if (needle.empty()) return std::string::npos;
    for (auto pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1)) {
        if (boundary_ok(haystack, pos, needle.size(), is_inner)) return pos;
    }
    return std::string::npos;
}

}  // namespace

std::optional<PatternMatch> find_format_match(const TaskSchema& schema, std::string_view text) {
    std::string lowered = to_lower(text);
    std::optional<PatternMatch> best;
    for (const auto& [label, patterns] : schema.format_patterns) {
        for (const auto& pattern : patterns) {
            auto pos = find_bounded(lowered, pattern, is_token_char);
            if (pos == std::string::npos) continue;
            if (!best || pos < best->position ||
                (pos == best->position && pattern.size() > best->length))
                best = PatternMatch{label, pos, pattern.size()};
        }
    }
    return best;
}

bool has_space_evidence(const TaskSchema& schema, std::string_view text) {
    std::string lowered = to_lower(text);
    std::vector<std::string> needles;
    for (const auto& label : schema.labels) needles.push_back(label.value);
    for (const auto& [surface, target] : schema.synonyms) needles.push_back(surface);

    for (const auto& needle : needles)
        if (find_bounded(lowered, needle, is_word_char) != std::string::npos) return true;

    // Second pass with hyphens stripped from both sides, so "posi-tive" still
    // counts as evidence for "positive".
    std::string joined = strip_hyphens(lowered);
    for (const auto& needle : needles) {
        std::string stripped = strip_hyphens(needle);
        if (find_bounded(joined, stripped, is_word_char) != std::string::npos) return true;
    }
    return false;
}

Categorization categorize_text(const TaskSchema& schema, std::string_view text,
                               const CanonicalLabel& gold) {
    Categorization out;
    if (auto match = find_format_match(schema, text)) {
        out.category = Category::ISIF;
        out.extracted_label = match->label;
        out.match_position = match->position;
        out.correct = (match->label == gold);
        return out;
    }
    out.category = has_space_evidence(schema, text) ? Category::ISOOF : Category::OOS;
    return out;
}

Categorization categorize_classification(const TaskSchema& schema, const ModelResponse& response,
                                         const CanonicalLabel& gold) {
    if (schema.task_kind != TaskKind::classification)
        throw ValidationError("categorize_classification requires a classification schema");
    if (response.refusal) return Categorization{};  // refusals are OOS
    return categorize_text(schema, response.text, gold);
}

namespace {

bool istarts_with(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    return true;
}

std::string_view strip_bullet(std::string_view line) {
    if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ')
        return line.substr(2);
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        std::size_t rest = i + 1;
        if (rest == line.size() || line[rest] == ' ') return line.substr(rest);
    }
    return line;
}

void push_pair(std::vector<SpanLabelPair>& out, std::string span, std::string label_surface) {
    SpanLabelPair pair;
    pair.span = std::move(span);
    pair.label = CanonicalLabel{normalize_label_surface(label_surface)};
    out.push_back(std::move(pair));
}

// None-equivalents: format-compliant ways of predicting no entities.
bool is_none_line(const std::string& lower) {
    return lower == "none" || lower == "none." || lower == "no entities" ||
           lower == "no entities." || lower == "no aspect terms" || lower == "no aspect terms.";
}

// "Entity: <span> | Type: <label>"
bool parse_entity_type(const std::string& line, std::vector<SpanLabelPair>& out) {
    if (!istarts_with(line, "entity:")) return false;
    auto bar = line.find('|');
    if (bar == std::string::npos) return false;
    std::string span = trim(line.substr(7, bar - 7));
    std::string right = trim(line.substr(bar + 1));
    if (!istarts_with(right, "type:")) return false;
    std::string label = trim(right.substr(5));
    if (span.empty() || label.empty()) return false;
    push_pair(out, std::move(span), std::move(label));
    return true;
}

// "Aspect Term: <span>, Sentiment: <label>"
bool parse_aspect_sentiment(const std::string& line, std::vector<SpanLabelPair>& out) {
    if (!istarts_with(line, "aspect term:")) return false;
    std::string rest = trim(line.substr(12));
    // Find the last ", sentiment:" so spans containing commas survive.
    std::size_t cut = std::string::npos;
    for (std::size_t i = rest.size(); i-- > 0;) {
        if (rest[i] == ',' && istarts_with(std::string_view(rest).substr(i + 1), " sentiment:")) {
            cut = i;
            break;
        }
    }
    if (cut == std::string::npos) return false;
    std::string span = trim(rest.substr(0, cut));
    std::string label = trim(rest.substr(cut + 12));
    if (span.empty() || label.empty()) return false;
    push_pair(out, std::move(span), std::move(label));
    return true;
}

bool plausible_label_head(const std::string& head) {
    if (head.empty() || head.size() > 40) return false;
    std::size_t words = 1;
    for (char c : head) {
        if (c == ' ') {
            ++words;
            continue;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '&') continue;
        return false;
    }
    return words <= 3;  // label names are short; longer heads are prose
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto comma = s.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(trim(s.substr(start)));
            return parts;
        }
        parts.push_back(trim(s.substr(start, comma - start)));
        start = comma + 1;
    }
}

// "<label>: <span1>, <span2>" — label heads are short and word-like; "none"
// after the colon means the class has no spans.
bool parse_label_heads(const std::string& line, std::vector<SpanLabelPair>& out) {
    auto colon = line.find(':');
    if (colon == std::string::npos) return false;
    std::string head = trim(line.substr(0, colon));
    if (!plausible_label_head(head)) return false;
    std::string tail = trim(line.substr(colon + 1));
    if (tail.empty()) return false;
    if (is_none_line(to_lower(tail))) return true;  // parsed, zero pairs
    for (auto& span : split_commas(tail)) {
        if (span.empty()) return false;
        push_pair(out, std::move(span), head);
    }
    return true;
}

// "<span> (<label>)", optionally comma-separated: "Japan (location), Tokyo (location)"
bool parse_span_paren(const std::string& line, std::vector<SpanLabelPair>& out) {
    std::vector<SpanLabelPair> parsed;
    for (const auto& segment : split_commas(line)) {
        if (segment.size() < 4 || segment.back() != ')') return false;
        auto open = segment.rfind('(');
        if (open == std::string::npos || open == 0) return false;
        std::string span = trim(segment.substr(0, open));
        std::string label = trim(segment.substr(open + 1, segment.size() - open - 2));
        if (span.empty() || label.empty()) return false;
        push_pair(parsed, std::move(span), std::move(label));
    }
    if (parsed.empty()) return false;
    out.insert(out.end(), parsed.begin(), parsed.end());
    return true;
}

}  // namespace

std::vector<SpanLabelPair> parse_span_pairs(std::string_view response, bool* parsed_any) {
    std::vector<SpanLabelPair> out;
    bool any = false;
    std::size_t start = 0;
    while (start <= response.size()) {
        auto nl = response.find('\n', start);
        std::string_view raw = nl == std::string_view::npos
                                   ? response.substr(start)
                                   : response.substr(start, nl - start);
        std::string line = trim(strip_bullet(trim(raw)));
        if (!line.empty()) {
            if (is_none_line(to_lower(line))) {
                any = true;
            } else {
                any = parse_entity_type(line, out) || parse_aspect_sentiment(line, out) ||
                      parse_label_heads(line, out) || parse_span_paren(line, out) || any;
            }
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (parsed_any) *parsed_any = any;
    return out;
}

SeqCategorization categorize_sequence(const TaskSchema& schema, const ModelResponse& response,
                                      const std::vector<SpanLabelPair>& gold) {
    if (schema.task_kind != TaskKind::sequence_labeling)
        throw ValidationError("categorize_sequence requires a sequence_labeling schema");
    SeqCategorization out;
    out.gold_pair_count = gold.size();
    if (response.refusal) {
        out.oof = true;
        return out;
    }
    bool parsed_any = false;
    auto parsed = parse_span_pairs(response.text, &parsed_any);
    out.oof = !parsed_any;
    for (auto& pair : parsed) {
        CategorizedPair cp;
        cp.pair = pair;
        auto canon = canonicalize(schema, pair.label.value);
        if (!canon.has_value()) {
            cp.category = PairCategory::IFOOS;
        } else {
            cp.canonical = canon;
            bool span_hit = false;
            bool exact_hit = false;
            std::string span = trim(pair.span);
            for (const auto& g : gold) {
                if (trim(g.span) != span) continue;
                span_hit = true;
                if (g.label == *canon) exact_hit = true;
            }
            if (!span_hit)
                cp.category = PairCategory::ISIF_wrong_span;
            else
                cp.category = exact_hit ? PairCategory::ISIF_true_positive
                                        : PairCategory::ISIF_right_span_wrong_label;
        }
        out.pairs.push_back(std::move(cp));
    }
    return out;
}

}  // namespace icld
