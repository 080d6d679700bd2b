#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace icld {

enum class TaskKind { classification, sequence_labeling, generation };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

// A label value: lower-cased, trimmed, unique within its schema.
struct CanonicalLabel {
    std::string value;
    auto operator<=>(const CanonicalLabel&) const = default;
};

struct CueSentences {
    std::string before;
    std::string after;
    bool operator==(const CueSentences&) const = default;
};

// One task's ground truth for post-processing: the label space, the surface
// patterns recognized per label, broad-sense synonyms, and the prompt
// templates. Immutable after load; safe to share across threads.
struct TaskSchema {
    std::string task_id;
    TaskKind task_kind = TaskKind::classification;
    std::vector<CanonicalLabel> labels;
    std::map<CanonicalLabel, std::vector<std::string>> format_patterns;
    std::map<std::string, CanonicalLabel> synonyms;
    std::string instruction;
    std::optional<std::string> detailed_instruction;
    std::string demo_template;
    std::optional<CueSentences> cue_sentences;

    bool operator==(const TaskSchema&) const = default;

    bool has_label(std::string_view value) const;
    // First configured pattern of a label; the conventional verbalizer.
    const std::string& first_pattern_of(const CanonicalLabel& label) const;
};

// Throws ValidationError naming the first violated invariant.
void validate_schema(const TaskSchema& schema);

TaskSchema schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const TaskSchema& schema);

// Parses and validates a schema file (UTF-8 JSON, one task per file).
TaskSchema load_schema(const std::string& path);
void save_schema(const TaskSchema& schema, const std::string& path);

// Exact match of the normalized surface against format patterns, then
// synonyms. Absence is a value, not an error.
std::optional<CanonicalLabel> canonicalize(const TaskSchema& schema, std::string_view surface);

}  // namespace icld
