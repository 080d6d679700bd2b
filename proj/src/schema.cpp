#include "icld/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "icld/errors.hpp"
#include "icld/text.hpp"

namespace icld {

using nlohmann::json;

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::classification: return "classification";
        case TaskKind::sequence_labeling: return "sequence_labeling";
        case TaskKind::generation: return "generation";
    }
    return "classification";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "classification") return TaskKind::classification;
    if (s == "sequence_labeling") return TaskKind::sequence_labeling;
    if (s == "generation") return TaskKind::generation;
    throw ParseError("unknown task_kind: " + s);
}

bool TaskSchema::has_label(std::string_view value) const {
    for (const auto& l : labels)
        if (l.value == value) return true;
    return false;
}

const std::string& TaskSchema::first_pattern_of(const CanonicalLabel& label) const {
    auto it = format_patterns.find(label);
    if (it == format_patterns.end() || it->second.empty())
        throw ValidationError("label has no format pattern: " + label.value);
    return it->second.front();
}

void validate_schema(const TaskSchema& schema) {
    if (schema.task_id.empty()) throw ValidationError("task_id is empty");

    if (schema.task_kind == TaskKind::generation) {
        if (!schema.labels.empty())
            throw ValidationError("labels must be empty for generation tasks");
    } else if (schema.labels.empty()) {
        throw ValidationError("labels is empty for a " + to_string(schema.task_kind) + " task");
    }

    std::set<std::string> seen;
    for (const auto& l : schema.labels) {
        if (l.value.empty()) throw ValidationError("empty canonical label");
        if (l.value != normalize_label_surface(l.value))
            throw ValidationError("label not in canonical form: '" + l.value + "'");
        if (!seen.insert(l.value).second)
            throw ValidationError("duplicate label: " + l.value);
    }

    // Every label needs at least one pattern; no pattern under two labels.
    std::map<std::string, std::string> pattern_owner;
    for (const auto& l : schema.labels) {
        auto it = schema.format_patterns.find(l);
        if (it == schema.format_patterns.end() || it->second.empty())
            throw ValidationError("label has no format pattern: " + l.value);
        for (const auto& p : it->second) {
            if (p.empty()) throw ValidationError("empty format pattern under label " + l.value);
            auto [owner, inserted] = pattern_owner.emplace(p, l.value);
            if (!inserted && owner->second != l.value)
                throw ValidationError("pattern '" + p + "' appears under labels " +
                                      owner->second + " and " + l.value);
            if (!inserted && owner->second == l.value)
                throw ValidationError("duplicate pattern '" + p + "' under label " + l.value);
        }
    }
    for (const auto& [label, patterns] : schema.format_patterns) {
        if (!schema.has_label(label.value))
            throw ValidationError("format_patterns entry for unknown label: " + label.value);
        (void)patterns;
    }

    for (const auto& [surface, target] : schema.synonyms) {
        if (surface.empty()) throw ValidationError("empty synonym surface");
        if (!schema.has_label(target.value))
            throw ValidationError("synonym target not in labels: " + target.value);
    }

    if (schema.demo_template.empty()) throw ValidationError("demo_template is empty");
}

TaskSchema schema_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("schema document is not a JSON object");
    TaskSchema s;
    try {
        s.task_id = doc.at("task_id").get<std::string>();
        s.task_kind = task_kind_from_string(doc.at("task_kind").get<std::string>());
        for (const auto& l : doc.value("labels", json::array()))
            s.labels.push_back({normalize_label_surface(l.get<std::string>())});
        if (doc.contains("format_patterns")) {
            for (const auto& [label, patterns] : doc.at("format_patterns").items()) {
                std::vector<std::string> normed;
                for (const auto& p : patterns)
                    normed.push_back(normalize_label_surface(p.get<std::string>()));
                s.format_patterns[{normalize_label_surface(label)}] = std::move(normed);
            }
        }
        if (doc.contains("synonyms")) {
            for (const auto& [surface, target] : doc.at("synonyms").items())
                s.synonyms[normalize_label_surface(surface)] = {
                    normalize_label_surface(target.get<std::string>())};
        }
        s.instruction = doc.value("instruction", "");
        if (doc.contains("detailed_instruction") && !doc.at("detailed_instruction").is_null())
            s.detailed_instruction = doc.at("detailed_instruction").get<std::string>();
        s.demo_template = doc.value("demo_template", "");
        if (doc.contains("cue_sentences") && !doc.at("cue_sentences").is_null()) {
            const auto& c = doc.at("cue_sentences");
            s.cue_sentences = CueSentences{c.at("before").get<std::string>(),
                                           c.at("after").get<std::string>()};
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed schema: ") + e.what());
    }
    validate_schema(s);
    return s;
}

json schema_to_json(const TaskSchema& s) {
    json doc;
    doc["task_id"] = s.task_id;
    doc["task_kind"] = to_string(s.task_kind);
    json labels = json::array();
    for (const auto& l : s.labels) labels.push_back(l.value);
    doc["labels"] = labels;
    json patterns = json::object();
    for (const auto& [label, ps] : s.format_patterns) patterns[label.value] = ps;
    doc["format_patterns"] = patterns;
    json synonyms = json::object();
    for (const auto& [surface, target] : s.synonyms) synonyms[surface] = target.value;
    doc["synonyms"] = synonyms;
    doc["instruction"] = s.instruction;
    if (s.detailed_instruction) doc["detailed_instruction"] = *s.detailed_instruction;
    doc["demo_template"] = s.demo_template;
    if (s.cue_sentences)
        doc["cue_sentences"] = {{"before", s.cue_sentences->before},
                                {"after", s.cue_sentences->after}};
    return doc;
}

TaskSchema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open schema file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("schema file " + path + ": " + e.what());
    }
    return schema_from_json(doc);
}

void save_schema(const TaskSchema& schema, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write schema file: " + path);
    out << schema_to_json(schema).dump(2) << '\n';
}

std::optional<CanonicalLabel> canonicalize(const TaskSchema& schema, std::string_view surface) {
    const std::string key = normalize_label_surface(surface);
    if (key.empty()) return std::nullopt;
    for (const auto& [label, patterns] : schema.format_patterns)
        for (const auto& p : patterns)
            if (p == key) return label;
    // Label values are in-space by definition even when not listed as patterns.
    for (const auto& label : schema.labels)
        if (label.value == key) return label;
    if (auto it = schema.synonyms.find(key); it != schema.synonyms.end()) return it->second;
    return std::nullopt;
}

}  // namespace icld
