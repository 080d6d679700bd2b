#include "icld/prompt.hpp"

#include "icld/errors.hpp"
#include "icld/text.hpp"

namespace icld {

std::string to_string(PromptVariant variant) {
    switch (variant) {
        case PromptVariant::zero_shot: return "zero_shot";
        case PromptVariant::di: return "di";
        case PromptVariant::icl: return "icl";
        case PromptVariant::di_plus_icl: return "di_plus_icl";
    }
    throw ConfigError("unknown prompt variant");
}

PromptVariant variant_from_string(const std::string& s) {
    if (s == "zero_shot") return PromptVariant::zero_shot;
    if (s == "di") return PromptVariant::di;
    if (s == "icl") return PromptVariant::icl;
    if (s == "di_plus_icl") return PromptVariant::di_plus_icl;
    throw ConfigError("unknown prompt variant: " + s);
}

bool variant_uses_demos(PromptVariant variant) {
    return variant == PromptVariant::icl || variant == PromptVariant::di_plus_icl;
}

std::string expand_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        char c = tmpl[i];
        if (c != '{') {
            out += c;
            ++i;
            continue;
        }
        auto close = tmpl.find('}', i + 1);
        if (close == std::string::npos)
            throw TemplateError("unclosed placeholder in template: " + tmpl.substr(i));
        std::string name = tmpl.substr(i + 1, close - i - 1);
        auto it = bindings.find(name);
        if (it == bindings.end())
            throw TemplateError("unknown placeholder {" + name + "} in template");
        out += it->second;
        i = close + 1;
    }
    return out;
}

std::string render_label_text(const GoldTarget& target) {
    if (holds_label(target)) return gold_label(target).value;
    if (const auto* pairs = std::get_if<std::vector<SpanLabelPair>>(&target)) {
        if (pairs->empty()) return "none";
        std::string out;
        for (std::size_t i = 0; i < pairs->size(); ++i) {
            if (i > 0) out += ", ";
            out += (*pairs)[i].span + " (" + (*pairs)[i].label.value + ")";
        }
        return out;
    }
    const auto& refs = gold_references(target);
    if (refs.empty()) throw ValidationError("generation target has no references");
    return refs.front();
}

namespace {

std::map<std::string, std::string> bindings_for(const Instance& inst, std::string label_text) {
    std::map<std::string, std::string> bindings;
    for (const auto& [name, text] : inst.input_fields) bindings[name] = text;
    bindings["input"] = concat_fields(inst);
    bindings["label"] = std::move(label_text);
    return bindings;
}

std::string render_with_label(const TaskSchema& schema, const Instance& inst,
                              std::string label_text) {
    if (schema.demo_template.find("{label}") == std::string::npos)
        throw TemplateError("demo_template lacks the {label} placeholder");
    return expand_template(schema.demo_template, bindings_for(inst, std::move(label_text)));
}

}  // namespace

std::string render_demonstration(const TaskSchema& schema, const Demonstration& demo) {
    return render_with_label(schema, demo.source, render_label_text(demo.presented_label));
}

std::string render_query(const TaskSchema& schema, const Instance& query) {
    return render_with_label(schema, query, "");
}

Prompt build_prompt(const TaskSchema& schema, const PromptSpec& spec, const Instance& query,
                    const std::optional<DemoSet>& demos) {
    bool wants_demos = variant_uses_demos(spec.variant);
    if (wants_demos && spec.k == 0)
        throw ConfigError("variant " + to_string(spec.variant) + " requires k >= 1");
    if (!wants_demos && spec.k != 0)
        throw ConfigError("variant " + to_string(spec.variant) + " requires k = 0");
    if (wants_demos) {
        if (!demos.has_value())
            throw MissingDemosError("variant " + to_string(spec.variant) + " needs a demo set");
        if (demos->demos.size() != spec.k)
            throw MissingDemosError("demo set has " + std::to_string(demos->demos.size()) +
                                    " demos, spec asks for " + std::to_string(spec.k));
    } else if (demos.has_value()) {
        throw ConfigError("variant " + to_string(spec.variant) + " takes no demonstrations");
    }

    bool wants_di = spec.variant == PromptVariant::di || spec.variant == PromptVariant::di_plus_icl;
    std::vector<std::string> context_blocks;
    context_blocks.push_back(schema.instruction);
    if (wants_di) {
        if (!schema.detailed_instruction.has_value())
            throw ConfigError("schema " + schema.task_id + " has no detailed_instruction");
        context_blocks.push_back(*schema.detailed_instruction);
    }
    if (wants_demos) {
        std::string cue_before = kDefaultCueBefore;
        std::string cue_after = kDefaultCueAfter;
        if (schema.cue_sentences.has_value()) {
            cue_before = schema.cue_sentences->before;
            cue_after = schema.cue_sentences->after;
        }
        if (spec.use_cue_sentences) context_blocks.push_back(cue_before);
        for (const auto& demo : demos->demos)
            context_blocks.push_back(render_demonstration(schema, demo));
        if (spec.use_cue_sentences) context_blocks.push_back(cue_after);
    }

    std::string query_block = render_query(schema, query);

    Prompt prompt;
    auto join = [](const std::vector<std::string>& blocks) {
        std::string out;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (i > 0) out += "\n\n";
            out += blocks[i];
        }
        return out;
    };
    if (spec.system_user_split == SystemUserSplit::system_carries_demos) {
        prompt.messages.push_back({Role::system, join(context_blocks)});
        prompt.messages.push_back({Role::user, query_block});
    } else {
        context_blocks.push_back(query_block);
        prompt.messages.push_back({Role::user, join(context_blocks)});
    }
    return prompt;
}

std::string prompt_text(const Prompt& prompt) {
    std::string out;
    for (const auto& msg : prompt.messages) {
        out += msg.role == Role::system ? "system" : "user";
        out += '\x1f';
        out += msg.content;
        out += '\x1e';
    }
    return out;
}

std::string prompt_hash(const Prompt& prompt) { return to_hex(fnv1a64(prompt_text(prompt))); }

}  // namespace icld
