#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icld/corpus.hpp"
#include "icld/schema.hpp"
#include "icld/select.hpp"

namespace icld {

// Cue sentences used when a schema does not configure its own.
inline constexpr const char* kDefaultCueBefore = "Following are a few demonstrations.";
inline constexpr const char* kDefaultCueAfter =
    "End of demonstrations. Please answer the following question.";

enum class PromptVariant { zero_shot, di, icl, di_plus_icl };

std::string to_string(PromptVariant variant);
PromptVariant variant_from_string(const std::string& s);
// icl and di_plus_icl consume demonstrations; zero_shot and di do not.
bool variant_uses_demos(PromptVariant variant);

enum class SystemUserSplit { system_carries_demos, single_message };

struct PromptSpec {
    PromptVariant variant = PromptVariant::zero_shot;
    std::size_t k = 0;  // must be 0 exactly for zero_shot/di
    bool use_cue_sentences = false;
    SystemUserSplit system_user_split = SystemUserSplit::single_message;
};

enum class Role { system, user };

struct Message {
    Role role;
    std::string content;
};

struct Prompt {
    std::vector<Message> messages;
};

// Expands {name} placeholders against the bindings; unknown or unclosed
// placeholders raise TemplateError.
std::string expand_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& bindings);

// How a presented label appears in prompt text: the canonical value for
// classification, "span (label)" pairs joined by ", " (or "none") for
// sequence labeling, the first reference verbatim for generation.
std::string render_label_text(const GoldTarget& target);

// demo_template with {input}, {label}, and per-field placeholders filled in.
std::string render_demonstration(const TaskSchema& schema, const Demonstration& demo);

// Same template with an empty label slot, prompting the model to fill it.
std::string render_query(const TaskSchema& schema, const Instance& query);

// Assembles instruction, optional detailed instruction, rendered demos with
// optional cue sentences, and the query, in that order.
Prompt build_prompt(const TaskSchema& schema, const PromptSpec& spec, const Instance& query,
                    const std::optional<DemoSet>& demos = std::nullopt);

// Canonical text form of a prompt (role-tagged), used for hashing.
std::string prompt_text(const Prompt& prompt);

// FNV-1a 64 over the canonical text, as 16 hex digits.
std::string prompt_hash(const Prompt& prompt);

}  // namespace icld
