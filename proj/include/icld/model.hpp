#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icld/prompt.hpp"
#include "icld/schema.hpp"

namespace icld {

// Fixed token the synthetic model emits when it leaves the label space.
inline constexpr const char* kOutOfSpaceToken = "unknown-category";

struct ModelResponse {
    std::string text;  // may be empty only when refusal is set
    std::string backend_id;
    std::optional<double> latency_ms;
    bool refusal = false;
};

// Parameters of the synthetic behavioral model.
struct BehaviorParams {
    double p_space = 1.0;         // emit an in-space label vs. the out-of-space token
    double p_format = 1.0;        // given in-space, recognized pattern vs. unrecognized variant
    double base_accuracy = 1.0;   // given ISIF with no demos, gold vs. uniformly wrong label
    double demo_follow_strength = 0.0;  // weight mixing toward the demo majority label
    std::uint64_t seed = 0;
};

void validate(const BehaviorParams& params);

// Per-call inputs a backend may consume beyond the prompt.  The synthetic
// backend needs the gold label and the presented demo labels; the HTTP
// backend ignores everything but the prompt.
struct CompletionContext {
    std::uint64_t instance_seed = 0;
    std::optional<CanonicalLabel> gold;
    std::vector<CanonicalLabel> demo_labels;  // presented labels, in demo order
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual std::string backend_id() const = 0;
    virtual ModelResponse complete(const Prompt& prompt, const CompletionContext& ctx) = 0;
};

ModelResponse complete(ModelBackend& backend, const Prompt& prompt,
                       const CompletionContext& ctx = {});

// Most frequent label; ties resolved to the lexicographically smallest value.
// nullopt when the list is empty.
std::optional<CanonicalLabel> majority_label(const std::vector<CanonicalLabel>& labels);

// The synthetic response text.  Draws, in order: in-space vs. the
// out-of-space token with p_space; recognized pattern vs. hyphen-mutated
// variant with p_format; gold vs. a uniformly wrong label with
// a = (1-f)*base_accuracy + f*[majority(demo_labels) = gold], where
// f = demo_follow_strength when demos are present, else 0.  All randomness
// comes from a counter-based PRNG keyed by (params.seed, instance_seed), so
// identical arguments give identical text.
std::string synthetic_respond(const BehaviorParams& params, const CanonicalLabel& gold,
                              const std::vector<CanonicalLabel>& demo_labels,
                              const TaskSchema& schema, std::uint64_t instance_seed);

// Optional parameter overrides applied when the context carries demos,
// letting one backend model the regulation effect of demonstrations
// (zero-shot cells see the base params, few-shot cells the overrides).
struct SyntheticOverrides {
    std::optional<double> p_space;
    std::optional<double> p_format;
};

class SyntheticBackend : public ModelBackend {
public:
    SyntheticBackend(BehaviorParams params, TaskSchema schema,
                     SyntheticOverrides few_shot_overrides = {});
    std::string backend_id() const override { return "synthetic"; }
    ModelResponse complete(const Prompt& prompt, const CompletionContext& ctx) override;
    const BehaviorParams& params() const { return params_; }

private:
    BehaviorParams params_;
    TaskSchema schema_;
    SyntheticOverrides few_shot_;
};

struct HttpChatConfig {
    std::string base_url;
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;
    double temperature = 1.0;
    double top_p = 1.0;
    int max_retries = 3;
    int timeout_seconds = 60;
    int backoff_initial_ms = 250;
    std::vector<std::string> refusal_markers;  // substring list, default empty
};

// Case-insensitive substring scan; empty text always counts as a refusal.
bool detect_refusal(const std::vector<std::string>& markers, std::string_view text);

// Chat-completions client.  Sends {"model", "messages", "temperature",
// "top_p"}, reads choices[0].message.content.  Retries transport failures,
// 429, and 5xx with bounded exponential backoff; raises RateLimitError when
// retries are exhausted on 429, TransportError otherwise.  Refusals are
// flagged on the response, never thrown, so they can be recorded downstream.
class HttpChatBackend : public ModelBackend {
public:
    explicit HttpChatBackend(HttpChatConfig config);
    std::string backend_id() const override;
    ModelResponse complete(const Prompt& prompt, const CompletionContext& ctx) override;

private:
    HttpChatConfig config_;
};

}  // namespace icld
