#include "icld/model.hpp"

#include <chrono>
#include <map>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "icld/categorize.hpp"
#include "icld/errors.hpp"
#include "icld/rng.hpp"
#include "icld/text.hpp"

namespace icld {

using json = nlohmann::json;

void validate(const BehaviorParams& params) {
    auto check = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw ValidationError(std::string(name) + " must lie in [0, 1]");
    };
    check(params.p_space, "p_space");
    check(params.p_format, "p_format");
    check(params.base_accuracy, "base_accuracy");
    check(params.demo_follow_strength, "demo_follow_strength");
}

ModelResponse complete(ModelBackend& backend, const Prompt& prompt,
                       const CompletionContext& ctx) {
    if (prompt.messages.empty() || prompt.messages.back().role != Role::user)
        throw ValidationError("prompt must end with a user message");
    return backend.complete(prompt, ctx);
}

std::optional<CanonicalLabel> majority_label(const std::vector<CanonicalLabel>& labels) {
    if (labels.empty()) return std::nullopt;
    std::map<std::string, std::size_t> counts;
    for (const auto& label : labels) ++counts[label.value];
    // std::map iterates ascending, so the first maximum seen is the
    // lexicographically smallest — the documented tie rule.
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) {
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return CanonicalLabel{best};
}

namespace {

// The label value with a hyphen inserted as close to the midpoint as
// possible while keeping the result free of format-pattern matches: in-space
// (the hyphen strips away) but out-of-format by construction.
std::string hyphen_variant(const TaskSchema& schema, const CanonicalLabel& label) {
    const std::string& value = label.value;
    if (value.size() < 2) return value + "-";
    auto mid = static_cast<std::ptrdiff_t>(value.size() / 2);
    auto last = static_cast<std::ptrdiff_t>(value.size()) - 1;
    for (std::ptrdiff_t offset = 0; offset <= last; ++offset) {
        for (int sign : {1, -1}) {
            if (offset == 0 && sign < 0) continue;
            std::ptrdiff_t pos = mid + sign * offset;
            if (pos < 1 || pos > last) continue;
            std::string variant = value.substr(0, static_cast<std::size_t>(pos)) + "-" +
                                  value.substr(static_cast<std::size_t>(pos));
            if (!find_format_match(schema, variant).has_value()) return variant;
        }
    }
    throw DegenerateSchemaError("no hyphen insertion in '" + value +
                                "' escapes the format patterns");
}

}  // namespace

std::string synthetic_respond(const BehaviorParams& params, const CanonicalLabel& gold,
                              const std::vector<CanonicalLabel>& demo_labels,
                              const TaskSchema& schema, std::uint64_t instance_seed) {
    validate(params);
    if (schema.task_kind != TaskKind::classification)
        throw ValidationError("synthetic responses require a classification schema");
    if (!schema.has_label(gold.value))
        throw ValidationError("gold label '" + gold.value + "' not in schema " + schema.task_id);

    SplitMix64 rng(mix_keys({params.seed, instance_seed}));
    // One fixed draw per decision, consumed up front so the stream layout
    // never depends on which branches are taken.
    double u_space = rng.next_unit();
    double u_format = rng.next_unit();
    double u_label = rng.next_unit();

    if (u_space >= params.p_space) return kOutOfSpaceToken;

    double follow = demo_labels.empty() ? 0.0 : params.demo_follow_strength;
    double accuracy = (1.0 - follow) * params.base_accuracy;
    if (follow > 0.0) {
        auto majority = majority_label(demo_labels);
        if (majority.has_value() && *majority == gold) accuracy += follow;
    }

    CanonicalLabel emitted = gold;
    if (u_label >= accuracy) {
        std::vector<CanonicalLabel> others;
        for (const auto& label : schema.labels)
            if (!(label == gold)) others.push_back(label);
        if (others.empty())
            throw DegenerateSchemaError("cannot draw a wrong label from a single-label schema");
        emitted = others[rng.next_below(others.size())];
    }

    if (u_format < params.p_format) return schema.first_pattern_of(emitted);
    return hyphen_variant(schema, emitted);
}

SyntheticBackend::SyntheticBackend(BehaviorParams params, TaskSchema schema,
                                   SyntheticOverrides few_shot_overrides)
    : params_(params), schema_(std::move(schema)), few_shot_(few_shot_overrides) {
    validate(params_);
    if (schema_.task_kind != TaskKind::classification)
        throw ValidationError("synthetic backend requires a classification schema");
    if (few_shot_.p_space && !(*few_shot_.p_space >= 0.0 && *few_shot_.p_space <= 1.0))
        throw ValidationError("few-shot p_space override must lie in [0, 1]");
    if (few_shot_.p_format && !(*few_shot_.p_format >= 0.0 && *few_shot_.p_format <= 1.0))
        throw ValidationError("few-shot p_format override must lie in [0, 1]");
}

ModelResponse SyntheticBackend::complete(const Prompt&, const CompletionContext& ctx) {
    if (!ctx.gold.has_value())
        throw ValidationError("synthetic backend needs the query's gold label in the context");
    BehaviorParams effective = params_;
    if (!ctx.demo_labels.empty()) {
        if (few_shot_.p_space) effective.p_space = *few_shot_.p_space;
        if (few_shot_.p_format) effective.p_format = *few_shot_.p_format;
    }
    ModelResponse resp;
    resp.text = synthetic_respond(effective, *ctx.gold, ctx.demo_labels, schema_,
                                  ctx.instance_seed);
    resp.backend_id = backend_id();
    return resp;
}

bool detect_refusal(const std::vector<std::string>& markers, std::string_view text) {
    if (trim(text).empty()) return true;
    std::string lowered = to_lower(text);
    for (const auto& marker : markers) {
        if (marker.empty()) continue;
        if (lowered.find(to_lower(marker)) != std::string::npos) return true;
    }
    return false;
}

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("chat backend base_url is empty");
}

std::string HttpChatBackend::backend_id() const {
    return config_.model.empty() ? "http-chat" : config_.model;
}

ModelResponse HttpChatBackend::complete(const Prompt& prompt, const CompletionContext&) {
    json body;
    body["model"] = config_.model;
    json messages = json::array();
    for (const auto& msg : prompt.messages)
        messages.push_back({{"role", msg.role == Role::system ? "system" : "user"},
                            {"content", msg.content}});
    body["messages"] = std::move(messages);
    body["temperature"] = config_.temperature;
    body["top_p"] = config_.top_p;
    std::string payload = body.dump();

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

    auto started = std::chrono::steady_clock::now();
    int last_status = 0;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(config_.backoff_initial_ms << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        auto res = client.Post(config_.path, payload, "application/json");
        if (!res) {
            last_status = 0;
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        last_status = res->status;
        if (res->status != 200) {
            last_error = "http status " + std::to_string(res->status);
            if (res->status == 429 || res->status >= 500) continue;
            throw TransportError("chat request failed (" + last_error + ")");
        }
        std::string content;
        try {
            auto doc = json::parse(res->body);
            content = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw TransportError(std::string("malformed chat response: ") + e.what());
        }
        auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
        ModelResponse resp;
        resp.text = content;
        resp.backend_id = backend_id();
        resp.latency_ms = elapsed;
        resp.refusal = detect_refusal(config_.refusal_markers, content);
        return resp;
    }
    std::string detail = "chat request failed after " + std::to_string(config_.max_retries + 1) +
                         " attempts (" + last_error + ")";
    if (last_status == 429) throw RateLimitError(detail);
    throw TransportError(detail);
}

}  // namespace icld
