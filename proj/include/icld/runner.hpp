#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "icld/decompose.hpp"
#include "icld/embed.hpp"
#include "icld/model.hpp"
#include "icld/prompt.hpp"
#include "icld/record.hpp"
#include "icld/select.hpp"

namespace icld {

inline constexpr const char* kToolVersion = "0.1.0";

struct VariantConfig {
    PromptVariant variant = PromptVariant::zero_shot;
    bool use_cue_sentences = true;
    SystemUserSplit system_user_split = SystemUserSplit::single_message;
};

struct StrategyConfig {
    SelectionStrategy strategy = SelectionStrategy::random;
    bool flip_labels = false;  // substitute a wrong label on every demo
};

struct SyntheticConfig {
    BehaviorParams params;
    SyntheticOverrides few_shot;  // applied to cells whose prompts carry demos
};

struct HttpBackendConfig {
    HttpChatConfig chat;
    std::string api_key_env;  // environment variable holding the bearer token
};

struct EmbeddingSetup {
    std::string provider = "trigram";  // "trigram" or "http"
    std::size_t dim = 512;
    HttpEmbeddingConfig http;
    std::string api_key_env;
};

// Whether random selection draws one demo set per seed (reused across the
// eval set) or a fresh set per instance.  Class-filtered strategies are
// always per-instance since the filter depends on the query's gold.
enum class DemoMode { per_seed, per_instance };

struct RunConfig {
    std::string schema_path;
    std::string corpus_path;
    std::string output_dir;
    std::optional<SyntheticConfig> synthetic;
    std::optional<HttpBackendConfig> http;
    std::vector<VariantConfig> variants;
    std::vector<StrategyConfig> strategies;
    std::vector<std::uint64_t> seeds;
    std::vector<std::size_t> k_values{5};
    std::size_t parallelism = 1;
    std::size_t eval_limit = 0;  // 0 = the whole eval split
    DemoMode demo_mode = DemoMode::per_seed;
    std::string field_separator = " ";
    EmbeddingSetup embedding;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& config);

// One experiment cell: a (variant, strategy, k, seed) combination sharing a
// single JSONL shard.  Zero-shot and DI cells carry no strategy, seed, or k;
// retrieval cells carry no seed (selection is deterministic).
struct Cell {
    VariantConfig variant;
    std::optional<StrategyConfig> strategy;
    std::optional<std::uint64_t> seed;
    std::size_t k = 0;
    std::string id;
};

std::vector<Cell> enumerate_cells(const RunConfig& config);

struct RunSummary {
    std::string output_dir;
    std::size_t cells_total = 0;
    std::size_t cells_written = 0;
    std::size_t cells_skipped = 0;  // shards already present (resume)
    std::size_t records_written = 0;
};

// Runs every cell against the configured backend, one atomic JSONL shard per
// cell plus a manifest.  Existing shards are skipped, so interrupted runs
// resume; with the synthetic backend the final artifact is byte-identical
// either way.
RunSummary run_experiment(const RunConfig& config);

struct AggregateReport {
    std::string backend_id;
    std::string task_id;
    std::string before_cell;
    std::string after_cell;
    std::vector<std::uint64_t> seeds;  // empty when the after group is seedless
    std::vector<DecompositionReport> per_seed;
    DecompositionReport mean;
};

// Pairs a before cell (or seed group) with an after cell (or seed group) by
// id prefix, builds per-seed ledgers, and averages the reports.
AggregateReport aggregate(const std::string& artifact_dir, const std::string& before_cell,
                          const std::string& after_cell);

enum class ReportFormat { json, csv, markdown };
ReportFormat report_format_from_string(const std::string& s);

nlohmann::json aggregate_to_json(const AggregateReport& report);
AggregateReport aggregate_from_json(const nlohmann::json& j);

std::string format_report(const AggregateReport& report, ReportFormat format);
void emit_report(const AggregateReport& report, ReportFormat format, const std::string& path);

}  // namespace icld
