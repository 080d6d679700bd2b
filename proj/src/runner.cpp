#include "icld/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "icld/categorize.hpp"
#include "icld/errors.hpp"
#include "icld/metrics.hpp"
#include "icld/rng.hpp"
#include "icld/text.hpp"

namespace icld {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string demo_mode_to_string(DemoMode mode) {
    return mode == DemoMode::per_seed ? "per_seed" : "per_instance";
}

DemoMode demo_mode_from_string(const std::string& s) {
    if (s == "per_seed") return DemoMode::per_seed;
    if (s == "per_instance") return DemoMode::per_instance;
    throw ConfigError("unknown demo_mode: " + s);
}

std::string split_to_string(SystemUserSplit split) {
    return split == SystemUserSplit::single_message ? "single_message" : "system_carries_demos";
}

SystemUserSplit split_from_string(const std::string& s) {
    if (s == "single_message") return SystemUserSplit::single_message;
    if (s == "system_carries_demos") return SystemUserSplit::system_carries_demos;
    throw ConfigError("unknown system_user_split: " + s);
}

std::string resolve_env(const std::string& name) {
    if (name.empty()) return "";
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) throw ConfigError("environment variable " + name + " is not set");
    return value;
}

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig config;
    try {
        config.schema_path = j.at("schema_path").get<std::string>();
        config.corpus_path = j.at("corpus_path").get<std::string>();
        config.output_dir = j.at("output_dir").get<std::string>();

        const auto& backend = j.at("backend");
        if (backend.contains("synthetic")) {
            const auto& s = backend.at("synthetic");
            SyntheticConfig sc;
            sc.params.p_space = s.value("p_space", 1.0);
            sc.params.p_format = s.value("p_format", 1.0);
            sc.params.base_accuracy = s.value("base_accuracy", 1.0);
            sc.params.demo_follow_strength = s.value("demo_follow_strength", 0.0);
            sc.params.seed = s.value("seed", std::uint64_t{0});
            if (s.contains("few_shot")) {
                const auto& f = s.at("few_shot");
                if (f.contains("p_space")) sc.few_shot.p_space = f.at("p_space").get<double>();
                if (f.contains("p_format")) sc.few_shot.p_format = f.at("p_format").get<double>();
            }
            config.synthetic = sc;
        }
        if (backend.contains("http")) {
            const auto& h = backend.at("http");
            HttpBackendConfig hc;
            hc.chat.base_url = h.at("base_url").get<std::string>();
            hc.chat.path = h.value("path", std::string("/v1/chat/completions"));
            hc.chat.model = h.value("model", std::string());
            hc.chat.temperature = h.value("temperature", 1.0);
            hc.chat.top_p = h.value("top_p", 1.0);
            hc.chat.max_retries = h.value("max_retries", 3);
            hc.chat.timeout_seconds = h.value("timeout_seconds", 60);
            hc.chat.backoff_initial_ms = h.value("backoff_initial_ms", 250);
            if (h.contains("refusal_markers"))
                hc.chat.refusal_markers = h.at("refusal_markers").get<std::vector<std::string>>();
            hc.api_key_env = h.value("api_key_env", std::string());
            config.http = hc;
        }

        for (const auto& v : j.at("variants")) {
            VariantConfig vc;
            if (v.is_string()) {
                vc.variant = variant_from_string(v.get<std::string>());
            } else {
                vc.variant = variant_from_string(v.at("variant").get<std::string>());
                vc.use_cue_sentences = v.value("use_cue_sentences", true);
                vc.system_user_split =
                    split_from_string(v.value("system_user_split", std::string("single_message")));
            }
            config.variants.push_back(vc);
        }
        if (j.contains("strategies")) {
            for (const auto& s : j.at("strategies")) {
                StrategyConfig sc;
                if (s.is_string()) {
                    sc.strategy = strategy_from_string(s.get<std::string>());
                } else {
                    sc.strategy = strategy_from_string(s.at("strategy").get<std::string>());
                    sc.flip_labels = s.value("flip_labels", false);
                }
                config.strategies.push_back(sc);
            }
        }
        config.seeds = j.value("seeds", std::vector<std::uint64_t>{});
        if (j.contains("k_values")) config.k_values = j.at("k_values").get<std::vector<std::size_t>>();
        config.parallelism = j.value("parallelism", std::size_t{1});
        config.eval_limit = j.value("eval_limit", std::size_t{0});
        config.demo_mode = demo_mode_from_string(j.value("demo_mode", std::string("per_seed")));
        config.field_separator = j.value("field_separator", std::string(" "));
        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            config.embedding.provider = e.value("provider", std::string("trigram"));
            config.embedding.dim = e.value("dim", std::size_t{512});
            if (config.embedding.provider == "http") {
                config.embedding.http.base_url = e.at("base_url").get<std::string>();
                config.embedding.http.path = e.value("path", std::string("/v1/embeddings"));
                config.embedding.http.model = e.value("model", std::string());
                config.embedding.http.dim = e.value("dim", std::size_t{0});
                config.embedding.api_key_env = e.value("api_key_env", std::string());
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad run config: ") + e.what());
    }
    return config;
}

json config_to_json(const RunConfig& config) {
    json j;
    j["schema_path"] = config.schema_path;
    j["corpus_path"] = config.corpus_path;
    j["output_dir"] = config.output_dir;
    json backend;
    if (config.synthetic) {
        json s;
        s["p_space"] = config.synthetic->params.p_space;
        s["p_format"] = config.synthetic->params.p_format;
        s["base_accuracy"] = config.synthetic->params.base_accuracy;
        s["demo_follow_strength"] = config.synthetic->params.demo_follow_strength;
        s["seed"] = config.synthetic->params.seed;
        if (config.synthetic->few_shot.p_space || config.synthetic->few_shot.p_format) {
            json f;
            if (config.synthetic->few_shot.p_space) f["p_space"] = *config.synthetic->few_shot.p_space;
            if (config.synthetic->few_shot.p_format)
                f["p_format"] = *config.synthetic->few_shot.p_format;
            s["few_shot"] = std::move(f);
        }
        backend["synthetic"] = std::move(s);
    }
    if (config.http) {
        json h;
        h["base_url"] = config.http->chat.base_url;
        h["path"] = config.http->chat.path;
        h["model"] = config.http->chat.model;
        h["temperature"] = config.http->chat.temperature;
        h["top_p"] = config.http->chat.top_p;
        h["max_retries"] = config.http->chat.max_retries;
        h["timeout_seconds"] = config.http->chat.timeout_seconds;
        h["backoff_initial_ms"] = config.http->chat.backoff_initial_ms;
        h["refusal_markers"] = config.http->chat.refusal_markers;
        h["api_key_env"] = config.http->api_key_env;
        backend["http"] = std::move(h);
    }
    j["backend"] = std::move(backend);
    json variants = json::array();
    for (const auto& v : config.variants) {
        json vj;
        vj["variant"] = to_string(v.variant);
        vj["use_cue_sentences"] = v.use_cue_sentences;
        vj["system_user_split"] = split_to_string(v.system_user_split);
        variants.push_back(std::move(vj));
    }
    j["variants"] = std::move(variants);
    json strategies = json::array();
    for (const auto& s : config.strategies) {
        json sj;
        sj["strategy"] = to_string(s.strategy);
        sj["flip_labels"] = s.flip_labels;
        strategies.push_back(std::move(sj));
    }
    j["strategies"] = std::move(strategies);
    j["seeds"] = config.seeds;
    j["k_values"] = config.k_values;
    j["parallelism"] = config.parallelism;
    j["eval_limit"] = config.eval_limit;
    j["demo_mode"] = demo_mode_to_string(config.demo_mode);
    j["field_separator"] = config.field_separator;
    json e;
    e["provider"] = config.embedding.provider;
    e["dim"] = config.embedding.dim;
    if (config.embedding.provider == "http") {
        e["base_url"] = config.embedding.http.base_url;
        e["path"] = config.embedding.http.path;
        e["model"] = config.embedding.http.model;
        e["api_key_env"] = config.embedding.api_key_env;
    }
    j["embedding"] = std::move(e);
    return j;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

void validate(const RunConfig& config) {
    if (config.schema_path.empty()) throw ConfigError("schema_path is empty");
    if (config.corpus_path.empty()) throw ConfigError("corpus_path is empty");
    if (config.output_dir.empty()) throw ConfigError("output_dir is empty");
    if (config.synthetic.has_value() == config.http.has_value())
        throw ConfigError("exactly one backend (synthetic or http) must be configured");
    if (config.variants.empty()) throw ConfigError("variants is empty");
    if (config.seeds.empty()) throw ConfigError("seeds is empty");
    if (config.k_values.empty()) throw ConfigError("k_values is empty");
    for (auto k : config.k_values)
        if (k == 0) throw ConfigError("k_values entries must be >= 1");
    if (config.parallelism == 0) throw ConfigError("parallelism must be >= 1");
    bool any_demos = std::any_of(config.variants.begin(), config.variants.end(),
                                 [](const VariantConfig& v) { return variant_uses_demos(v.variant); });
    if (any_demos && config.strategies.empty())
        throw ConfigError("few-shot variants configured but strategies is empty");
    if (config.embedding.provider != "trigram" && config.embedding.provider != "http")
        throw ConfigError("unknown embedding provider: " + config.embedding.provider);
    if (config.embedding.provider == "trigram" && config.embedding.dim == 0)
        throw ConfigError("embedding dim must be >= 1");
    if (config.synthetic) validate(config.synthetic->params);
}

std::vector<Cell> enumerate_cells(const RunConfig& config) {
    std::vector<Cell> cells;
    std::set<std::string> seen;
    auto add = [&cells, &seen](Cell cell) {
        if (!seen.insert(cell.id).second)
            throw ConfigError("duplicate experiment cell: " + cell.id);
        cells.push_back(std::move(cell));
    };
    for (const auto& variant : config.variants) {
        if (!variant_uses_demos(variant.variant)) {
            Cell cell;
            cell.variant = variant;
            cell.id = to_string(variant.variant);
            add(std::move(cell));
            continue;
        }
        for (const auto& strategy : config.strategies) {
            for (auto k : config.k_values) {
                std::string base = to_string(variant.variant) + "-" + to_string(strategy.strategy);
                if (strategy.flip_labels) base += "-flip";
                base += "-k" + std::to_string(k);
                if (strategy_uses_retrieval(strategy.strategy)) {
                    Cell cell;
                    cell.variant = variant;
                    cell.strategy = strategy;
                    cell.k = k;
                    cell.id = base;
                    add(std::move(cell));
                } else {
                    for (auto seed : config.seeds) {
                        Cell cell;
                        cell.variant = variant;
                        cell.strategy = strategy;
                        cell.seed = seed;
                        cell.k = k;
                        cell.id = base + "-s" + std::to_string(seed);
                        add(std::move(cell));
                    }
                }
            }
        }
    }
    return cells;
}

namespace {

const std::uint64_t kFlipSalt = fnv1a64("flip");

struct ExecContext {
    const RunConfig& config;
    const TaskSchema& schema;
    const std::vector<Instance>& pool;
    const std::vector<Instance>& eval;
    ModelBackend& backend;
    const SimilarityIndex* index = nullptr;
};

DemoSet demos_for(const ExecContext& ectx, const Cell& cell, const Instance& query) {
    const StrategyConfig& sc = *cell.strategy;
    std::optional<ClassFilter> filter;
    if (strategy_is_homo(sc.strategy) || strategy_is_hetero(sc.strategy))
        filter = filter_for_strategy(sc.strategy, gold_label(query.gold));

    DemoSet set;
    bool shared_set = false;  // one demo set reused across the eval split
    if (strategy_uses_retrieval(sc.strategy)) {
        set = select_retrieval(*ectx.index, ectx.pool, query, cell.k, filter);
    } else {
        bool per_instance =
            ectx.config.demo_mode == DemoMode::per_instance || filter.has_value();
        shared_set = !per_instance;
        std::uint64_t seed = *cell.seed;
        if (per_instance) seed = mix_keys({seed, fnv1a64(query.instance_id)});
        set = select_random(ectx.pool, cell.k, seed, filter, query.instance_id);
    }
    if (sc.flip_labels) {
        std::uint64_t flip_seed =
            shared_set ? mix_keys({*cell.seed, kFlipSalt})
                       : mix_keys({cell.seed.value_or(0), fnv1a64(query.instance_id), kFlipSalt});
        set = flip_labels(set, ectx.schema, flip_seed);
    }
    return set;
}

RunRecord make_record(const ExecContext& ectx, const Cell& cell, const Instance& query) {
    std::optional<DemoSet> demos;
    if (cell.strategy) demos = demos_for(ectx, cell, query);

    PromptSpec spec;
    spec.variant = cell.variant.variant;
    spec.k = cell.k;
    spec.use_cue_sentences = cell.variant.use_cue_sentences;
    spec.system_user_split = cell.variant.system_user_split;
    Prompt prompt = build_prompt(ectx.schema, spec, query, demos);

    CompletionContext cctx;
    cctx.instance_seed = mix_keys({fnv1a64(query.instance_id), fnv1a64(cell.id)});
    if (ectx.schema.task_kind == TaskKind::classification) cctx.gold = gold_label(query.gold);
    if (demos)
        for (const auto& demo : demos->demos)
            if (holds_label(demo.presented_label))
                cctx.demo_labels.push_back(gold_label(demo.presented_label));

    ModelResponse response = complete(ectx.backend, prompt, cctx);

    RunRecord record;
    record.instance_id = query.instance_id;
    record.variant = to_string(cell.variant.variant);
    if (cell.strategy) {
        std::string name = to_string(cell.strategy->strategy);
        if (cell.strategy->flip_labels) name += "-flip";
        record.strategy = name;
    }
    record.seed = cell.seed;
    record.k = cell.k;
    record.prompt_hash = prompt_hash(prompt);
    record.response_text = response.text;
    record.backend_id = response.backend_id;
    record.refusal = response.refusal;
    switch (ectx.schema.task_kind) {
        case TaskKind::classification:
            record.classification =
                categorize_classification(ectx.schema, response, gold_label(query.gold));
            break;
        case TaskKind::sequence_labeling:
            record.sequence = categorize_sequence(ectx.schema, response, gold_pairs(query.gold));
            break;
        case TaskKind::generation:
            break;  // raw text only; generation metrics run downstream
    }
    if (demos) {
        for (const auto& demo : demos->demos) {
            DemoProvenance prov;
            prov.instance_id = demo.source.instance_id;
            prov.presented_label = render_label_text(demo.presented_label);
            prov.similarity = demo.similarity;
            record.demos.push_back(std::move(prov));
        }
    }
    return record;
}

std::vector<RunRecord> compute_cell(const ExecContext& ectx, const Cell& cell) {
    std::vector<RunRecord> records(ectx.eval.size());
    std::size_t workers = std::min(ectx.config.parallelism, ectx.eval.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < ectx.eval.size(); ++i)
            records[i] = make_record(ectx, cell, ectx.eval[i]);
        return records;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= ectx.eval.size()) return;
            try {
                records[i] = make_record(ectx, cell, ectx.eval[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(work);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return records;
}

void write_atomically(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void check_chat_backend_reachable(const HttpChatConfig& chat) {
    httplib::Client client(chat.base_url);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(5, 0);
    auto res = client.Get("/");
    if (!res && (res.error() == httplib::Error::Connection ||
                 res.error() == httplib::Error::ConnectionTimeout))
        throw BackendUnavailableError("cannot reach chat backend at " + chat.base_url);
}

std::shared_ptr<EmbeddingProvider> build_provider(const EmbeddingSetup& setup) {
    if (setup.provider == "trigram") return std::make_shared<TrigramHashProvider>(setup.dim);
    HttpEmbeddingConfig http = setup.http;
    http.api_key = resolve_env(setup.api_key_env);
    return std::make_shared<HttpEmbeddingProvider>(http);
}

}  // namespace

RunSummary run_experiment(const RunConfig& config) {
    validate(config);
    TaskSchema schema = load_schema(config.schema_path);
    CorpusHandle corpus = load_corpus(config.corpus_path, schema);
    std::vector<Instance> eval = corpus.eval();
    if (config.eval_limit > 0 && config.eval_limit < eval.size()) eval.resize(config.eval_limit);
    if (eval.empty()) throw ValidationError("corpus has no eval instances");

    auto cells = enumerate_cells(config);
    bool any_filtered_or_flipped = false;
    bool any_retrieval = false;
    for (const auto& cell : cells) {
        if (!cell.strategy) continue;
        any_retrieval = any_retrieval || strategy_uses_retrieval(cell.strategy->strategy);
        any_filtered_or_flipped = any_filtered_or_flipped || cell.strategy->flip_labels ||
                                  strategy_is_homo(cell.strategy->strategy) ||
                                  strategy_is_hetero(cell.strategy->strategy);
    }
    if (any_filtered_or_flipped && schema.task_kind != TaskKind::classification)
        throw ConfigError("class filters and label flipping require a classification task");

    std::unique_ptr<ModelBackend> backend;
    if (config.synthetic) {
        backend = std::make_unique<SyntheticBackend>(config.synthetic->params, schema,
                                                     config.synthetic->few_shot);
    } else {
        check_chat_backend_reachable(config.http->chat);
        HttpChatConfig chat = config.http->chat;
        chat.api_key = resolve_env(config.http->api_key_env);
        backend = std::make_unique<HttpChatBackend>(chat);
    }

    std::optional<SimilarityIndex> index;
    if (any_retrieval)
        index.emplace(SimilarityIndex::build(corpus.train(), build_provider(config.embedding),
                                             config.field_separator));

    ExecContext ectx{config, schema, corpus.train(), eval, *backend,
                     index ? &*index : nullptr};

    fs::create_directories(config.output_dir);
    RunSummary summary;
    summary.output_dir = config.output_dir;
    summary.cells_total = cells.size();

    json manifest_cells = json::array();
    for (const auto& cell : cells) {
        fs::path shard = fs::path(config.output_dir) / (cell.id + ".jsonl");
        if (fs::exists(shard)) {
            ++summary.cells_skipped;
        } else {
            auto records = compute_cell(ectx, cell);
            std::string content;
            for (const auto& record : records) content += record_to_line(record) + "\n";
            write_atomically(shard, content);
            ++summary.cells_written;
            summary.records_written += records.size();
        }
        json cj;
        cj["id"] = cell.id;
        cj["path"] = cell.id + ".jsonl";
        cj["records"] = eval.size();
        if (cell.seed) cj["seed"] = *cell.seed;
        manifest_cells.push_back(std::move(cj));
    }

    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config_hash"] = to_hex(fnv1a64(config_to_json(config).dump()));
    manifest["task_id"] = schema.task_id;
    manifest["backend"] = backend->backend_id();
    manifest["instances"] = eval.size();
    manifest["cells"] = std::move(manifest_cells);
    write_atomically(fs::path(config.output_dir) / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

namespace {

struct CellRef {
    std::string id;
    std::string path;
    std::optional<std::uint64_t> seed;
    std::size_t records = 0;
};

std::vector<CellRef> manifest_cells(const json& manifest) {
    std::vector<CellRef> cells;
    for (const auto& cj : manifest.at("cells")) {
        CellRef ref;
        ref.id = cj.at("id").get<std::string>();
        ref.path = cj.at("path").get<std::string>();
        if (cj.contains("seed")) ref.seed = cj.at("seed").get<std::uint64_t>();
        ref.records = cj.at("records").get<std::size_t>();
        cells.push_back(std::move(ref));
    }
    return cells;
}

// Matches either the exact cell id or its seed expansions "<base>-s<digits>".
std::vector<CellRef> group_for(const std::vector<CellRef>& cells, const std::string& base) {
    std::vector<CellRef> group;
    for (const auto& cell : cells) {
        if (cell.id == base) {
            group.push_back(cell);
            continue;
        }
        std::string prefix = base + "-s";
        if (cell.id.size() > prefix.size() && cell.id.compare(0, prefix.size(), prefix) == 0) {
            std::string rest = cell.id.substr(prefix.size());
            if (std::all_of(rest.begin(), rest.end(),
                            [](char c) { return c >= '0' && c <= '9'; }))
                group.push_back(cell);
        }
    }
    if (group.empty()) throw IncompleteCellError("no cells in the artifact match '" + base + "'");
    return group;
}

DecompositionReport mean_report(const std::vector<DecompositionReport>& reports) {
    DecompositionReport mean;
    if (reports.empty()) return mean;
    double count = static_cast<double>(reports.size());
    for (const auto& r : reports) {
        mean.label_space_power += r.label_space_power / count;
        mean.format_power += r.format_power / count;
        mean.discrimination_power += r.discrimination_power / count;
        mean.overall_delta += r.overall_delta / count;
        mean.w2r += r.w2r / count;
        mean.r2w += r.r2w / count;
        mean.r2r += r.r2r / count;
        mean.w2w += r.w2w / count;
        mean.new_isif_pct += r.new_isif_pct / count;
        mean.isif_pct_before += r.isif_pct_before / count;
        mean.isif_pct_after += r.isif_pct_after / count;
    }
    mean.n = reports.front().n;
    return mean;
}

}  // namespace

AggregateReport aggregate(const std::string& artifact_dir, const std::string& before_cell,
                          const std::string& after_cell) {
    fs::path manifest_path = fs::path(artifact_dir) / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw IncompleteCellError("no manifest at " + manifest_path.string() +
                                       " (is the run complete?)");
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw ParseError(manifest_path.string() + ": " + e.what());
    }

    auto cells = manifest_cells(manifest);
    auto before_group = group_for(cells, before_cell);
    auto after_group = group_for(cells, after_cell);

    std::map<std::string, std::vector<RunRecord>> shard_cache;
    auto records_of = [&](const CellRef& cell) -> const std::vector<RunRecord>& {
        auto it = shard_cache.find(cell.path);
        if (it == shard_cache.end()) {
            fs::path shard = fs::path(artifact_dir) / cell.path;
            if (!fs::exists(shard))
                throw IncompleteCellError("shard missing for cell " + cell.id + ": " +
                                          shard.string());
            auto records = load_records(shard.string());
            if (records.size() != cell.records)
                throw IncompleteCellError("cell " + cell.id + " has " +
                                          std::to_string(records.size()) + " records, manifest declares " +
                                          std::to_string(cell.records));
            it = shard_cache.emplace(cell.path, std::move(records)).first;
        }
        return it->second;
    };

    // Pair seed groups: seeded-vs-seeded matches seed for seed; a single
    // seedless cell on either side is reused against every partner.
    std::vector<std::pair<const CellRef*, const CellRef*>> pairs;
    if (before_group.size() == 1 && !before_group.front().seed) {
        for (const auto& after : after_group) pairs.emplace_back(&before_group.front(), &after);
    } else if (after_group.size() == 1 && !after_group.front().seed) {
        for (const auto& before : before_group) pairs.emplace_back(&before, &after_group.front());
    } else {
        std::map<std::uint64_t, const CellRef*> by_seed;
        for (const auto& before : before_group) {
            if (!before.seed)
                throw IncompleteCellError("cell " + before.id + " has no seed to pair by");
            by_seed[*before.seed] = &before;
        }
        for (const auto& after : after_group) {
            if (!after.seed)
                throw IncompleteCellError("cell " + after.id + " has no seed to pair by");
            auto it = by_seed.find(*after.seed);
            if (it == by_seed.end())
                throw IncompleteCellError("no before cell with seed " +
                                          std::to_string(*after.seed) + " to pair with " + after.id);
            pairs.emplace_back(it->second, &after);
        }
    }

    AggregateReport report;
    report.backend_id = manifest.value("backend", std::string());
    report.task_id = manifest.value("task_id", std::string());
    report.before_cell = before_cell;
    report.after_cell = after_cell;
    for (const auto& [before, after] : pairs) {
        auto ledger = build_ledger(records_of(*before), records_of(*after));
        report.per_seed.push_back(decompose(ledger));
        if (after->seed)
            report.seeds.push_back(*after->seed);
        else if (before->seed)
            report.seeds.push_back(*before->seed);
    }
    report.mean = mean_report(report.per_seed);
    return report;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    throw ConfigError("unknown report format: " + s);
}

json aggregate_to_json(const AggregateReport& report) {
    json j;
    j["backend"] = report.backend_id;
    j["task_id"] = report.task_id;
    j["before_cell"] = report.before_cell;
    j["after_cell"] = report.after_cell;
    j["seeds"] = report.seeds;
    json per_seed = json::array();
    for (const auto& r : report.per_seed) per_seed.push_back(decomposition_to_json(r));
    j["per_seed"] = std::move(per_seed);
    j["mean"] = decomposition_to_json(report.mean);
    return j;
}

AggregateReport aggregate_from_json(const json& j) {
    AggregateReport report;
    try {
        report.backend_id = j.at("backend").get<std::string>();
        report.task_id = j.at("task_id").get<std::string>();
        report.before_cell = j.at("before_cell").get<std::string>();
        report.after_cell = j.at("after_cell").get<std::string>();
        report.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        for (const auto& r : j.at("per_seed")) report.per_seed.push_back(decomposition_from_json(r));
        report.mean = decomposition_from_json(j.at("mean"));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad report: ") + e.what());
    }
    return report;
}

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
    return buf;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string markdown_report(const AggregateReport& report) {
    const DecompositionReport& m = report.mean;
    std::string out;
    out += "| Model/Backend | Dataset | Discrimination | Label Space | Format | Overall | New-ISIF% |\n";
    out += "| --- | --- | --- | --- | --- | --- | --- |\n";
    out += "| " + report.backend_id + " | " + report.task_id + " | " + pct(m.discrimination_power) +
           " | " + pct(m.label_space_power) + " | " + pct(m.format_power) + " | " +
           pct(m.overall_delta) + " | " + pct(m.new_isif_pct) + " |\n";
    out += "\n";
    out += "Pairing: " + report.before_cell + " -> " + report.after_cell + ", n = " +
           std::to_string(m.n) + ", seeds averaged = " + std::to_string(report.per_seed.size()) +
           "\n\n";
    out += "| Subset | W2R | R2W | R2R | W2W | ISIF before | ISIF after |\n";
    out += "| --- | --- | --- | --- | --- | --- | --- |\n";
    out += "| ISIF-on-both | " + pct(m.w2r) + " | " + pct(m.r2w) + " | " + pct(m.r2r) + " | " +
           pct(m.w2w) + " | " + pct(m.isif_pct_before) + " | " + pct(m.isif_pct_after) + " |\n";
    if (report.per_seed.size() > 1) {
        out += "\n| Seed | Discrimination | Label Space | Format | Overall | New-ISIF% |\n";
        out += "| --- | --- | --- | --- | --- | --- |\n";
        for (std::size_t i = 0; i < report.per_seed.size(); ++i) {
            const auto& r = report.per_seed[i];
            std::string seed_name =
                i < report.seeds.size() ? std::to_string(report.seeds[i]) : std::to_string(i);
            out += "| " + seed_name + " | " + pct(r.discrimination_power) + " | " +
                   pct(r.label_space_power) + " | " + pct(r.format_power) + " | " +
                   pct(r.overall_delta) + " | " + pct(r.new_isif_pct) + " |\n";
        }
    }
    return out;
}

std::string csv_report(const AggregateReport& report) {
    std::string out =
        "scope,backend,dataset,before_cell,after_cell,discrimination,label_space,format,overall,"
        "new_isif,w2r,r2w,r2r,w2w,isif_before,isif_after,n\n";
    auto row = [&](const std::string& scope, const DecompositionReport& r) {
        out += scope + "," + report.backend_id + "," + report.task_id + "," + report.before_cell +
               "," + report.after_cell + "," + num(r.discrimination_power) + "," +
               num(r.label_space_power) + "," + num(r.format_power) + "," + num(r.overall_delta) +
               "," + num(r.new_isif_pct) + "," + num(r.w2r) + "," + num(r.r2w) + "," + num(r.r2r) +
               "," + num(r.w2w) + "," + num(r.isif_pct_before) + "," + num(r.isif_pct_after) + "," +
               std::to_string(r.n) + "\n";
    };
    row("mean", report.mean);
    for (std::size_t i = 0; i < report.per_seed.size(); ++i) {
        std::string scope =
            i < report.seeds.size() ? "s" + std::to_string(report.seeds[i]) : std::to_string(i);
        row(scope, report.per_seed[i]);
    }
    return out;
}

}  // namespace

std::string format_report(const AggregateReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: return aggregate_to_json(report).dump(2) + "\n";
        case ReportFormat::csv: return csv_report(report);
        case ReportFormat::markdown: return markdown_report(report);
    }
    throw ConfigError("unknown report format");
}

void emit_report(const AggregateReport& report, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + path);
    out << format_report(report, format);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace icld
