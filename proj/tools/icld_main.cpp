// Command-line front end: run experiments, decompose run pairs, render
// reports, preview demonstration selection, and validate task schemas.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "icld/corpus.hpp"
#include "icld/decompose.hpp"
#include "icld/embed.hpp"
#include "icld/errors.hpp"
#include "icld/record.hpp"
#include "icld/runner.hpp"
#include "icld/schema.hpp"
#include "icld/select.hpp"

namespace {

using icld::RunRecord;
using json = nlohmann::json;

void write_or_print(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw icld::IoError("cannot write " + out_path);
    out << content;
}

int cmd_run(const std::string& config_path) {
    icld::RunConfig config = icld::load_config(config_path);
    icld::RunSummary summary = icld::run_experiment(config);
    std::cout << "wrote " << summary.cells_written << " cell(s), skipped "
              << summary.cells_skipped << " existing, " << summary.records_written
              << " record(s) -> " << summary.output_dir << "\n";
    return 0;
}

int cmd_decompose(const std::string& before_path, const std::string& after_path,
                  const std::string& out_path) {
    std::vector<RunRecord> before = icld::load_records(before_path);
    std::vector<RunRecord> after = icld::load_records(after_path);
    icld::TransitionLedger ledger = icld::build_ledger(before, after);
    icld::DecompositionReport report = icld::decompose(ledger);
    write_or_print(icld::decomposition_to_json(report).dump(2) + "\n", out_path);
    return 0;
}

int cmd_report(const std::string& artifacts, const std::string& before_cell,
               const std::string& after_cell, const std::string& format,
               const std::string& out_path) {
    icld::AggregateReport report = icld::aggregate(artifacts, before_cell, after_cell);
    icld::ReportFormat rf = icld::report_format_from_string(format);
    if (out_path.empty()) {
        std::cout << icld::format_report(report, rf);
    } else {
        icld::emit_report(report, rf, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_select_demos(const std::string& schema_path, const std::string& corpus_path,
                     const std::string& query_id, const std::string& strategy_name, std::size_t k,
                     std::uint64_t seed, bool flip, const std::string& separator,
                     std::size_t dim) {
    icld::TaskSchema schema = icld::load_schema(schema_path);
    icld::CorpusHandle corpus = icld::load_corpus(corpus_path, schema);
    const icld::Instance* query = nullptr;
    if (query_id.empty()) {
        if (corpus.eval().empty()) throw icld::ValidationError("corpus has no eval instances");
        query = &corpus.eval().front();
    } else {
        query = corpus.find(query_id);
        if (query == nullptr) throw icld::ValidationError("no instance with id " + query_id);
    }

    icld::SelectionStrategy strategy = icld::strategy_from_string(strategy_name);
    std::optional<icld::ClassFilter> filter;
    if (icld::strategy_is_homo(strategy) || icld::strategy_is_hetero(strategy))
        filter = icld::filter_for_strategy(strategy, icld::gold_label(query->gold));

    icld::DemoSet demos;
    if (icld::strategy_uses_retrieval(strategy)) {
        auto provider = std::make_shared<icld::TrigramHashProvider>(dim);
        auto index = icld::SimilarityIndex::build(corpus.train(), provider, separator);
        demos = icld::select_retrieval(index, corpus.train(), *query, k, filter);
    } else {
        demos = icld::select_random(corpus.train(), k, seed, filter, query->instance_id);
    }
    if (flip) demos = icld::flip_labels(demos, schema, seed);

    json out;
    out["query"] = query->instance_id;
    out["strategy"] = icld::to_string(demos.strategy);
    if (demos.seed) out["seed"] = *demos.seed;
    out["flipped"] = demos.label_perturbation == icld::LabelPerturbation::flipped;
    json list = json::array();
    for (const auto& demo : demos.demos) {
        json d;
        d["instance_id"] = demo.source.instance_id;
        d["label"] = icld::render_label_text(demo.presented_label);
        if (demo.similarity) d["similarity"] = *demo.similarity;
        list.push_back(std::move(d));
    }
    out["demos"] = std::move(list);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_validate_schema(const std::string& schema_path) {
    icld::TaskSchema schema = icld::load_schema(schema_path);
    std::cout << "ok: " << schema.task_id << " (" << icld::to_string(schema.task_kind) << ", "
              << schema.labels.size() << " label(s), " << schema.format_patterns.size()
              << " pattern group(s))\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attribute few-shot gains to label-space, format, and discrimination effects"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run every experiment cell in a config");
    run->add_option("--config", config_path, "Run configuration JSON")->required();

    std::string before_path, after_path, out_path;
    auto* dec = app.add_subcommand("decompose", "Decompose a before/after run pair");
    dec->add_option("--before", before_path, "Baseline run records (JSONL)")->required();
    dec->add_option("--after", after_path, "Comparison run records (JSONL)")->required();
    dec->add_option("--out", out_path, "Write JSON here instead of stdout");

    std::string artifacts, before_cell, after_cell, format = "md", report_out;
    auto* rep = app.add_subcommand("report", "Aggregate an artifact directory into a report");
    rep->add_option("--artifacts", artifacts, "Artifact directory with manifest.json")->required();
    rep->add_option("--before-cell", before_cell, "Baseline cell id (seed suffix optional)")
        ->required();
    rep->add_option("--after-cell", after_cell, "Comparison cell id (seed suffix optional)")
        ->required();
    rep->add_option("--format", format, "md, csv, or json")->check(CLI::IsMember({"md", "markdown", "csv", "json"}));
    rep->add_option("--out", report_out, "Write the report here instead of stdout");

    std::string sd_schema, sd_corpus, sd_query, sd_strategy = "random", sd_separator = " ";
    std::size_t sd_k = 5, sd_dim = 512;
    std::uint64_t sd_seed = 0;
    bool sd_flip = false;
    auto* sel = app.add_subcommand("select-demos", "Preview demonstration selection for a query");
    sel->add_option("--schema", sd_schema, "Task schema JSON")->required();
    sel->add_option("--corpus", sd_corpus, "Corpus JSONL")->required();
    sel->add_option("--query-id", sd_query, "Query instance id (default: first eval instance)");
    sel->add_option("--strategy", sd_strategy,
                    "random, retrieval, homo_random, homo_retrieval, hetero_random, hetero_retrieval");
    sel->add_option("--k", sd_k, "Number of demonstrations");
    sel->add_option("--seed", sd_seed, "Seed for random strategies and flipping");
    sel->add_flag("--flip", sd_flip, "Replace every demo label with a wrong one");
    sel->add_option("--separator", sd_separator, "Field separator for embedded text");
    sel->add_option("--dim", sd_dim, "Trigram embedding dimension");

    std::string vs_schema;
    auto* val = app.add_subcommand("validate-schema", "Validate a task schema file");
    val->add_option("--schema", vs_schema, "Task schema JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (dec->parsed()) return cmd_decompose(before_path, after_path, out_path);
        if (rep->parsed())
            return cmd_report(artifacts, before_cell, after_cell, format, report_out);
        if (sel->parsed())
            return cmd_select_demos(sd_schema, sd_corpus, sd_query, sd_strategy, sd_k, sd_seed,
                                    sd_flip, sd_separator, sd_dim);
        if (val->parsed()) return cmd_validate_schema(vs_schema);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
