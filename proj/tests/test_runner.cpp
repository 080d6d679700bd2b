#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "icld/corpus.hpp"
#include "icld/errors.hpp"
#include "icld/record.hpp"
#include "icld/runner.hpp"
#include "icld/schema.hpp"
#include "test_util.hpp"

using namespace icld;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RunConfig base_synthetic_config(const std::string& out_dir) {
    RunConfig c;
    c.schema_path = fixture_path("schemas/sst2.json");
    c.corpus_path = fixture_path("corpora/sst2_small.jsonl");
    c.output_dir = out_dir;
    SyntheticConfig syn;
    syn.params.p_space = 0.7;
    syn.params.p_format = 0.9;
    syn.params.base_accuracy = 0.55;
    syn.params.demo_follow_strength = 0.2;
    syn.params.seed = 7;
    syn.few_shot.p_space = 0.95;
    syn.few_shot.p_format = 0.98;
    c.synthetic = syn;
    c.variants = {{PromptVariant::zero_shot, true, SystemUserSplit::single_message},
                  {PromptVariant::icl, true, SystemUserSplit::single_message}};
    c.strategies = {{SelectionStrategy::random, false},
                    {SelectionStrategy::retrieval, false}};
    c.seeds = {1, 2};
    c.k_values = {3};
    return c;
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        out[entry.path().filename().string()] = slurp(entry.path().string());
    return out;
}

std::vector<std::string> demo_ids(const RunRecord& r) {
    std::vector<std::string> out;
    for (const auto& d : r.demos) out.push_back(d.instance_id);
    return out;
}

Categorization mk_cat(Category category, bool correct = false) {
    Categorization c;
    c.category = category;
    if (category == Category::ISIF) {
        c.extracted_label = CanonicalLabel{"x"};
        c.match_position = 0;
        c.correct = correct;
    }
    return c;
}

RunRecord mk_record(const std::string& id, Categorization cat) {
    RunRecord r;
    r.instance_id = id;
    r.variant = "zero_shot";
    r.backend_id = "synthetic";
    r.prompt_hash = "0";
    r.classification = cat;
    return r;
}

// Loopback chat server (same shape as in the HTTP tests).
struct TestServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("fixture config loads and its canonical JSON round-trips") {
    RunConfig c = load_config(fixture_path("configs/sst2_synthetic.json"));
    validate(c);
    REQUIRE(c.synthetic.has_value());
    CHECK(c.synthetic->params.p_space == doctest::Approx(0.7));
    CHECK(c.synthetic->params.seed == 7);
    CHECK(c.synthetic->few_shot.p_space == doctest::Approx(0.95));
    CHECK(c.variants.size() == 2);
    CHECK(c.strategies.size() == 2);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.k_values == std::vector<std::size_t>{4});
    CHECK(c.embedding.provider == "trigram");
    CHECK(c.embedding.dim == 512);

    json j1 = config_to_json(c);
    RunConfig c2 = config_from_json(j1);
    CHECK(config_to_json(c2).dump() == j1.dump());
}

TEST_CASE("enumerate_cells expands variants, strategies, seeds, and k") {
    RunConfig c = load_config(fixture_path("configs/sst2_synthetic.json"));
    auto cells = enumerate_cells(c);
    std::vector<std::string> ids;
    for (const auto& cell : cells) ids.push_back(cell.id);
    CHECK(ids == std::vector<std::string>{"zero_shot", "icl-random-k4-s1", "icl-random-k4-s2",
                                          "icl-random-k4-s3", "icl-retrieval-k4"});

    CHECK_FALSE(cells[0].strategy.has_value());
    CHECK_FALSE(cells[0].seed.has_value());
    CHECK(cells[0].k == 0);
    CHECK(cells[1].seed == 1);
    CHECK(cells[1].k == 4);
    CHECK_FALSE(cells[4].seed.has_value());  // retrieval is deterministic
    CHECK(cells[4].k == 4);

    SUBCASE("flip labels mark the cell id") {
        c.strategies = {{SelectionStrategy::random, true}};
        auto flipped = enumerate_cells(c);
        CHECK(flipped[1].id == "icl-random-flip-k4-s1");
    }
    SUBCASE("demo-free variants collapse to one cell each") {
        c.variants = {{PromptVariant::di, true, SystemUserSplit::single_message}};
        auto di_cells = enumerate_cells(c);
        REQUIRE(di_cells.size() == 1);
        CHECK(di_cells[0].id == "di");
    }
    SUBCASE("duplicate cell ids are rejected") {
        c.variants.push_back({PromptVariant::zero_shot, false, SystemUserSplit::single_message});
        CHECK_THROWS_AS(enumerate_cells(c), ConfigError);
    }
}

TEST_CASE("validate rejects inconsistent configs") {
    auto good = [] { return base_synthetic_config("/tmp/unused"); };
    validate(good());  // baseline sanity

    auto c = good();
    c.http = HttpBackendConfig{};  // both backends
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.synthetic.reset();  // no backend
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.variants.clear();
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.seeds.clear();
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.k_values = {3, 0};
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.parallelism = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.strategies.clear();  // icl variant present
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.embedding.provider = "bogus";
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.embedding.dim = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);

    c = good();
    c.synthetic->params.p_space = 1.5;
    CHECK_THROWS_AS(validate(c), ValidationError);
}

TEST_CASE("run_experiment writes deterministic artifacts and resumes") {
    fs::path dir_a = make_temp_dir("run-a");
    fs::path dir_b = make_temp_dir("run-b");
    RunConfig c = base_synthetic_config((dir_a / "out").string());

    RunSummary s1 = run_experiment(c);
    CHECK(s1.cells_total == 4);
    CHECK(s1.cells_written == 4);
    CHECK(s1.cells_skipped == 0);
    CHECK(s1.records_written == 32);  // 4 cells x 8 eval instances

    json manifest = json::parse(slurp((fs::path(c.output_dir) / "manifest.json").string()));
    CHECK(manifest.at("tool_version") == kToolVersion);
    CHECK(manifest.at("task_id") == "sst2");
    CHECK(manifest.at("backend") == "synthetic");
    CHECK(manifest.at("instances") == 8);
    REQUIRE(manifest.at("cells").size() == 4);
    CHECK(manifest.at("cells")[0].at("path") == "zero_shot.jsonl");
    CHECK(manifest.at("config_hash").get<std::string>().size() == 16);

    auto first = dir_bytes(c.output_dir);
    CHECK(first.size() == 5);  // 4 shards + manifest

    // resume: drop one shard and the manifest, rerun, converge to the same bytes
    fs::remove(fs::path(c.output_dir) / "icl-random-k3-s1.jsonl");
    fs::remove(fs::path(c.output_dir) / "manifest.json");
    RunSummary s2 = run_experiment(c);
    CHECK(s2.cells_written == 1);
    CHECK(s2.cells_skipped == 3);
    CHECK(dir_bytes(c.output_dir) == first);

    // a parallel run produces byte-identical shards
    RunConfig cp = base_synthetic_config((dir_b / "out").string());
    cp.parallelism = 4;
    run_experiment(cp);
    auto parallel = dir_bytes(cp.output_dir);
    for (const auto& [name, bytes] : first)
        if (name != "manifest.json")  // config hash differs (output_dir, parallelism)
            CHECK(parallel.at(name) == bytes);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("run records carry the right shape per cell") {
    fs::path dir = make_temp_dir("run-shape");
    RunConfig c = base_synthetic_config((dir / "out").string());
    run_experiment(c);

    TaskSchema schema = load_schema(c.schema_path);
    CorpusHandle corpus = load_corpus(c.corpus_path, schema);
    std::map<std::string, std::string> train_gold;
    for (const auto& inst : corpus.train())
        train_gold[inst.instance_id] = gold_label(inst.gold).value;

    auto zs = load_records((fs::path(c.output_dir) / "zero_shot.jsonl").string());
    REQUIRE(zs.size() == 8);
    CHECK(zs.front().instance_id == "sst2-eval-0001");
    CHECK(zs.back().instance_id == "sst2-eval-0008");
    for (const auto& r : zs) {
        CHECK(r.variant == "zero_shot");
        CHECK(r.k == 0);
        CHECK_FALSE(r.strategy.has_value());
        CHECK_FALSE(r.seed.has_value());
        CHECK(r.demos.empty());
        CHECK(r.classification.has_value());
        CHECK(r.backend_id == "synthetic");
        CHECK(r.prompt_hash.size() == 16);
    }

    auto rnd = load_records((fs::path(c.output_dir) / "icl-random-k3-s1.jsonl").string());
    REQUIRE(rnd.size() == 8);
    for (const auto& r : rnd) {
        CHECK(r.variant == "icl");
        CHECK(r.strategy == "random");
        CHECK(r.seed == 1);
        CHECK(r.k == 3);
        REQUIRE(r.demos.size() == 3);
        for (const auto& d : r.demos) {
            CHECK(train_gold.count(d.instance_id) == 1);
            CHECK(d.presented_label == train_gold.at(d.instance_id));  // unflipped
            CHECK_FALSE(d.similarity.has_value());
        }
    }
    // per_seed mode shares one demo set across the whole eval split
    for (const auto& r : rnd) CHECK(demo_ids(r) == demo_ids(rnd.front()));

    auto ret = load_records((fs::path(c.output_dir) / "icl-retrieval-k3.jsonl").string());
    REQUIRE(ret.size() == 8);
    for (const auto& r : ret) {
        CHECK(r.strategy == "retrieval");
        CHECK_FALSE(r.seed.has_value());
        REQUIRE(r.demos.size() == 3);
        double prev = 2.0;
        for (const auto& d : r.demos) {
            REQUIRE(d.similarity.has_value());
            CHECK(*d.similarity <= prev);
            CHECK(d.instance_id != r.instance_id);
            prev = *d.similarity;
        }
    }

    fs::remove_all(dir);
}

TEST_CASE("per-instance demo mode varies the demo set across queries") {
    fs::path dir = make_temp_dir("run-perinst");
    RunConfig c = base_synthetic_config((dir / "out").string());
    c.strategies = {{SelectionStrategy::random, false}};
    c.seeds = {1};
    c.demo_mode = DemoMode::per_instance;
    run_experiment(c);

    auto records = load_records((fs::path(c.output_dir) / "icl-random-k3-s1.jsonl").string());
    REQUIRE(records.size() == 8);
    bool any_differs = false;
    for (const auto& r : records)
        if (demo_ids(r) != demo_ids(records.front())) any_differs = true;
    CHECK(any_differs);
    fs::remove_all(dir);
}

TEST_CASE("label flipping shows up in demo provenance") {
    fs::path dir = make_temp_dir("run-flip");
    RunConfig c = base_synthetic_config((dir / "out").string());
    c.variants = {{PromptVariant::icl, true, SystemUserSplit::single_message}};
    c.strategies = {{SelectionStrategy::random, true}};
    c.seeds = {5};
    c.k_values = {4};
    run_experiment(c);

    TaskSchema schema = load_schema(c.schema_path);
    CorpusHandle corpus = load_corpus(c.corpus_path, schema);
    std::map<std::string, std::string> train_gold;
    for (const auto& inst : corpus.train())
        train_gold[inst.instance_id] = gold_label(inst.gold).value;

    auto records = load_records((fs::path(c.output_dir) / "icl-random-flip-k4-s5.jsonl").string());
    REQUIRE(records.size() == 8);
    for (const auto& r : records) {
        CHECK(r.strategy == "random-flip");
        for (const auto& d : r.demos) {
            CHECK(d.presented_label != train_gold.at(d.instance_id));
            CHECK((d.presented_label == "positive" || d.presented_label == "negative"));
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("eval_limit truncates the eval split") {
    fs::path dir = make_temp_dir("run-limit");
    RunConfig c = base_synthetic_config((dir / "out").string());
    c.variants = {{PromptVariant::zero_shot, true, SystemUserSplit::single_message}};
    c.eval_limit = 3;
    RunSummary s = run_experiment(c);
    CHECK(s.records_written == 3);

    json manifest = json::parse(slurp((fs::path(c.output_dir) / "manifest.json").string()));
    CHECK(manifest.at("instances") == 3);
    auto records = load_records((fs::path(c.output_dir) / "zero_shot.jsonl").string());
    REQUIRE(records.size() == 3);
    CHECK(records[0].instance_id == "sst2-eval-0001");
    CHECK(records[2].instance_id == "sst2-eval-0003");
    fs::remove_all(dir);
}

TEST_CASE("class filters and flips demand a classification task") {
    fs::path dir = make_temp_dir("run-genguard");
    RunConfig c = base_synthetic_config((dir / "out").string());
    c.schema_path = fixture_path("schemas/rocstories.json");
    c.corpus_path = fixture_path("corpora/rocstories_small.jsonl");
    c.variants = {{PromptVariant::icl, true, SystemUserSplit::single_message}};
    c.seeds = {1};

    c.strategies = {{SelectionStrategy::homo_random, false}};
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c.strategies = {{SelectionStrategy::random, true}};
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("http backend runs end-to-end with an api key from the environment") {
    TestServer ts;
    std::atomic<int> calls{0};
    std::string seen_auth;
    ts.server.Post("/v1/chat/completions",
                   [&](const httplib::Request& req, httplib::Response& res) {
                       calls.fetch_add(1);
                       seen_auth = req.get_header_value("Authorization");
                       json out;
                       out["choices"][0]["message"]["content"] = "positive";
                       res.set_content(out.dump(), "application/json");
                   });
    ts.start();
    setenv("ICLD_TEST_API_KEY", "tok-123", 1);

    fs::path dir = make_temp_dir("run-http");
    RunConfig c = base_synthetic_config((dir / "out").string());
    c.synthetic.reset();
    HttpBackendConfig http;
    http.chat.base_url = ts.base_url();
    http.chat.model = "test-model";
    http.chat.backoff_initial_ms = 1;
    http.api_key_env = "ICLD_TEST_API_KEY";
    c.http = http;
    c.variants = {{PromptVariant::zero_shot, true, SystemUserSplit::single_message}};
    c.eval_limit = 2;

    RunSummary s = run_experiment(c);
    CHECK(s.records_written == 2);
    CHECK(calls.load() == 2);
    CHECK(seen_auth == "Bearer tok-123");

    auto records = load_records((fs::path(c.output_dir) / "zero_shot.jsonl").string());
    REQUIRE(records.size() == 2);
    for (const auto& r : records) {
        CHECK(r.backend_id == "test-model");
        CHECK(r.response_text == "positive");
        REQUIRE(r.classification.has_value());
        CHECK(r.classification->category == Category::ISIF);
    }
    json manifest = json::parse(slurp((fs::path(c.output_dir) / "manifest.json").string()));
    CHECK(manifest.at("backend") == "test-model");
    fs::remove_all(dir);
}

TEST_CASE("generation tasks run over http with reference-labeled demos") {
    TestServer ts;
    ts.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                       json out;
                       out["choices"][0]["message"]["content"] =
                           "And they lived happily ever after.";
                       res.set_content(out.dump(), "application/json");
                   });
    ts.start();

    fs::path dir = make_temp_dir("run-gen");
    RunConfig c = base_synthetic_config((dir / "out").string());
    c.schema_path = fixture_path("schemas/rocstories.json");
    c.corpus_path = fixture_path("corpora/rocstories_small.jsonl");
    c.synthetic.reset();
    HttpBackendConfig http;
    http.chat.base_url = ts.base_url();
    http.chat.model = "test-model";
    c.http = http;
    c.variants = {{PromptVariant::icl, true, SystemUserSplit::single_message}};
    c.strategies = {{SelectionStrategy::random, false}};
    c.seeds = {1};
    c.k_values = {2};
    run_experiment(c);

    TaskSchema schema = load_schema(c.schema_path);
    CorpusHandle corpus = load_corpus(c.corpus_path, schema);
    std::map<std::string, std::string> first_ref;
    for (const auto& inst : corpus.train())
        first_ref[inst.instance_id] = gold_references(inst.gold).front();

    auto records = load_records((fs::path(c.output_dir) / "icl-random-k2-s1.jsonl").string());
    REQUIRE(records.size() == 3);
    for (const auto& r : records) {
        CHECK_FALSE(r.classification.has_value());
        CHECK_FALSE(r.sequence.has_value());
        CHECK(r.response_text == "And they lived happily ever after.");
        REQUIRE(r.demos.size() == 2);
        for (const auto& d : r.demos) CHECK(d.presented_label == first_ref.at(d.instance_id));
    }
    fs::remove_all(dir);
}

TEST_CASE("an unreachable http backend fails fast") {
    fs::path dir = make_temp_dir("run-unreach");
    RunConfig c = base_synthetic_config((dir / "out").string());
    c.synthetic.reset();
    HttpBackendConfig http;
    http.chat.base_url = "http://127.0.0.1:1";
    c.http = http;
    c.variants = {{PromptVariant::zero_shot, true, SystemUserSplit::single_message}};
    CHECK_THROWS_AS(run_experiment(c), BackendUnavailableError);
    fs::remove_all(dir);
}

TEST_CASE("aggregate pairs seed groups against a seedless baseline") {
    fs::path dir = make_temp_dir("run-agg");
    RunConfig c = base_synthetic_config((dir / "out").string());
    run_experiment(c);

    AggregateReport rep = aggregate(c.output_dir, "zero_shot", "icl-random-k3");
    CHECK(rep.backend_id == "synthetic");
    CHECK(rep.task_id == "sst2");
    CHECK(rep.before_cell == "zero_shot");
    CHECK(rep.after_cell == "icl-random-k3");
    CHECK(rep.seeds == std::vector<std::uint64_t>{1, 2});
    REQUIRE(rep.per_seed.size() == 2);
    CHECK(rep.mean.n == 8);
    for (const auto& r : rep.per_seed) {
        CHECK(r.n == 8);
        CHECK(std::abs((r.label_space_power + r.format_power + r.discrimination_power) -
                       r.overall_delta) <= 1e-12);
    }
    CHECK(rep.mean.label_space_power ==
          doctest::Approx((rep.per_seed[0].label_space_power +
                           rep.per_seed[1].label_space_power) /
                          2.0));
    CHECK(rep.mean.overall_delta ==
          doctest::Approx((rep.per_seed[0].overall_delta + rep.per_seed[1].overall_delta) / 2.0));

    AggregateReport ret = aggregate(c.output_dir, "zero_shot", "icl-retrieval-k3");
    CHECK(ret.seeds.empty());
    CHECK(ret.per_seed.size() == 1);

    // JSON round-trip
    json j = aggregate_to_json(rep);
    AggregateReport back = aggregate_from_json(j);
    CHECK(aggregate_to_json(back).dump() == j.dump());

    fs::remove_all(dir);
}

TEST_CASE("aggregate validates manifests, shards, and seed pairings") {
    fs::path dir = make_temp_dir("agg-hand");

    // handcrafted artifact: a seedless baseline, a full seed pair, and traps
    auto write_shard = [&](const std::string& name, const std::vector<RunRecord>& records) {
        save_records((dir / (name + ".jsonl")).string(), records);
    };
    std::vector<RunRecord> zs{
        mk_record("i1", mk_cat(Category::OOS)),
        mk_record("i2", mk_cat(Category::ISOOF)),
        mk_record("i3", mk_cat(Category::ISIF, true)),
        mk_record("i4", mk_cat(Category::ISIF, false)),
    };
    std::vector<RunRecord> a1{
        mk_record("i1", mk_cat(Category::ISIF, true)),
        mk_record("i2", mk_cat(Category::ISIF, true)),
        mk_record("i3", mk_cat(Category::ISIF, true)),
        mk_record("i4", mk_cat(Category::ISIF, true)),
    };
    std::vector<RunRecord> a2{
        mk_record("i1", mk_cat(Category::ISIF, false)),
        mk_record("i2", mk_cat(Category::OOS)),
        mk_record("i3", mk_cat(Category::ISIF, true)),
        mk_record("i4", mk_cat(Category::ISIF, false)),
    };
    write_shard("zs", zs);
    write_shard("a-k1-s1", a1);
    write_shard("a-k1-s2", a2);
    write_shard("b-k1-s1", a1);
    write_shard("short", {zs[0], zs[1], zs[2]});

    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config_hash"] = "0";
    manifest["task_id"] = "toy";
    manifest["backend"] = "synthetic";
    manifest["instances"] = 4;
    auto cell = [](const std::string& id, std::optional<std::uint64_t> seed,
                   std::size_t records) {
        json cj;
        cj["id"] = id;
        cj["path"] = id + ".jsonl";
        cj["records"] = records;
        if (seed) cj["seed"] = *seed;
        return cj;
    };
    manifest["cells"] = json::array({cell("zs", std::nullopt, 4), cell("a-k1-s1", 1, 4),
                                     cell("a-k1-s2", 2, 4), cell("b-k1-s1", 1, 4),
                                     cell("short", std::nullopt, 4),
                                     cell("ghost", std::nullopt, 4)});
    {
        std::ofstream out(dir / "manifest.json");
        out << manifest.dump(2) << "\n";
    }

    AggregateReport rep = aggregate(dir.string(), "zs", "a-k1");
    REQUIRE(rep.per_seed.size() == 2);
    CHECK(rep.seeds == std::vector<std::uint64_t>{1, 2});
    // seed 1: every category transition pays off
    CHECK(rep.per_seed[0].label_space_power == 0.25);
    CHECK(rep.per_seed[0].format_power == 0.25);
    CHECK(rep.per_seed[0].discrimination_power == 0.25);
    CHECK(rep.per_seed[0].overall_delta == 0.75);
    CHECK(rep.per_seed[0].new_isif_pct == 0.5);
    CHECK(rep.per_seed[0].w2r == 0.5);
    CHECK(rep.per_seed[0].r2r == 0.5);
    // seed 2: a wash
    CHECK(rep.per_seed[1].label_space_power == 0.0);
    CHECK(rep.per_seed[1].overall_delta == 0.0);
    // means are plain field averages
    CHECK(rep.mean.label_space_power == 0.125);
    CHECK(rep.mean.overall_delta == 0.375);
    CHECK(rep.mean.n == 4);

    // error paths
    CHECK_THROWS_AS(aggregate(dir.string(), "nope", "a-k1"), IncompleteCellError);
    CHECK_THROWS_AS(aggregate(dir.string(), "b-k1", "a-k1"), IncompleteCellError);  // seed gap
    CHECK_THROWS_AS(aggregate(dir.string(), "zs", "short"), IncompleteCellError);   // count lies
    CHECK_THROWS_AS(aggregate(dir.string(), "zs", "ghost"), IncompleteCellError);   // no shard
    fs::path empty_dir = make_temp_dir("agg-empty");
    CHECK_THROWS_AS(aggregate(empty_dir.string(), "a", "b"), IncompleteCellError);  // no manifest

    fs::remove_all(empty_dir);
    fs::remove_all(dir);
}

TEST_CASE("reports render percentages, CSV rows, and JSON") {
    AggregateReport rep;
    rep.backend_id = "synthetic";
    rep.task_id = "sst2";
    rep.before_cell = "zero_shot";
    rep.after_cell = "icl-random-k4";
    rep.seeds = {1, 2};
    DecompositionReport r1;
    r1.label_space_power = 0.0067;
    r1.format_power = 0.0156;
    r1.discrimination_power = 0.0216;
    r1.overall_delta = 0.0439;
    r1.w2r = 0.04;
    r1.r2w = 0.02;
    r1.r2r = 0.6;
    r1.w2w = 0.34;
    r1.new_isif_pct = 0.031;
    r1.isif_pct_before = 0.9;
    r1.isif_pct_after = 0.93;
    r1.n = 872;
    DecompositionReport r2 = r1;
    rep.per_seed = {r1, r2};
    rep.mean = r1;

    std::string md = format_report(rep, ReportFormat::markdown);
    CHECK(md.find("| Model/Backend | Dataset | Discrimination | Label Space | Format | Overall | "
                  "New-ISIF% |") != std::string::npos);
    CHECK(md.find("0.67%") != std::string::npos);
    CHECK(md.find("2.16%") != std::string::npos);
    CHECK(md.find("1.56%") != std::string::npos);
    CHECK(md.find("4.39%") != std::string::npos);
    CHECK(md.find("zero_shot -> icl-random-k4") != std::string::npos);
    CHECK(md.find("n = 872") != std::string::npos);
    CHECK(md.find("| Seed |") != std::string::npos);  // per-seed table when > 1 seed

    std::string csv = format_report(rep, ReportFormat::csv);
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t nl = csv.find('\n', pos);
        if (nl == std::string::npos) {
            lines.push_back(csv.substr(pos));
            break;
        }
        lines.push_back(csv.substr(pos, nl - pos));
        pos = nl + 1;
    }
    REQUIRE(lines.size() == 4);  // header + mean + two seeds
    CHECK(lines[0].rfind("scope,backend,dataset", 0) == 0);
    CHECK(lines[1].rfind("mean,synthetic,sst2,zero_shot,icl-random-k4,", 0) == 0);
    CHECK(lines[2].rfind("s1,", 0) == 0);
    CHECK(lines[3].rfind("s2,", 0) == 0);
    CHECK(std::count(lines[1].begin(), lines[1].end(), ',') == 16);

    std::string js = format_report(rep, ReportFormat::json);
    AggregateReport back = aggregate_from_json(json::parse(js));
    CHECK(back.mean.label_space_power == rep.mean.label_space_power);
    CHECK(back.seeds == rep.seeds);

    CHECK(report_format_from_string("md") == ReportFormat::markdown);
    CHECK(report_format_from_string("markdown") == ReportFormat::markdown);
    CHECK(report_format_from_string("csv") == ReportFormat::csv);
    CHECK(report_format_from_string("json") == ReportFormat::json);
    CHECK_THROWS_AS(report_format_from_string("xml"), ConfigError);

    fs::path dir = make_temp_dir("report-emit");
    std::string out_path = (dir / "report.md").string();
    emit_report(rep, ReportFormat::markdown, out_path);
    CHECK(slurp(out_path) == md);
    fs::remove_all(dir);
}

}  // TEST_SUITE
