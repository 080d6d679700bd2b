#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "icld/errors.hpp"
#include "icld/schema.hpp"
#include "test_util.hpp"

using namespace icld;
using nlohmann::json;

namespace {

TaskSchema minimal_classification() {
    TaskSchema s;
    s.task_id = "toy";
    s.task_kind = TaskKind::classification;
    s.labels = {{"alpha"}, {"beta"}};
    s.format_patterns[{"alpha"}] = {"alpha"};
    s.format_patterns[{"beta"}] = {"beta"};
    s.instruction = "Pick alpha or beta.";
    s.demo_template = "Input: {text}\nLabel: {label}";
    return s;
}

}  // namespace

TEST_SUITE("schema") {

TEST_CASE("task kind strings round-trip") {
    for (auto kind :
         {TaskKind::classification, TaskKind::sequence_labeling, TaskKind::generation})
        CHECK(task_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(task_kind_from_string("regression"), ParseError);
}

TEST_CASE("every fixture schema loads and validates") {
    struct Expect {
        const char* file;
        TaskKind kind;
        std::size_t labels;
    };
    const Expect expectations[] = {
        {"schemas/sst2.json", TaskKind::classification, 2},
        {"schemas/rte.json", TaskKind::classification, 2},
        {"schemas/agnews.json", TaskKind::classification, 4},
        {"schemas/conll03.json", TaskKind::sequence_labeling, 4},
        {"schemas/rest14.json", TaskKind::sequence_labeling, 4},
        {"schemas/rocstories.json", TaskKind::generation, 0},
        {"schemas/samsum.json", TaskKind::generation, 0},
    };
    for (const auto& e : expectations) {
        CAPTURE(e.file);
        TaskSchema s = load_schema(fixture_path(e.file));
        CHECK(s.task_kind == e.kind);
        CHECK(s.labels.size() == e.labels);
        CHECK_FALSE(s.demo_template.empty());
    }
}

TEST_CASE("json round-trip preserves the schema") {
    TaskSchema s = load_schema(fixture_path("schemas/rte.json"));
    TaskSchema back = schema_from_json(schema_to_json(s));
    CHECK(back == s);
}

TEST_CASE("save/load round-trip through a file") {
    TaskSchema s = load_schema(fixture_path("schemas/conll03.json"));
    auto dir = make_temp_dir("schema");
    auto path = (dir / "conll03.json").string();
    save_schema(s, path);
    CHECK(load_schema(path) == s);
    std::filesystem::remove_all(dir);
}

TEST_CASE("loading normalizes label and pattern surfaces") {
    json doc = {
        {"task_id", "norm"},
        {"task_kind", "classification"},
        {"labels", json::array({"  Alpha.", "BETA"})},
        {"format_patterns", {{"Alpha", json::array({"'Alpha'"})}, {"beta", json::array({"Beta!"})}}},
        {"instruction", "x"},
        {"demo_template", "{text} {label}"},
    };
    TaskSchema s = schema_from_json(doc);
    CHECK(s.labels[0].value == "alpha");
    CHECK(s.labels[1].value == "beta");
    CHECK(s.format_patterns.at({"alpha"}) == std::vector<std::string>{"alpha"});
    CHECK(s.format_patterns.at({"beta"}) == std::vector<std::string>{"beta"});
}

TEST_CASE("validation rejects structural defects") {
    SUBCASE("empty task id") {
        auto s = minimal_classification();
        s.task_id = "";
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("classification without labels") {
        auto s = minimal_classification();
        s.labels.clear();
        s.format_patterns.clear();
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("duplicate label") {
        auto s = minimal_classification();
        s.labels.push_back({"alpha"});
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("label missing its pattern list") {
        auto s = minimal_classification();
        s.format_patterns.erase({"beta"});
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("pattern shared by two labels") {
        auto s = minimal_classification();
        s.format_patterns[{"beta"}] = {"beta", "alpha"};
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("duplicate pattern under one label") {
        auto s = minimal_classification();
        s.format_patterns[{"alpha"}] = {"alpha", "alpha"};
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("synonym pointing outside the label set") {
        auto s = minimal_classification();
        s.synonyms["gamma-ish"] = {"gamma"};
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("non-canonical label value") {
        auto s = minimal_classification();
        s.labels[0].value = "Alpha";
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("empty demo template") {
        auto s = minimal_classification();
        s.demo_template = "";
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
    SUBCASE("generation task with labels") {
        auto s = minimal_classification();
        s.task_kind = TaskKind::generation;
        CHECK_THROWS_AS(validate_schema(s), ValidationError);
    }
}

TEST_CASE("first_pattern_of returns the configured verbalizer") {
    TaskSchema s = load_schema(fixture_path("schemas/rte.json"));
    CHECK(s.first_pattern_of({"non-entailment"}) == "non-entailment");
    CHECK(s.first_pattern_of({"entailment"}) == "entailment");
    CHECK_THROWS_AS(s.first_pattern_of({"missing"}), ValidationError);
}

TEST_CASE("canonicalize resolves patterns, label values, and synonyms") {
    TaskSchema rte = load_schema(fixture_path("schemas/rte.json"));
    CHECK(canonicalize(rte, "non-entailment") == CanonicalLabel{"non-entailment"});
    CHECK(canonicalize(rte, "true") == CanonicalLabel{"entailment"});
    CHECK(canonicalize(rte, "  Entailment.") == CanonicalLabel{"entailment"});
    CHECK(canonicalize(rte, "yes") == CanonicalLabel{"entailment"});
    CHECK(canonicalize(rte, "maybe") == std::nullopt);

    TaskSchema conll = load_schema(fixture_path("schemas/conll03.json"));
    CHECK(canonicalize(conll, "country") == CanonicalLabel{"location"});
    CHECK(canonicalize(conll, "LOC") == CanonicalLabel{"location"});
    CHECK(canonicalize(conll, "Sports") == std::nullopt);

    // A label value resolves even when it is not listed as a pattern.
    TaskSchema s = minimal_classification();
    s.format_patterns[{"alpha"}] = {"first-choice"};
    validate_schema(s);
    CHECK(canonicalize(s, "alpha") == CanonicalLabel{"alpha"});
}

TEST_CASE("malformed documents raise ParseError") {
    CHECK_THROWS_AS(schema_from_json(json::array()), ParseError);
    json doc = {{"task_id", "x"}};  // missing task_kind
    CHECK_THROWS_AS(schema_from_json(doc), ParseError);
}

TEST_CASE("load_schema on a missing file throws") {
    CHECK_THROWS(load_schema("/nonexistent/schema.json"));
}

}  // TEST_SUITE
