#include "icld/record.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "icld/errors.hpp"
#include "icld/text.hpp"

namespace icld {

using json = nlohmann::json;

json categorization_to_json(const Categorization& c) {
    json j;
    j["category"] = to_string(c.category);
    if (c.extracted_label) j["extracted_label"] = c.extracted_label->value;
    if (c.match_position) j["match_position"] = *c.match_position;
    if (c.correct) j["correct"] = *c.correct;
    return j;
}

Categorization categorization_from_json(const json& j) {
    Categorization c;
    c.category = category_from_string(j.at("category").get<std::string>());
    if (j.contains("extracted_label"))
        c.extracted_label = CanonicalLabel{j.at("extracted_label").get<std::string>()};
    if (j.contains("match_position")) c.match_position = j.at("match_position").get<std::size_t>();
    if (j.contains("correct")) c.correct = j.at("correct").get<bool>();
    return c;
}

namespace {

PairCategory pair_category_from_string(const std::string& s) {
    if (s == "IFOOS") return PairCategory::IFOOS;
    if (s == "ISIF_wrong_span") return PairCategory::ISIF_wrong_span;
    if (s == "ISIF_right_span_wrong_label") return PairCategory::ISIF_right_span_wrong_label;
    if (s == "ISIF_true_positive") return PairCategory::ISIF_true_positive;
    throw ParseError("unknown pair category: " + s);
}

}  // namespace

json seq_categorization_to_json(const SeqCategorization& c) {
    json j;
    j["oof"] = c.oof;
    j["gold_pair_count"] = c.gold_pair_count;
    json pairs = json::array();
    for (const auto& p : c.pairs) {
        json pj;
        pj["span"] = p.pair.span;
        pj["label"] = p.pair.label.value;
        if (p.canonical) pj["canonical"] = p.canonical->value;
        pj["category"] = to_string(p.category);
        pairs.push_back(std::move(pj));
    }
    j["pairs"] = std::move(pairs);
    return j;
}

SeqCategorization seq_categorization_from_json(const json& j) {
    SeqCategorization c;
    c.oof = j.at("oof").get<bool>();
    c.gold_pair_count = j.at("gold_pair_count").get<std::size_t>();
    for (const auto& pj : j.at("pairs")) {
        CategorizedPair p;
        p.pair.span = pj.at("span").get<std::string>();
        p.pair.label = CanonicalLabel{pj.at("label").get<std::string>()};
        if (pj.contains("canonical"))
            p.canonical = CanonicalLabel{pj.at("canonical").get<std::string>()};
        p.category = pair_category_from_string(pj.at("category").get<std::string>());
        c.pairs.push_back(std::move(p));
    }
    return c;
}

json record_to_json(const RunRecord& record) {
    json j;
    j["instance_id"] = record.instance_id;
    j["variant"] = record.variant;
    if (record.strategy) j["strategy"] = *record.strategy;
    if (record.seed) j["seed"] = *record.seed;
    j["k"] = record.k;
    j["prompt_hash"] = record.prompt_hash;
    j["response"] = record.response_text;
    j["backend"] = record.backend_id;
    j["refusal"] = record.refusal;
    if (record.classification) j["classification"] = categorization_to_json(*record.classification);
    if (record.sequence) j["sequence"] = seq_categorization_to_json(*record.sequence);
    json demos = json::array();
    for (const auto& d : record.demos) {
        json dj;
        dj["instance_id"] = d.instance_id;
        dj["label"] = d.presented_label;
        if (d.similarity) dj["similarity"] = *d.similarity;
        demos.push_back(std::move(dj));
    }
    j["demos"] = std::move(demos);
    return j;
}

RunRecord record_from_json(const json& j) {
    RunRecord record;
    record.instance_id = j.at("instance_id").get<std::string>();
    record.variant = j.at("variant").get<std::string>();
    if (j.contains("strategy")) record.strategy = j.at("strategy").get<std::string>();
    if (j.contains("seed")) record.seed = j.at("seed").get<std::uint64_t>();
    record.k = j.at("k").get<std::size_t>();
    record.prompt_hash = j.at("prompt_hash").get<std::string>();
    record.response_text = j.at("response").get<std::string>();
    record.backend_id = j.at("backend").get<std::string>();
    record.refusal = j.at("refusal").get<bool>();
    if (j.contains("classification"))
        record.classification = categorization_from_json(j.at("classification"));
    if (j.contains("sequence")) record.sequence = seq_categorization_from_json(j.at("sequence"));
    for (const auto& dj : j.at("demos")) {
        DemoProvenance d;
        d.instance_id = dj.at("instance_id").get<std::string>();
        d.presented_label = dj.at("label").get<std::string>();
        if (dj.contains("similarity")) d.similarity = dj.at("similarity").get<double>();
        record.demos.push_back(std::move(d));
    }
    return record;
}

std::string record_to_line(const RunRecord& record) { return record_to_json(record).dump(); }

RunRecord record_from_line(const std::string& line) {
    try {
        return record_from_json(json::parse(line));
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed run record: ") + e.what());
    }
}

std::vector<RunRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open record file: " + path);
    std::vector<RunRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        records.push_back(record_from_line(line));
    }
    return records;
}

void save_records(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write record file: " + path);
    for (const auto& record : records) out << record_to_line(record) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace icld
