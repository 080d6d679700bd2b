#include "icld/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "icld/errors.hpp"
#include "icld/rng.hpp"
#include "icld/text.hpp"

namespace icld {

// ordered_json keeps object-member order, which is what makes
// input_fields an ordered map.
using ojson = nlohmann::ordered_json;

const CanonicalLabel& gold_label(const GoldTarget& g) {
    if (const auto* l = std::get_if<CanonicalLabel>(&g)) return *l;
    throw ValidationError("gold target is not a classification label");
}

const std::vector<SpanLabelPair>& gold_pairs(const GoldTarget& g) {
    if (const auto* p = std::get_if<std::vector<SpanLabelPair>>(&g)) return *p;
    throw ValidationError("gold target is not a span-label pair list");
}

const std::vector<std::string>& gold_references(const GoldTarget& g) {
    if (const auto* r = std::get_if<std::vector<std::string>>(&g)) return *r;
    throw ValidationError("gold target is not a reference list");
}

bool holds_label(const GoldTarget& g) { return std::holds_alternative<CanonicalLabel>(g); }

std::string concat_fields(const Instance& inst, std::string_view separator) {
    std::string out;
    for (std::size_t i = 0; i < inst.input_fields.size(); ++i) {
        if (i > 0) out += separator;
        out += inst.input_fields[i].second;
    }
    return out;
}

CorpusHandle::CorpusHandle(std::vector<Instance> train, std::vector<Instance> eval)
    : train_(std::move(train)), eval_(std::move(eval)) {
    by_id_.reserve(train_.size() + eval_.size());
    for (const auto& i : train_) by_id_.emplace(i.instance_id, &i);
    for (const auto& i : eval_) by_id_.emplace(i.instance_id, &i);
}

const Instance* CorpusHandle::find(std::string_view instance_id) const {
    auto it = by_id_.find(std::string(instance_id));
    return it == by_id_.end() ? nullptr : it->second;
}

namespace {

GoldTarget parse_gold(const ojson& g, const TaskSchema& schema, const std::string& id) {
    if (g.contains("label")) {
        CanonicalLabel label{normalize_label_surface(g.at("label").get<std::string>())};
        if (!schema.has_label(label.value))
            throw ValidationError("instance " + id + ": gold label '" + label.value +
                                  "' not in schema label space");
        return label;
    }
    if (g.contains("pairs")) {
        std::vector<SpanLabelPair> pairs;
        for (const auto& p : g.at("pairs")) {
            SpanLabelPair pair;
            pair.span = trim(p.at("span").get<std::string>());
            if (pair.span.empty())
                throw ValidationError("instance " + id + ": empty gold span");
            pair.label = {normalize_label_surface(p.at("label").get<std::string>())};
            if (!schema.has_label(pair.label.value))
                throw ValidationError("instance " + id + ": gold pair label '" +
                                      pair.label.value + "' not in schema label space");
            pairs.push_back(std::move(pair));
        }
        return pairs;
    }
    if (g.contains("references")) {
        std::vector<std::string> refs;
        for (const auto& r : g.at("references")) refs.push_back(r.get<std::string>());
        if (refs.empty())
            throw ValidationError("instance " + id + ": references is empty");
        return refs;
    }
    throw ParseError("instance " + id + ": gold must contain label, pairs, or references");
}

void check_gold_kind(const GoldTarget& gold, const TaskSchema& schema, const std::string& id) {
    bool ok = false;
    switch (schema.task_kind) {
        case TaskKind::classification: ok = std::holds_alternative<CanonicalLabel>(gold); break;
        case TaskKind::sequence_labeling:
            ok = std::holds_alternative<std::vector<SpanLabelPair>>(gold);
            break;
        case TaskKind::generation:
            ok = std::holds_alternative<std::vector<std::string>>(gold);
            break;
    }
    if (!ok)
        throw ValidationError("instance " + id + ": gold kind does not match task_kind " +
                              to_string(schema.task_kind));
}

}  // namespace

CorpusHandle load_corpus(const std::string& path, const TaskSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file: " + path);

    std::vector<Instance> train;
    std::vector<Instance> eval;
    std::set<std::string> ids;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        ojson doc;
        try {
            doc = ojson::parse(line);
        } catch (const ojson::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        Instance inst;
        std::string split;
        try {
            inst.instance_id = doc.at("id").get<std::string>();
            split = doc.at("split").get<std::string>();
            for (const auto& [name, text] : doc.at("input").items())
                inst.input_fields.emplace_back(name, text.get<std::string>());
            inst.gold = parse_gold(doc.at("gold"), schema, inst.instance_id);
        } catch (const ojson::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (inst.instance_id.empty())
            throw ValidationError(path + ":" + std::to_string(lineno) + ": empty instance id");
        if (!ids.insert(inst.instance_id).second)
            throw ValidationError("duplicate instance_id: " + inst.instance_id);
        if (inst.input_fields.empty())
            throw ValidationError("instance " + inst.instance_id + ": input is empty");
        check_gold_kind(inst.gold, schema, inst.instance_id);

        if (split == "train") {
            train.push_back(std::move(inst));
        } else if (split == "eval") {
            eval.push_back(std::move(inst));
        } else {
            throw ParseError("instance " + inst.instance_id + ": split must be train or eval, got '" +
                             split + "'");
        }
    }
    if (train.empty() && eval.empty())
        throw ValidationError("corpus file has no instances: " + path);
    return CorpusHandle(std::move(train), std::move(eval));
}

std::vector<Instance> sample_eval(const CorpusHandle& handle, std::size_t n, std::uint64_t seed) {
    const auto& eval = handle.eval();
    if (n > eval.size())
        throw SizeError("sample of " + std::to_string(n) + " requested from eval set of " +
                        std::to_string(eval.size()));
    SplitMix64 rng(seed);
    auto idx = sample_indices(eval.size(), n, rng);
    std::vector<Instance> out;
    out.reserve(n);
    for (auto i : idx) out.push_back(eval[i]);
    return out;
}

}  // namespace icld
