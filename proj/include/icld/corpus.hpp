#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "icld/schema.hpp"

namespace icld {

struct SpanLabelPair {
    std::string span;
    CanonicalLabel label;
    bool operator==(const SpanLabelPair&) const = default;
};

// Exactly one alternative is live, matching the task kind:
// classification label, span-label pairs, or generation references.
using GoldTarget =
    std::variant<CanonicalLabel, std::vector<SpanLabelPair>, std::vector<std::string>>;

const CanonicalLabel& gold_label(const GoldTarget& g);
const std::vector<SpanLabelPair>& gold_pairs(const GoldTarget& g);
const std::vector<std::string>& gold_references(const GoldTarget& g);
bool holds_label(const GoldTarget& g);

struct Instance {
    std::string instance_id;
    // ordered (field name, text); order is the file order
    std::vector<std::pair<std::string, std::string>> input_fields;
    GoldTarget gold;
};

// Input fields joined with a separator, in field order. The default single
// space is what retrieval embeds for pair-input tasks.
std::string concat_fields(const Instance& inst, std::string_view separator = " ");

// Train pool plus eval set in file order. Immutable after load.
class CorpusHandle {
public:
    CorpusHandle(std::vector<Instance> train, std::vector<Instance> eval);

    const std::vector<Instance>& train() const { return train_; }
    const std::vector<Instance>& eval() const { return eval_; }
    // nullptr when absent
    const Instance* find(std::string_view instance_id) const;

private:
    std::vector<Instance> train_;
    std::vector<Instance> eval_;
    std::unordered_map<std::string, const Instance*> by_id_;
};

// JSONL, one instance per line:
//   {"id": ..., "split": "train"|"eval", "input": {field: text, ...}, "gold": {...}}
// gold is one of {"label": ...}, {"pairs": [{"span","label"},...]},
// {"references": [...]}. Gold targets are validated against the schema.
CorpusHandle load_corpus(const std::string& path, const TaskSchema& schema);

// n distinct eval instances; identical (corpus, n, seed) give an identical
// order. Partial Fisher-Yates over eval positions, SplitMix64(seed).
std::vector<Instance> sample_eval(const CorpusHandle& handle, std::size_t n, std::uint64_t seed);

}  // namespace icld
