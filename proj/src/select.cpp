#include "icld/select.hpp"

#include <algorithm>
#include <unordered_map>

#include "icld/errors.hpp"
#include "icld/rng.hpp"

namespace icld {

std::string to_string(SelectionStrategy strategy) {
    switch (strategy) {
        case SelectionStrategy::random: return "random";
        case SelectionStrategy::retrieval: return "retrieval";
        case SelectionStrategy::homo_random: return "homo_random";
        case SelectionStrategy::homo_retrieval: return "homo_retrieval";
        case SelectionStrategy::hetero_random: return "hetero_random";
        case SelectionStrategy::hetero_retrieval: return "hetero_retrieval";
    }
    throw ConfigError("unknown selection strategy");
}

SelectionStrategy strategy_from_string(const std::string& s) {
    if (s == "random") return SelectionStrategy::random;
    if (s == "retrieval") return SelectionStrategy::retrieval;
    if (s == "homo_random") return SelectionStrategy::homo_random;
    if (s == "homo_retrieval") return SelectionStrategy::homo_retrieval;
    if (s == "hetero_random") return SelectionStrategy::hetero_random;
    if (s == "hetero_retrieval") return SelectionStrategy::hetero_retrieval;
    throw ConfigError("unknown selection strategy: " + s);
}

bool strategy_uses_retrieval(SelectionStrategy strategy) {
    return strategy == SelectionStrategy::retrieval ||
           strategy == SelectionStrategy::homo_retrieval ||
           strategy == SelectionStrategy::hetero_retrieval;
}

bool strategy_is_homo(SelectionStrategy strategy) {
    return strategy == SelectionStrategy::homo_random ||
           strategy == SelectionStrategy::homo_retrieval;
}

bool strategy_is_hetero(SelectionStrategy strategy) {
    return strategy == SelectionStrategy::hetero_random ||
           strategy == SelectionStrategy::hetero_retrieval;
}

std::optional<ClassFilter> filter_for_strategy(SelectionStrategy strategy,
                                               const CanonicalLabel& gold) {
    if (strategy_is_homo(strategy)) return ClassFilter{ClassFilter::Mode::same_as, gold};
    if (strategy_is_hetero(strategy)) return ClassFilter{ClassFilter::Mode::other_than, gold};
    return std::nullopt;
}

namespace {

std::optional<CanonicalLabel> gold_class_of(const Instance& inst) {
    if (holds_label(inst.gold)) return gold_label(inst.gold);
    return std::nullopt;
}

SelectionStrategy random_strategy_for(const std::optional<ClassFilter>& filter) {
    if (!filter) return SelectionStrategy::random;
    return filter->mode == ClassFilter::Mode::same_as ? SelectionStrategy::homo_random
                                                      : SelectionStrategy::hetero_random;
}

SelectionStrategy retrieval_strategy_for(const std::optional<ClassFilter>& filter) {
    if (!filter) return SelectionStrategy::retrieval;
    return filter->mode == ClassFilter::Mode::same_as ? SelectionStrategy::homo_retrieval
                                                      : SelectionStrategy::hetero_retrieval;
}

}  // namespace

DemoSet select_random(const std::vector<Instance>& pool, std::size_t k, std::uint64_t seed,
                      const std::optional<ClassFilter>& filter, std::string_view exclude_id) {
    std::vector<const Instance*> eligible;
    for (const auto& inst : pool) {
        if (!exclude_id.empty() && inst.instance_id == exclude_id) continue;
        if (filter && !filter->admits(gold_class_of(inst))) continue;
        eligible.push_back(&inst);
    }
    if (eligible.size() < k)
        throw PoolTooSmallError("random selection of " + std::to_string(k) + " from " +
                                std::to_string(eligible.size()) + " eligible instances");
    SplitMix64 rng(seed);
    auto idx = sample_indices(eligible.size(), k, rng);

    DemoSet set;
    set.strategy = random_strategy_for(filter);
    set.seed = seed;
    for (auto i : idx) {
        Demonstration demo;
        demo.source = *eligible[i];
        demo.presented_label = demo.source.gold;
        set.demos.push_back(std::move(demo));
    }
    return set;
}

DemoSet select_retrieval(const SimilarityIndex& index, const std::vector<Instance>& pool,
                         const Instance& query, std::size_t k,
                         const std::optional<ClassFilter>& filter) {
    std::unordered_map<std::string_view, const Instance*> by_id;
    by_id.reserve(pool.size());
    for (const auto& inst : pool) by_id.emplace(inst.instance_id, &inst);

    auto query_vec = index.embed_query(query);
    auto ranked = top_k(index, query_vec, k, {query.instance_id}, filter);

    DemoSet set;
    set.strategy = retrieval_strategy_for(filter);
    for (const auto& hit : ranked) {
        auto it = by_id.find(hit.instance_id);
        if (it == by_id.end())
            throw ValidationError("index entry " + hit.instance_id + " not found in pool");
        Demonstration demo;
        demo.source = *it->second;
        demo.presented_label = demo.source.gold;
        demo.similarity = hit.score;
        set.demos.push_back(std::move(demo));
    }
    return set;
}

DemoSet flip_labels(const DemoSet& demos, const TaskSchema& schema, std::uint64_t seed) {
    if (schema.task_kind != TaskKind::classification)
        throw DegenerateSchemaError("label flipping applies to classification tasks only");
    if (schema.labels.size() < 2)
        throw DegenerateSchemaError("label flipping needs at least two labels");

    DemoSet flipped = demos;
    flipped.label_perturbation = LabelPerturbation::flipped;
    SplitMix64 rng(seed);
    for (auto& demo : flipped.demos) {
        const auto& gold = gold_label(demo.source.gold);
        std::vector<CanonicalLabel> others;
        for (const auto& label : schema.labels)
            if (!(label == gold)) others.push_back(label);
        demo.presented_label = others[rng.next_below(others.size())];
    }
    return flipped;
}

}  // namespace icld
