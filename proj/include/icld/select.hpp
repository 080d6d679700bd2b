#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icld/corpus.hpp"
#include "icld/embed.hpp"
#include "icld/schema.hpp"

namespace icld {

struct Demonstration {
    Instance source;
    // May differ from source.gold after label flipping.
    GoldTarget presented_label;
    std::optional<double> similarity;  // present iff selected by retrieval
};

enum class SelectionStrategy {
    random,
    retrieval,
    homo_random,
    homo_retrieval,
    hetero_random,
    hetero_retrieval,
};

std::string to_string(SelectionStrategy strategy);
SelectionStrategy strategy_from_string(const std::string& s);
bool strategy_uses_retrieval(SelectionStrategy strategy);
// homo: demos share the query's gold class; hetero: demos avoid it.
bool strategy_is_homo(SelectionStrategy strategy);
bool strategy_is_hetero(SelectionStrategy strategy);
// The class filter a strategy implies for a query with gold label `gold`;
// nullopt for the unconstrained strategies.
std::optional<ClassFilter> filter_for_strategy(SelectionStrategy strategy,
                                               const CanonicalLabel& gold);

enum class LabelPerturbation { ground_truth, flipped };

struct DemoSet {
    std::vector<Demonstration> demos;
    SelectionStrategy strategy = SelectionStrategy::random;
    std::optional<std::uint64_t> seed;  // absent for retrieval strategies
    LabelPerturbation label_perturbation = LabelPerturbation::ground_truth;
};

// k distinct demos drawn uniformly without replacement from the pool,
// restricted to `filter` when given and never including `exclude_id` (the
// query).  Strategy on the result reflects the filter: none -> random,
// same_as -> homo_random, other_than -> hetero_random.
DemoSet select_random(const std::vector<Instance>& pool, std::size_t k, std::uint64_t seed,
                      const std::optional<ClassFilter>& filter = std::nullopt,
                      std::string_view exclude_id = {});

// The k pool items most cosine-similar to the query, descending, ties by
// ascending instance_id.  The query itself is always excluded.  `pool` must
// be the instance list the index was built from (sources are looked up by id).
DemoSet select_retrieval(const SimilarityIndex& index, const std::vector<Instance>& pool,
                         const Instance& query, std::size_t k,
                         const std::optional<ClassFilter>& filter = std::nullopt);

// Replaces every demo's presented label with one drawn uniformly from the
// schema's other labels.  Classification only; sources are left untouched.
DemoSet flip_labels(const DemoSet& demos, const TaskSchema& schema, std::uint64_t seed);

}  // namespace icld
