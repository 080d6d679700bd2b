#include "icld/decompose.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "icld/errors.hpp"

namespace icld {

using json = nlohmann::json;

namespace {

std::map<std::string, const RunRecord*> index_run(const std::vector<RunRecord>& run,
                                                  const char* which) {
    std::map<std::string, const RunRecord*> by_id;
    for (const auto& record : run) {
        if (!by_id.emplace(record.instance_id, &record).second)
            throw MismatchedRunsError(std::string(which) + " run repeats instance " +
                                      record.instance_id);
    }
    return by_id;
}

std::string summarize_ids(const std::set<std::string>& ids) {
    std::string out;
    std::size_t shown = 0;
    for (const auto& id : ids) {
        if (shown == 8) {
            out += ", … (" + std::to_string(ids.size()) + " total)";
            break;
        }
        if (shown > 0) out += ", ";
        out += id;
        ++shown;
    }
    return out;
}

const Categorization& classification_of(const RunRecord& record) {
    if (!record.classification.has_value())
        throw ValidationError("record " + record.instance_id +
                              " has no classification categorization");
    return *record.classification;
}

}  // namespace

TransitionLedger build_ledger(const std::vector<RunRecord>& before_run,
                              const std::vector<RunRecord>& after_run) {
    if (before_run.empty() && after_run.empty())
        throw EmptyInputError("cannot build a ledger from two empty runs");
    auto before_by_id = index_run(before_run, "before");
    auto after_by_id = index_run(after_run, "after");

    std::set<std::string> only_before, only_after;
    for (const auto& [id, record] : before_by_id)
        if (!after_by_id.contains(id)) only_before.insert(id);
    for (const auto& [id, record] : after_by_id)
        if (!before_by_id.contains(id)) only_after.insert(id);
    if (!only_before.empty() || !only_after.empty())
        throw MismatchedRunsError("runs cover different instances; only in before: [" +
                                  summarize_ids(only_before) + "], only in after: [" +
                                  summarize_ids(only_after) + "]");

    TransitionLedger ledger;
    ledger.rows.reserve(before_run.size());
    // Rows follow the before-run order so ledgers are deterministic.
    for (const auto& record : before_run) {
        LedgerRow row;
        row.instance_id = record.instance_id;
        row.before = classification_of(record);
        row.after = classification_of(*after_by_id.at(record.instance_id));
        ledger.rows.push_back(std::move(row));
    }
    return ledger;
}

namespace {

// Signed count of correct-side crossings between ISIF and the given
// category, divided by n.  Transitions through the third category are
// invisible to this power, as are OOS<->ISOOF flows to every power.
double regulation_power(const TransitionLedger& ledger, Category from) {
    if (ledger.n() == 0) return 0.0;
    long net = 0;
    for (const auto& row : ledger.rows) {
        if (row.before.category == from && row.after.is_isif() && row.after.is_correct()) ++net;
        if (row.before.is_isif() && row.before.is_correct() && row.after.category == from) --net;
    }
    return static_cast<double>(net) / static_cast<double>(ledger.n());
}

}  // namespace

double label_space_power(const TransitionLedger& ledger) {
    return regulation_power(ledger, Category::OOS);
}

double format_power(const TransitionLedger& ledger) {
    return regulation_power(ledger, Category::ISOOF);
}

double discrimination_power(const TransitionLedger& ledger) {
    if (ledger.n() == 0) return 0.0;
    long net = 0;
    for (const auto& row : ledger.rows) {
        if (!row.before.is_isif() || !row.after.is_isif()) continue;
        if (!row.before.is_correct() && row.after.is_correct()) ++net;
        if (row.before.is_correct() && !row.after.is_correct()) --net;
    }
    return static_cast<double>(net) / static_cast<double>(ledger.n());
}

TransitionBreakdown transition_breakdown(const TransitionLedger& ledger) {
    std::size_t w2r = 0, r2w = 0, r2r = 0, w2w = 0;
    for (const auto& row : ledger.rows) {
        if (!row.before.is_isif() || !row.after.is_isif()) continue;
        bool right_before = row.before.is_correct();
        bool right_after = row.after.is_correct();
        if (right_before && right_after)
            ++r2r;
        else if (right_before)
            ++r2w;
        else if (right_after)
            ++w2r;
        else
            ++w2w;
    }
    std::size_t total = w2r + r2w + r2r + w2w;
    if (total == 0)
        throw EmptySubsetError("no rows are ISIF on both sides");
    TransitionBreakdown b;
    b.w2r = static_cast<double>(w2r) / static_cast<double>(total);
    b.r2w = static_cast<double>(r2w) / static_cast<double>(total);
    b.r2r = static_cast<double>(r2r) / static_cast<double>(total);
    b.w2w = static_cast<double>(w2w) / static_cast<double>(total);
    return b;
}

double new_isif_percentage(const TransitionLedger& ledger) {
    if (ledger.n() == 0) return 0.0;
    long net = 0;
    for (const auto& row : ledger.rows) {
        if (!row.before.is_isif() && row.after.is_isif()) ++net;
        if (row.before.is_isif() && !row.after.is_isif()) --net;
    }
    return static_cast<double>(net) / static_cast<double>(ledger.n());
}

namespace {

double side_accuracy(const TransitionLedger& ledger, bool after) {
    if (ledger.n() == 0) return 0.0;
    std::size_t correct = 0;
    for (const auto& row : ledger.rows) {
        const Categorization& c = after ? row.after : row.before;
        if (c.is_correct()) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ledger.n());
}

double side_isif(const TransitionLedger& ledger, bool after) {
    if (ledger.n() == 0) return 0.0;
    std::size_t isif = 0;
    for (const auto& row : ledger.rows)
        if ((after ? row.after : row.before).is_isif()) ++isif;
    return static_cast<double>(isif) / static_cast<double>(ledger.n());
}

}  // namespace

double ledger_accuracy_before(const TransitionLedger& ledger) {
    return side_accuracy(ledger, false);
}

double ledger_accuracy_after(const TransitionLedger& ledger) { return side_accuracy(ledger, true); }

DecompositionReport decompose(const TransitionLedger& ledger) {
    DecompositionReport report;
    report.n = ledger.n();
    report.label_space_power = label_space_power(ledger);
    report.format_power = format_power(ledger);
    report.discrimination_power = discrimination_power(ledger);
    report.overall_delta = ledger_accuracy_after(ledger) - ledger_accuracy_before(ledger);
    report.new_isif_pct = new_isif_percentage(ledger);
    report.isif_pct_before = side_isif(ledger, false);
    report.isif_pct_after = side_isif(ledger, true);
    try {
        auto b = transition_breakdown(ledger);
        report.w2r = b.w2r;
        report.r2w = b.r2w;
        report.r2r = b.r2r;
        report.w2w = b.w2w;
    } catch (const EmptySubsetError&) {
        // No ISIF-both rows: breakdown stays all zero.
    }
    return report;
}

json decomposition_to_json(const DecompositionReport& report) {
    json j;
    j["label_space_power"] = report.label_space_power;
    j["format_power"] = report.format_power;
    j["discrimination_power"] = report.discrimination_power;
    j["overall_delta"] = report.overall_delta;
    j["w2r"] = report.w2r;
    j["r2w"] = report.r2w;
    j["r2r"] = report.r2r;
    j["w2w"] = report.w2w;
    j["new_isif_pct"] = report.new_isif_pct;
    j["isif_pct_before"] = report.isif_pct_before;
    j["isif_pct_after"] = report.isif_pct_after;
    j["n"] = report.n;
    return j;
}

DecompositionReport decomposition_from_json(const json& j) {
    DecompositionReport report;
    report.label_space_power = j.at("label_space_power").get<double>();
    report.format_power = j.at("format_power").get<double>();
    report.discrimination_power = j.at("discrimination_power").get<double>();
    report.overall_delta = j.at("overall_delta").get<double>();
    report.w2r = j.at("w2r").get<double>();
    report.r2w = j.at("r2w").get<double>();
    report.r2r = j.at("r2r").get<double>();
    report.w2w = j.at("w2w").get<double>();
    report.new_isif_pct = j.at("new_isif_pct").get<double>();
    report.isif_pct_before = j.at("isif_pct_before").get<double>();
    report.isif_pct_after = j.at("isif_pct_after").get<double>();
    report.n = j.at("n").get<std::size_t>();
    return report;
}

namespace {

struct SeqCounts {
    std::size_t oof = 0;          // responses
    std::size_t ifoos = 0;        // pairs
    std::size_t wrong_span = 0;   // pairs
    std::size_t wrong_label = 0;  // pairs
    std::size_t tp = 0;           // distinct true-positive pairs
    std::size_t fp = 0;
    std::size_t fn = 0;
};

const SeqCategorization& sequence_of(const RunRecord& record) {
    if (!record.sequence.has_value())
        throw ValidationError("record " + record.instance_id + " has no sequence categorization");
    return *record.sequence;
}

SeqCounts tally(const std::vector<RunRecord>& run) {
    SeqCounts counts;
    for (const auto& record : run) {
        const auto& cat = sequence_of(record);
        if (cat.oof) ++counts.oof;
        std::set<std::pair<std::string, std::string>> matched;
        for (const auto& pair : cat.pairs) {
            switch (pair.category) {
                case PairCategory::IFOOS: ++counts.ifoos; break;
                case PairCategory::ISIF_wrong_span: ++counts.wrong_span; break;
                case PairCategory::ISIF_right_span_wrong_label: ++counts.wrong_label; break;
                case PairCategory::ISIF_true_positive:
                    matched.insert({pair.pair.span, pair.canonical->value});
                    break;
            }
        }
        counts.tp += matched.size();
        counts.fp += cat.pairs.size() - matched.size();
        counts.fn += cat.gold_pair_count - std::min(cat.gold_pair_count, matched.size());
    }
    return counts;
}

double micro_f1(const SeqCounts& counts) {
    double denom = static_cast<double>(2 * counts.tp + counts.fp + counts.fn);
    if (denom == 0.0) return 1.0;  // no gold and no predictions anywhere
    return 2.0 * static_cast<double>(counts.tp) / denom;
}

}  // namespace

SeqDecompositionReport seq_decompose(const std::vector<RunRecord>& before_run,
                                     const std::vector<RunRecord>& after_run, std::size_t S) {
    if (S == 0) throw ValidationError("test-set size S must be positive");
    std::set<std::string> before_ids, after_ids;
    for (const auto& r : before_run) before_ids.insert(r.instance_id);
    for (const auto& r : after_run) after_ids.insert(r.instance_id);
    if (before_ids != after_ids)
        throw MismatchedRunsError("sequence runs cover different instances");

    SeqCounts before = tally(before_run);
    SeqCounts after = tally(after_run);
    double s = static_cast<double>(S);

    SeqDecompositionReport report;
    report.s = S;
    report.format_factor =
        (static_cast<double>(before.oof) - static_cast<double>(after.oof)) / s;
    report.space_factor =
        (static_cast<double>(before.ifoos) - static_cast<double>(after.ifoos)) / s;
    report.discrimination_factor =
        ((static_cast<double>(before.wrong_span) - static_cast<double>(after.wrong_span)) +
         (static_cast<double>(before.wrong_label) - static_cast<double>(after.wrong_label))) /
        s;
    report.f1_before = micro_f1(before);
    report.f1_after = micro_f1(after);
    report.residual = (report.f1_after - report.f1_before) -
                      (report.format_factor + report.space_factor +
                       report.discrimination_factor);
    report.indistinguishable_note =
        "True-positive gains are mostly indistinguishable between label-space regulation and "
        "discrimination for span tasks; they are left undecomposed and surface in the residual.";
    return report;
}

json seq_decomposition_to_json(const SeqDecompositionReport& report) {
    json j;
    j["format_factor"] = report.format_factor;
    j["space_factor"] = report.space_factor;
    j["discrimination_factor"] = report.discrimination_factor;
    j["f1_before"] = report.f1_before;
    j["f1_after"] = report.f1_after;
    j["residual"] = report.residual;
    j["indistinguishable_note"] = report.indistinguishable_note;
    j["s"] = report.s;
    return j;
}

}  // namespace icld
