#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "icld/categorize.hpp"
#include "icld/record.hpp"

namespace icld {

struct LedgerRow {
    std::string instance_id;
    Categorization before;  // zero-shot
    Categorization after;   // few-shot
};

// Per-instance category transitions between a paired zero-shot and few-shot
// run over the same instances and golds.
struct TransitionLedger {
    std::vector<LedgerRow> rows;
    std::size_t n() const { return rows.size(); }
};

// Joins two runs by instance_id; the id sets must match exactly.
TransitionLedger build_ledger(const std::vector<RunRecord>& before_run,
                              const std::vector<RunRecord>& after_run);

// (correct OOS->ISIF count  -  correct-before ISIF->OOS count) / n.
double label_space_power(const TransitionLedger& ledger);

// Same with ISOOF in place of OOS.
double format_power(const TransitionLedger& ledger);

// Over rows ISIF on both sides: (wrong->right - right->wrong) / n.
double discrimination_power(const TransitionLedger& ledger);

// Fractions of the ISIF-both-sides subset; they sum to 1.
struct TransitionBreakdown {
    double w2r = 0.0;
    double r2w = 0.0;
    double r2r = 0.0;
    double w2w = 0.0;
};

TransitionBreakdown transition_breakdown(const TransitionLedger& ledger);

// Net fraction of instances entering ISIF: (not-ISIF->ISIF - ISIF->not-ISIF) / n.
double new_isif_percentage(const TransitionLedger& ledger);

// Fraction of rows that are correct ISIF on the given side — the overall
// accuracy the three powers decompose.
double ledger_accuracy_before(const TransitionLedger& ledger);
double ledger_accuracy_after(const TransitionLedger& ledger);

struct DecompositionReport {
    double label_space_power = 0.0;
    double format_power = 0.0;
    double discrimination_power = 0.0;
    double overall_delta = 0.0;  // accuracy after - accuracy before
    double w2r = 0.0, r2w = 0.0, r2r = 0.0, w2w = 0.0;  // zeros when no ISIF-both rows
    double new_isif_pct = 0.0;
    double isif_pct_before = 0.0;
    double isif_pct_after = 0.0;
    std::size_t n = 0;
};

DecompositionReport decompose(const TransitionLedger& ledger);

nlohmann::json decomposition_to_json(const DecompositionReport& report);
DecompositionReport decomposition_from_json(const nlohmann::json& j);

// Sequence-labeling factors. Denominators are all the test-set size S, and
// true-positive gains stay undecomposed: most are indistinguishable between
// space regulation and discrimination, so they surface as a note plus the
// residual of the micro-F1 delta.
struct SeqDecompositionReport {
    double format_factor = 0.0;          // (OOF responses before - after) / S
    double space_factor = 0.0;           // (IFOOS pairs before - after) / S
    double discrimination_factor = 0.0;  // (wrong-span + right-span-wrong-label deltas) / S
    double f1_before = 0.0;
    double f1_after = 0.0;
    double residual = 0.0;  // f1 delta minus the three factors
    std::string indistinguishable_note;
    std::size_t s = 0;
};

SeqDecompositionReport seq_decompose(const std::vector<RunRecord>& before_run,
                                     const std::vector<RunRecord>& after_run, std::size_t S);

nlohmann::json seq_decomposition_to_json(const SeqDecompositionReport& report);

}  // namespace icld
