#pragma once

#include <string>
#include <vector>

#include "icld/corpus.hpp"
#include "icld/record.hpp"

namespace icld {

struct MetricValue {
    std::string name;
    double value = 0.0;
    std::size_t n = 0;       // scored items
    bool degenerate = false; // e.g. BLEU of an empty candidate
};

// Lowercased whitespace tokens — the single normalization both generation
// metrics share.
std::vector<std::string> tokenize(std::string_view text);

// Correct-ISIF count over all records; anything not ISIF scores as wrong.
MetricValue accuracy(const std::vector<RunRecord>& records);

// Micro F1 with exact (span, label) matching after trimming; duplicate
// predictions match a gold pair at most once (multiset intersection).
// Empty/empty scores 1.0 by convention.
MetricValue span_f1(const std::vector<SpanLabelPair>& pred,
                    const std::vector<SpanLabelPair>& gold);

// Geometric mean of clipped 1- and 2-gram precisions with brevity penalty.
// An empty candidate scores 0 with the degenerate flag set.  Candidates of a
// single token fall back to unigram precision (no bigrams exist).  Optional
// add-one smoothing, off by default.
MetricValue bleu2(const std::string& candidate, const std::vector<std::string>& references,
                  bool smoothing = false);

// LCS-based F-measure with beta = 1.  Both texts empty scores 1.0; exactly
// one empty scores 0.0.
MetricValue rouge_l(const std::string& candidate, const std::string& reference);

}  // namespace icld
