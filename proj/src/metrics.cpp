#include "icld/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "icld/errors.hpp"
#include "icld/text.hpp"

namespace icld {

std::vector<std::string> tokenize(std::string_view text) {
    std::string lowered = to_lower(text);
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < lowered.size()) {
        while (i < lowered.size() && std::isspace(static_cast<unsigned char>(lowered[i]))) ++i;
        std::size_t start = i;
        while (i < lowered.size() && !std::isspace(static_cast<unsigned char>(lowered[i]))) ++i;
        if (i > start) tokens.push_back(lowered.substr(start, i - start));
    }
    return tokens;
}

MetricValue accuracy(const std::vector<RunRecord>& records) {
    if (records.empty()) throw EmptyInputError("accuracy over zero records");
    std::size_t correct = 0;
    for (const auto& record : records) {
        if (!record.classification.has_value())
            throw ValidationError("record " + record.instance_id +
                                  " has no classification categorization");
        if (record.classification->is_correct()) ++correct;
    }
    MetricValue m;
    m.name = "accuracy";
    m.n = records.size();
    m.value = static_cast<double>(correct) / static_cast<double>(records.size());
    return m;
}

MetricValue span_f1(const std::vector<SpanLabelPair>& pred,
                    const std::vector<SpanLabelPair>& gold) {
    MetricValue m;
    m.name = "span_f1";
    m.n = gold.size();
    if (pred.empty() && gold.empty()) {
        m.value = 1.0;
        return m;
    }
    std::map<std::pair<std::string, std::string>, std::size_t> gold_counts;
    for (const auto& g : gold) ++gold_counts[{trim(g.span), g.label.value}];
    std::size_t tp = 0;
    for (const auto& p : pred) {
        auto it = gold_counts.find({trim(p.span), p.label.value});
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++tp;
        }
    }
    if (tp == 0) return m;  // value 0: no overlap, or one side empty
    double precision = static_cast<double>(tp) / static_cast<double>(pred.size());
    double recall = static_cast<double>(tp) / static_cast<double>(gold.size());
    m.value = 2.0 * precision * recall / (precision + recall);
    return m;
}

namespace {

using Counts = std::map<std::vector<std::string>, std::size_t>;

Counts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
    Counts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    return counts;
}

// Clipped n-gram precision: candidate counts capped by the max count of the
// same n-gram across references.
double clipped_precision(const std::vector<std::string>& cand,
                         const std::vector<std::vector<std::string>>& refs, std::size_t n,
                         bool smoothing) {
    Counts cand_counts = ngram_counts(cand, n);
    std::size_t total = 0;
    for (const auto& [gram, count] : cand_counts) total += count;
    if (total == 0) return -1.0;  // no n-grams of this order exist
    Counts max_ref;
    for (const auto& ref : refs)
        for (const auto& [gram, count] : ngram_counts(ref, n))
            max_ref[gram] = std::max(max_ref[gram], count);
    std::size_t clipped = 0;
    for (const auto& [gram, count] : cand_counts) {
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) clipped += std::min(count, it->second);
    }
    if (smoothing) return static_cast<double>(clipped + 1) / static_cast<double>(total + 1);
    return static_cast<double>(clipped) / static_cast<double>(total);
}

// Reference length closest to the candidate's; ties go to the shorter.
std::size_t effective_ref_length(std::size_t cand_len,
                                 const std::vector<std::vector<std::string>>& refs) {
    std::size_t best = refs.front().size();
    for (const auto& ref : refs) {
        auto diff = [cand_len](std::size_t len) {
            return len > cand_len ? len - cand_len : cand_len - len;
        };
        if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best))
            best = ref.size();
    }
    return best;
}

}  // namespace

MetricValue bleu2(const std::string& candidate, const std::vector<std::string>& references,
                  bool smoothing) {
    if (references.empty()) throw EmptyInputError("bleu2 needs at least one reference");
    MetricValue m;
    m.name = "bleu2";
    m.n = references.size();
    auto cand = tokenize(candidate);
    if (cand.empty()) {
        m.degenerate = true;
        return m;
    }
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references) refs.push_back(tokenize(r));

    double p1 = clipped_precision(cand, refs, 1, smoothing);
    double p2 = clipped_precision(cand, refs, 2, smoothing);

    std::size_t r = effective_ref_length(cand.size(), refs);
    double bp = cand.size() >= r
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(cand.size()));

    double geo;
    if (p2 < 0.0) {
        geo = p1;  // single-token candidate: no bigrams to score
    } else if (p1 <= 0.0 || p2 <= 0.0) {
        geo = 0.0;
    } else {
        geo = std::sqrt(p1 * p2);
    }
    m.value = bp * geo;
    return m;
}

MetricValue rouge_l(const std::string& candidate, const std::string& reference) {
    MetricValue m;
    m.name = "rouge_l";
    m.n = 1;
    auto cand = tokenize(candidate);
    auto ref = tokenize(reference);
    if (cand.empty() && ref.empty()) {
        m.value = 1.0;
        return m;
    }
    if (cand.empty() || ref.empty()) return m;

    // Classic LCS table with a rolling row.
    std::vector<std::size_t> prev(ref.size() + 1, 0), cur(ref.size() + 1, 0);
    for (std::size_t i = 1; i <= cand.size(); ++i) {
        for (std::size_t j = 1; j <= ref.size(); ++j) {
            if (cand[i - 1] == ref[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    double lcs = static_cast<double>(prev[ref.size()]);
    if (lcs == 0.0) return m;
    double precision = lcs / static_cast<double>(cand.size());
    double recall = lcs / static_cast<double>(ref.size());
    m.value = 2.0 * precision * recall / (precision + recall);
    return m;
}

}  // namespace icld
