#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "icld/corpus.hpp"
#include "icld/schema.hpp"

namespace icld {

using EmbeddingVector = std::vector<double>;

// cosine(u, v) = dot(u, v) / (|u| |v|).  Renormalizes so that self-similarity
// is 1 even when a provider's normalization carries small rounding error.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

double l2_norm(const EmbeddingVector& v);
void l2_normalize(EmbeddingVector& v);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    virtual std::string provider_id() const = 0;
    // Embeds one text.  Callers go through embed_text() which enforces the
    // non-empty precondition.
    virtual EmbeddingVector embed(const std::string& text) = 0;
    // Batched variant; the default loops, remote providers override with one
    // request per batch.
    virtual std::vector<EmbeddingVector> embed_many(const std::vector<std::string>& texts);
};

// Trims, rejects empty input, and delegates to the provider.
EmbeddingVector embed_text(EmbeddingProvider& provider, std::string_view text);

// Deterministic local provider: hashed character-trigram counts.  The text is
// lowercased, every 3-gram (the whole text when shorter than 3 chars) is
// hashed with FNV-1a 64 into one of `dim` buckets, and the resulting count
// vector is L2-normalized.  Pure: same text gives the same vector on any
// platform.
class TrigramHashProvider : public EmbeddingProvider {
public:
    explicit TrigramHashProvider(std::size_t dim = 512);
    std::size_t dim() const override { return dim_; }
    std::string provider_id() const override;
    EmbeddingVector embed(const std::string& text) override;

private:
    std::size_t dim_;
};

struct HttpEmbeddingConfig {
    std::string base_url;              // e.g. "http://127.0.0.1:8211"
    std::string path = "/v1/embeddings";
    std::string model;                 // forwarded as the request "model" field
    std::string api_key;               // optional bearer token
    std::size_t dim = 0;               // 0 = accept whatever the server returns
    int max_retries = 3;
    int timeout_seconds = 30;
    int backoff_initial_ms = 100;
};

// Remote provider speaking the common embeddings-endpoint shape:
// POST {"input": [texts], "model": id} -> {"data": [{"embedding": [floats]}]}.
// Responses are L2-normalized on receipt.  Retries with exponential backoff on
// transport failures, 429, and 5xx; exhausting retries raises ProviderError.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);
    std::size_t dim() const override { return dim_; }
    std::string provider_id() const override;
    EmbeddingVector embed(const std::string& text) override;
    std::vector<EmbeddingVector> embed_many(const std::vector<std::string>& texts) override;

private:
    HttpEmbeddingConfig config_;
    std::size_t dim_;  // learned from the first response when config.dim == 0
};

// Filter over demonstration candidates by gold class.
struct ClassFilter {
    enum class Mode { same_as, other_than };
    Mode mode;
    CanonicalLabel label;

    // Candidates without a classification gold are never admitted: neither
    // membership nor non-membership can be certified for them.
    bool admits(const std::optional<CanonicalLabel>& gold) const;
};

struct IndexEntry {
    std::string instance_id;
    EmbeddingVector vec;
    std::optional<CanonicalLabel> gold;  // present for classification pools
};

struct ScoredId {
    std::string instance_id;
    double score = 0.0;
};

// Exact linear-scan cosine index.  Immutable after construction; top_k is
// read-only and safe to call concurrently.
class SimilarityIndex {
public:
    SimilarityIndex(std::vector<IndexEntry> entries, std::shared_ptr<EmbeddingProvider> provider,
                    std::string separator);

    // Embeds concat_fields(inst, separator) for every pool instance.
    static SimilarityIndex build(const std::vector<Instance>& pool,
                                 std::shared_ptr<EmbeddingProvider> provider,
                                 std::string_view separator = " ");

    const std::vector<IndexEntry>& entries() const { return entries_; }
    const std::string& provider_id() const { return provider_id_; }
    const std::string& separator() const { return separator_; }
    std::size_t dim() const;
    EmbeddingProvider& provider() const;
    // Embeds a query with the same provider and field separator the index was
    // built with.
    EmbeddingVector embed_query(const Instance& query) const;

private:
    std::vector<IndexEntry> entries_;
    std::shared_ptr<EmbeddingProvider> provider_;
    std::string provider_id_;
    std::string separator_;
};

// Exact k-largest by cosine score, descending; ties broken by ascending
// instance_id.  Entries in `exclude` or rejected by `filter` are ineligible.
std::vector<ScoredId> top_k(const SimilarityIndex& index, const EmbeddingVector& query_vec,
                            std::size_t k, const std::set<std::string>& exclude = {},
                            const std::optional<ClassFilter>& filter = std::nullopt);

}  // namespace icld
