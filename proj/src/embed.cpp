#include "icld/embed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "icld/errors.hpp"
#include "icld/text.hpp"

namespace icld {

using json = nlohmann::json;

double l2_norm(const EmbeddingVector& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

void l2_normalize(EmbeddingVector& v) {
    double norm = l2_norm(v);
    if (norm == 0.0) return;
    for (double& x : v) x /= norm;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.size() != v.size())
        throw DimMismatchError("cosine over dims " + std::to_string(u.size()) + " and " +
                               std::to_string(v.size()));
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    double nu = l2_norm(u);
    double nv = l2_norm(v);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (nu * nv);
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_many(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

EmbeddingVector embed_text(EmbeddingProvider& provider, std::string_view text) {
    std::string trimmed = trim(text);
    if (trimmed.empty()) throw EmptyTextError("cannot embed empty text");
    return provider.embed(trimmed);
}

TrigramHashProvider::TrigramHashProvider(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw ConfigError("embedding dim must be positive");
}

std::string TrigramHashProvider::provider_id() const {
    return "trigram-hash-" + std::to_string(dim_);
}

EmbeddingVector TrigramHashProvider::embed(const std::string& text) {
    std::string lower = to_lower(text);
    EmbeddingVector vec(dim_, 0.0);
    if (lower.size() < 3) {
        vec[fnv1a64(lower) % dim_] += 1.0;
    } else {
        for (std::size_t i = 0; i + 3 <= lower.size(); ++i)
            vec[fnv1a64(std::string_view(lower).substr(i, 3)) % dim_] += 1.0;
    }
    l2_normalize(vec);
    return vec;
}

namespace {

// Splits "http://host:port" into (scheme://host:port) for httplib.
httplib::Client make_client(const HttpEmbeddingConfig& config) {
    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    if (!config.api_key.empty()) client.set_bearer_token_auth(config.api_key);
    return client;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config)
    : config_(std::move(config)), dim_(config_.dim) {
    if (config_.base_url.empty()) throw ConfigError("embedding provider base_url is empty");
}

std::string HttpEmbeddingProvider::provider_id() const {
    return config_.model.empty() ? "http-embeddings" : config_.model;
}

EmbeddingVector HttpEmbeddingProvider::embed(const std::string& text) {
    return embed_many({text}).front();
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_many(
    const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    json body;
    body["input"] = texts;
    if (!config_.model.empty()) body["model"] = config_.model;
    std::string payload = body.dump();

    auto client = make_client(config_);
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(config_.backoff_initial_ms << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        auto res = client.Post(config_.path, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "http status " + std::to_string(res->status);
            if (retryable_status(res->status)) continue;
            throw ProviderError("embedding request failed (" + last_error + ", attempt " +
                                std::to_string(attempt + 1) + ")");
        }
        json doc;
        try {
            doc = json::parse(res->body);
        } catch (const json::exception& e) {
            throw ProviderError(std::string("embedding response is not valid JSON: ") + e.what());
        }
        std::vector<EmbeddingVector> out;
        try {
            for (const auto& item : doc.at("data"))
                out.push_back(item.at("embedding").get<EmbeddingVector>());
        } catch (const json::exception& e) {
            throw ProviderError(std::string("embedding response shape mismatch: ") + e.what());
        }
        if (out.size() != texts.size())
            throw ProviderError("embedding response count " + std::to_string(out.size()) +
                                " does not match request count " + std::to_string(texts.size()));
        for (auto& vec : out) {
            if (dim_ == 0) dim_ = vec.size();
            if (vec.size() != dim_)
                throw DimMismatchError("provider returned dim " + std::to_string(vec.size()) +
                                       ", expected " + std::to_string(dim_));
            l2_normalize(vec);
        }
        return out;
    }
    throw ProviderError("embedding request failed after " +
                        std::to_string(config_.max_retries + 1) + " attempts (" + last_error + ")");
}

bool ClassFilter::admits(const std::optional<CanonicalLabel>& gold) const {
    if (!gold.has_value()) return false;
    return mode == Mode::same_as ? *gold == label : !(*gold == label);
}

SimilarityIndex::SimilarityIndex(std::vector<IndexEntry> entries,
                                 std::shared_ptr<EmbeddingProvider> provider,
                                 std::string separator)
    : entries_(std::move(entries)),
      provider_(std::move(provider)),
      separator_(std::move(separator)) {
    if (!provider_) throw ConfigError("similarity index requires a provider");
    provider_id_ = provider_->provider_id();
    std::set<std::string> ids;
    for (const auto& e : entries_) {
        if (!ids.insert(e.instance_id).second)
            throw ValidationError("duplicate instance_id in index: " + e.instance_id);
        if (!entries_.empty() && e.vec.size() != entries_.front().vec.size())
            throw DimMismatchError("index entry " + e.instance_id + " has dim " +
                                   std::to_string(e.vec.size()) + ", expected " +
                                   std::to_string(entries_.front().vec.size()));
    }
}

SimilarityIndex SimilarityIndex::build(const std::vector<Instance>& pool,
                                       std::shared_ptr<EmbeddingProvider> provider,
                                       std::string_view separator) {
    if (!provider) throw ConfigError("similarity index requires a provider");
    std::vector<std::string> texts;
    texts.reserve(pool.size());
    for (const auto& inst : pool) {
        std::string text = trim(concat_fields(inst, separator));
        if (text.empty()) throw EmptyTextError("instance " + inst.instance_id + " has empty text");
        texts.push_back(std::move(text));
    }
    auto vecs = provider->embed_many(texts);
    std::vector<IndexEntry> entries;
    entries.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        IndexEntry entry;
        entry.instance_id = pool[i].instance_id;
        entry.vec = std::move(vecs[i]);
        if (holds_label(pool[i].gold)) entry.gold = gold_label(pool[i].gold);
        entries.push_back(std::move(entry));
    }
    return SimilarityIndex(std::move(entries), std::move(provider), std::string(separator));
}

std::size_t SimilarityIndex::dim() const {
    return entries_.empty() ? provider_->dim() : entries_.front().vec.size();
}

EmbeddingProvider& SimilarityIndex::provider() const { return *provider_; }

EmbeddingVector SimilarityIndex::embed_query(const Instance& query) const {
    return embed_text(*provider_, concat_fields(query, separator_));
}

std::vector<ScoredId> top_k(const SimilarityIndex& index, const EmbeddingVector& query_vec,
                            std::size_t k, const std::set<std::string>& exclude,
                            const std::optional<ClassFilter>& filter) {
    std::vector<ScoredId> scored;
    for (const auto& entry : index.entries()) {
        if (exclude.contains(entry.instance_id)) continue;
        if (filter && !filter->admits(entry.gold)) continue;
        scored.push_back({entry.instance_id, cosine(query_vec, entry.vec)});
    }
    if (scored.size() < k)
        throw PoolTooSmallError("top_k of " + std::to_string(k) + " over " +
                                std::to_string(scored.size()) + " eligible entries");
    std::sort(scored.begin(), scored.end(), [](const ScoredId& a, const ScoredId& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.instance_id < b.instance_id;
    });
    scored.resize(k);
    return scored;
}

}  // namespace icld
