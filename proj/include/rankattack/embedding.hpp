#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rankattack/error.hpp"
#include "rankattack/rng.hpp"
#include "rankattack/text.hpp"

namespace rankattack {

struct EmbeddingVector {
    std::vector<double> values;

    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> v) : values(std::move(v)) {}

    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Scales v to unit length in place; an all-zero vector is left untouched.
inline void l2_normalize(std::vector<double>& v) {
    const double n = l2_norm(v);
    if (n == 0.0) return;
    for (auto& x : v) x /= n;
}

/// dot(u,v) / (|u| |v|), or 0 when either vector is zero.
inline double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim())
        throw ArgumentError("cosine_similarity: dimension mismatch (" + std::to_string(u.dim()) +
                            " vs " + std::to_string(v.dim()) + ")");
    const double nu = l2_norm(u.values);
    const double nv = l2_norm(v.values);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double c = dot(u.values, v.values) / (nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

enum class BackendKind { TfIdf, Remote, HashedProjection };

inline std::string to_string(BackendKind k) {
    switch (k) {
        case BackendKind::TfIdf: return "tfidf";
        case BackendKind::Remote: return "remote";
        case BackendKind::HashedProjection: return "hashed";
    }
    return "unknown";
}

inline BackendKind parse_backend_kind(std::string_view s) {
    if (s == "tfidf") return BackendKind::TfIdf;
    if (s == "remote") return BackendKind::Remote;
    if (s == "hashed") return BackendKind::HashedProjection;
    throw ArgumentError("unknown backend: " + std::string(s));
}

struct BackendDescriptor {
    BackendKind kind = BackendKind::TfIdf;
    std::size_t dim = 0;
    std::map<std::string, std::string> config;
};

inline nlohmann::json to_json(const BackendDescriptor& d) {
    return {{"kind", to_string(d.kind)}, {"dim", d.dim}, {"config", d.config}};
}

/// Common interface for all embedding backends. Implementations are safe for
/// concurrent calls.
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::size_t dim() const = 0;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual BackendDescriptor descriptor() const = 0;

    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed(t));
        return out;
    }
};

// ---------------------------------------------------------------------------
// TF-IDF

struct TfIdfModel {
    Vocabulary vocab;
    std::vector<double> idf;
    std::size_t doc_count = 0;
};

/// Fits vocabulary and smoothed idf = ln((1+N)/(1+df)) + 1 over the corpus.
inline TfIdfModel fit_tfidf(std::span<const Document> corpus, const StopwordSet& stopwords) {
    if (corpus.empty()) throw ArgumentError("fit_tfidf: empty corpus");
    std::map<std::string, std::size_t> df;
    for (const auto& d : corpus) {
        auto toks = content_tokens(d.text, stopwords);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        for (auto& t : toks) ++df[std::move(t)];
    }
    if (df.empty()) throw ArgumentError("fit_tfidf: every document is empty after filtering");

    TfIdfModel model;
    model.doc_count = corpus.size();
    model.vocab = build_vocabulary(corpus, stopwords);
    model.idf.reserve(model.vocab.size());
    const double n = static_cast<double>(model.doc_count);
    for (const auto& w : model.vocab.words()) {
        model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df.at(w)))) + 1.0);
    }
    return model;
}

/// Raw count x idf per in-vocabulary token, L2-normalized. OOV-only input
/// yields the zero vector.
inline EmbeddingVector embed_tfidf(const TfIdfModel& model, const TokenSeq& tokens) {
    std::vector<double> v(model.vocab.size(), 0.0);
    for (const auto& t : tokens) {
        if (auto i = model.vocab.find(t)) v[*i] += model.idf[*i];
    }
    l2_normalize(v);
    return EmbeddingVector(std::move(v));
}

inline nlohmann::json to_json(const TfIdfModel& m) {
    return {{"vocab", m.vocab.words()}, {"idf", m.idf}, {"doc_count", m.doc_count}};
}

inline TfIdfModel tfidf_from_json(const nlohmann::json& j) {
    TfIdfModel m;
    m.vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
    m.idf = j.at("idf").get<std::vector<double>>();
    m.doc_count = j.at("doc_count").get<std::size_t>();
    if (m.idf.size() != m.vocab.size()) throw ArgumentError("tfidf model: idf/vocab length mismatch");
    if (m.doc_count == 0) throw ArgumentError("tfidf model: doc_count must be positive");
    for (double x : m.idf) {
        if (!(x > 0.0) || !std::isfinite(x)) throw ArgumentError("tfidf model: idf must be finite and > 0");
    }
    return m;
}

inline void save_tfidf(const TfIdfModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << to_json(m).dump() << '\n';
}

inline TfIdfModel load_tfidf(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return tfidf_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed tfidf model " + path + ": " + e.what());
    }
}

class TfIdfEmbedder final : public Embedder {
public:
    TfIdfEmbedder(TfIdfModel model, StopwordSet stopwords)
        : model_(std::move(model)), stopwords_(std::move(stopwords)) {}

    std::size_t dim() const override { return model_.vocab.size(); }

    EmbeddingVector embed(std::string_view text) const override {
        return embed_tfidf(model_, content_tokens(text, stopwords_));
    }

    BackendDescriptor descriptor() const override {
        return {BackendKind::TfIdf, dim(), {{"doc_count", std::to_string(model_.doc_count)}}};
    }

    const TfIdfModel& model() const noexcept { return model_; }

private:
    TfIdfModel model_;
    StopwordSet stopwords_;
};

// ---------------------------------------------------------------------------
// Hashed random projection

/// Fixed pseudo-random unit vector for a token, a pure function of
/// (seed, dim, token).
inline std::vector<double> hashed_token_vector(std::uint64_t seed, std::size_t dim,
                                               std::string_view token) {
    Rng rng(splitmix64(seed ^ fnv1a64(token)));
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    l2_normalize(v);
    return v;
}

/// L2-normalized sum of per-token vectors (with multiplicity).
inline EmbeddingVector embed_hashed(std::uint64_t seed, std::size_t dim, const TokenSeq& tokens) {
    if (dim < 8) throw ArgumentError("embed_hashed: dim must be >= 8");
    std::vector<double> acc(dim, 0.0);
    for (const auto& t : tokens) {
        const auto tv = hashed_token_vector(seed, dim, t);
        for (std::size_t i = 0; i < dim; ++i) acc[i] += tv[i];
    }
    l2_normalize(acc);
    return EmbeddingVector(std::move(acc));
}

/// embed_hashed with a per-token memo.
class HashedEmbedder final : public Embedder {
public:
    HashedEmbedder(std::uint64_t seed, std::size_t dim, StopwordSet stopwords)
        : seed_(seed), dim_(dim), stopwords_(std::move(stopwords)) {
        if (dim_ < 8) throw ArgumentError("hashed backend: dim must be >= 8");
    }

    std::size_t dim() const override { return dim_; }

    EmbeddingVector embed(std::string_view text) const override {
        std::vector<double> acc(dim_, 0.0);
        for (const auto& t : content_tokens(text, stopwords_)) {
            const auto& tv = token_vector(t);
            for (std::size_t i = 0; i < dim_; ++i) acc[i] += tv[i];
        }
        l2_normalize(acc);
        return EmbeddingVector(std::move(acc));
    }

    BackendDescriptor descriptor() const override {
        return {BackendKind::HashedProjection, dim_, {{"seed", std::to_string(seed_)}}};
    }

private:
    const std::vector<double>& token_vector(const std::string& t) const {
        {
            std::shared_lock lock(mutex_);
            if (auto it = memo_.find(t); it != memo_.end()) return it->second;
        }
        auto v = hashed_token_vector(seed_, dim_, t);
        std::unique_lock lock(mutex_);
        return memo_.try_emplace(t, std::move(v)).first->second;
    }

    std::uint64_t seed_;
    std::size_t dim_;
    StopwordSet stopwords_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::string, std::vector<double>> memo_;
};

}  // namespace rankattack
