#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rankattack/embedding.hpp"
#include "rankattack/error.hpp"
#include "rankattack/parallel.hpp"
#include "rankattack/text.hpp"

namespace rankattack {

struct RankedEntry {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const RankedEntry&) const = default;
};

/// Pool sorted by score descending, ties by doc_id ascending. Rank is the
/// 1-based position.
struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;

    bool operator==(const RankedList&) const = default;
};

inline bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

inline void check_unique_ids(std::span<const Document> pool) {
    std::unordered_set<std::string> seen;
    for (const auto& d : pool) {
        if (!seen.insert(d.id).second) throw ArgumentError("duplicate document id in pool: " + d.id);
    }
}

inline RankedList rank(const Document& query, std::span<const Document> pool, const Embedder& backend,
                       std::size_t threads = 1) {
    if (pool.empty()) throw ArgumentError("rank: empty pool");
    check_unique_ids(pool);
    const auto q = backend.embed(query.text);
    RankedList out{query.id, std::vector<RankedEntry>(pool.size())};
    parallel_for(pool.size(), threads, [&](std::size_t i) {
        out.entries[i] = {pool[i].id, cosine_similarity(q, backend.embed(pool[i].text))};
    });
    std::sort(out.entries.begin(), out.entries.end(), ranks_before);
    return out;
}

inline std::size_t rank_of(const RankedList& ranked, std::string_view doc_id) {
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        if (ranked.entries[i].doc_id == doc_id) return i + 1;
    }
    throw NotFoundError("document not in ranked list: " + std::string(doc_id));
}

/// Query-to-pool scores computed once, so a single replaced document can be
/// re-ranked without re-embedding the rest of the pool. Gives the same rank
/// as a full rank() over the modified pool.
class ScoredPool {
public:
    ScoredPool(const Document& query, std::span<const Document> pool, const Embedder& backend,
               std::size_t threads = 1)
        : backend_(&backend), query_(backend.embed(query.text)) {
        if (pool.empty()) throw ArgumentError("ScoredPool: empty pool");
        check_unique_ids(pool);
        entries_.resize(pool.size());
        parallel_for(pool.size(), threads, [&](std::size_t i) {
            entries_[i] = {pool[i].id, cosine_similarity(query_, backend.embed(pool[i].text))};
        });
        for (std::size_t i = 0; i < pool.size(); ++i) position_.emplace(pool[i].id, i);
    }

    std::size_t size() const noexcept { return entries_.size(); }
    const EmbeddingVector& query_vector() const noexcept { return query_; }

    double score_of(std::string_view doc_id) const { return entries_[index_of(doc_id)].score; }

    std::size_t rank_of(std::string_view doc_id) const {
        const auto i = index_of(doc_id);
        return rank_with(i, entries_[i].score);
    }

    /// Rank of doc_id if its text were replaced by new_text.
    std::size_t rank_if_replaced(std::string_view doc_id, std::string_view new_text) const {
        const auto i = index_of(doc_id);
        return rank_with(i, cosine_similarity(query_, backend_->embed(new_text)));
    }

    RankedList ranked(std::string query_id) const {
        RankedList out{std::move(query_id), entries_};
        std::sort(out.entries.begin(), out.entries.end(), ranks_before);
        return out;
    }

private:
    std::size_t index_of(std::string_view doc_id) const {
        auto it = position_.find(std::string(doc_id));
        if (it == position_.end()) throw NotFoundError("document not in pool: " + std::string(doc_id));
        return it->second;
    }

    std::size_t rank_with(std::size_t self, double score) const {
        const RankedEntry me{entries_[self].doc_id, score};
        std::size_t r = 1;
        for (std::size_t j = 0; j < entries_.size(); ++j) {
            if (j != self && ranks_before(entries_[j], me)) ++r;
        }
        return r;
    }

    const Embedder* backend_;
    EmbeddingVector query_;
    std::vector<RankedEntry> entries_;
    std::unordered_map<std::string, std::size_t> position_;
};

/// RFC 4180 quoting when the field needs it.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

/// Fixed-precision decimal used in every CSV so reruns are byte-identical.
inline std::string format_score(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", x);
    return buf;
}

inline void write_ranked_csv(std::ostream& out, const RankedList& ranked) {
    out << "rank,doc_id,score\n";
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        out << (i + 1) << ',' << csv_field(ranked.entries[i].doc_id) << ',' << format_score(ranked.entries[i].score)
            << '\n';
    }
}

inline nlohmann::json to_json(const RankedList& ranked) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        entries.push_back(
            {{"rank", i + 1}, {"doc_id", ranked.entries[i].doc_id}, {"score", ranked.entries[i].score}});
    }
    return {{"query_id", ranked.query_id}, {"entries", std::move(entries)}};
}

}  // namespace rankattack
