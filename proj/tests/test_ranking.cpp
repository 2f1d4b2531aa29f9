#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rankattack/ranking.hpp"

using namespace rankattack;

namespace {

const StopwordSet kNoStop;

Document resume(std::string id, std::string text) { return {std::move(id), DocKind::Resume, std::move(text)}; }

/// Wraps another backend and multiplies its vectors by a constant, leaving
/// them unnormalized.
class ScaledEmbedder final : public Embedder {
public:
    ScaledEmbedder(const Embedder& inner, double k) : inner_(inner), k_(k) {}
    std::size_t dim() const override { return inner_.dim(); }
    EmbeddingVector embed(std::string_view t) const override {
        auto v = inner_.embed(t);
        for (auto& x : v.values) x *= k_;
        return v;
    }
    BackendDescriptor descriptor() const override { return inner_.descriptor(); }

private:
    const Embedder& inner_;
    double k_;
};

struct Fixture {
    std::vector<Document> pool;
    Document job{"job", DocKind::JobDescription, "python rust developer kubernetes"};
    std::unique_ptr<TfIdfEmbedder> tfidf;

    Fixture() {
        pool = {resume("r1", "java spring developer"), resume("r2", "python developer"),
                resume("r3", "rust kubernetes python"), resume("r4", "gardening cooking"),
                resume("r5", "python python developer rust")};
        auto fit = pool;
        fit.push_back(job);
        tfidf = std::make_unique<TfIdfEmbedder>(fit_tfidf(fit, kNoStop), kNoStop);
    }
};

}  // namespace

TEST(Rank, CopyOfQueryRanksFirstWithScoreOne) {
    Fixture f;
    f.pool.push_back(resume("copy", f.job.text));
    const auto ranked = rank(f.job, f.pool, *f.tfidf);
    EXPECT_EQ(ranked.query_id, "job");
    EXPECT_EQ(ranked.entries.front().doc_id, "copy");
    EXPECT_NEAR(ranked.entries.front().score, 1.0, 1e-12);
    EXPECT_EQ(rank_of(ranked, "copy"), 1u);
}

TEST(Rank, PoolOfOne) {
    Fixture f;
    const std::vector<Document> one{resume("only", "gardening")};
    const auto ranked = rank(f.job, one, *f.tfidf);
    ASSERT_EQ(ranked.entries.size(), 1u);
    EXPECT_EQ(rank_of(ranked, "only"), 1u);
    EXPECT_EQ(ranked.entries[0].score, 0.0);
}

TEST(Rank, TiesBrokenByIdAscending) {
    Fixture f;
    const std::vector<Document> pool{resume("zeta", "python developer"), resume("alpha", "python developer"),
                                     resume("mid", "python developer")};
    const auto ranked = rank(f.job, pool, *f.tfidf);
    EXPECT_EQ(ranked.entries[0].doc_id, "alpha");
    EXPECT_EQ(ranked.entries[1].doc_id, "mid");
    EXPECT_EQ(ranked.entries[2].doc_id, "zeta");
}

TEST(Rank, Errors) {
    Fixture f;
    EXPECT_THROW(rank(f.job, {}, *f.tfidf), ArgumentError);
    const std::vector<Document> dup{resume("a", "x"), resume("a", "y")};
    EXPECT_THROW(rank(f.job, dup, *f.tfidf), ArgumentError);
    const auto ranked = rank(f.job, f.pool, *f.tfidf);
    EXPECT_THROW(rank_of(ranked, "missing"), NotFoundError);
    EXPECT_EQ(rank_of(ranked, ranked.entries.back().doc_id), f.pool.size());
}

TEST(Rank, PermutationSortedAndDeterministic) {
    Fixture f;
    const auto ranked = rank(f.job, f.pool, *f.tfidf);
    std::vector<std::string> in, out;
    for (const auto& d : f.pool) in.push_back(d.id);
    for (const auto& e : ranked.entries) out.push_back(e.doc_id);
    std::sort(in.begin(), in.end());
    std::sort(out.begin(), out.end());
    EXPECT_EQ(in, out);
    for (std::size_t i = 1; i < ranked.entries.size(); ++i)
        EXPECT_GE(ranked.entries[i - 1].score, ranked.entries[i].score);
    EXPECT_EQ(rank(f.job, f.pool, *f.tfidf), ranked);
    EXPECT_EQ(rank(f.job, f.pool, *f.tfidf, 4), ranked);
}

TEST(Rank, ScoresMatchOracle) {
    Fixture f;
    std::vector<oracle::Tokens> docs;
    for (const auto& d : f.pool) docs.push_back(oracle::tokens(d.text));
    docs.push_back(oracle::tokens(f.job.text));
    const auto m = oracle::fit(docs);
    const auto q = oracle::embed(m, oracle::tokens(f.job.text));
    const auto ranked = rank(f.job, f.pool, *f.tfidf);
    for (const auto& d : f.pool) {
        const auto it = std::find_if(ranked.entries.begin(), ranked.entries.end(),
                                     [&](const auto& e) { return e.doc_id == d.id; });
        EXPECT_NEAR(it->score, oracle::cosine(q, oracle::embed(m, oracle::tokens(d.text))), 1e-12);
    }
}

TEST(Rank, InvariantUnderVectorRescaling) {
    Fixture f;
    const ScaledEmbedder scaled(*f.tfidf, 37.5);
    const auto a = rank(f.job, f.pool, *f.tfidf);
    const auto b = rank(f.job, f.pool, scaled);
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        EXPECT_EQ(a.entries[i].doc_id, b.entries[i].doc_id);
        EXPECT_NEAR(a.entries[i].score, b.entries[i].score, 1e-12);
    }
}

TEST(ScoredPool, ReplacementMatchesFullRerank) {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 40; ++trial) {
        const auto texts = oracle::random_corpus(gen, 10, 12);
        std::vector<Document> pool;
        for (const auto& t : texts) pool.push_back(resume("r" + std::to_string(pool.size()), t));
        const Document job{"j", DocKind::JobDescription, oracle::random_text(gen, 12)};
        auto fit = pool;
        fit.push_back(job);
        const TfIdfEmbedder e(fit_tfidf(fit, kNoStop), kNoStop);
        const ScoredPool sp(job, pool, e);
        EXPECT_EQ(sp.ranked("j"), rank(job, pool, e));

        const std::size_t target = trial % pool.size();
        const auto new_text = pool[target].text + " " + oracle::random_text(gen, 5);
        auto modified = pool;
        modified[target].text = new_text;
        EXPECT_EQ(sp.rank_if_replaced(pool[target].id, new_text), rank_of(rank(job, modified, e), pool[target].id));
        EXPECT_EQ(sp.rank_of(pool[target].id), rank_of(rank(job, pool, e), pool[target].id));
    }
}

TEST(ScoredPool, Errors) {
    Fixture f;
    const ScoredPool sp(f.job, f.pool, *f.tfidf);
    EXPECT_THROW(sp.rank_of("nope"), NotFoundError);
    EXPECT_THROW(sp.rank_if_replaced("nope", "x"), NotFoundError);
    EXPECT_THROW(ScoredPool(f.job, {}, *f.tfidf), ArgumentError);
}

TEST(RankOutput, CsvAndJson) {
    RankedList r{"job", {{"b", 0.5}, {"a,1", 0.25}}};
    std::ostringstream csv;
    write_ranked_csv(csv, r);
    EXPECT_EQ(csv.str(), "rank,doc_id,score\n1,b,0.500000000000\n2,\"a,1\",0.250000000000\n");
    const auto j = to_json(r);
    EXPECT_EQ(j.at("query_id"), "job");
    EXPECT_EQ(j.at("entries")[1].at("rank"), 2);
    EXPECT_EQ(j.at("entries")[1].at("doc_id"), "a,1");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}
