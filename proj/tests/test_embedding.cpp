#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rankattack/backend.hpp"
#include "rankattack/embedding.hpp"

using namespace rankattack;

namespace {

const StopwordSet kNoStop;

std::vector<Document> corpus_of(std::initializer_list<const char*> texts) {
    std::vector<Document> out;
    for (const char* t : texts) out.push_back({"d" + std::to_string(out.size()), DocKind::Resume, t});
    return out;
}

double idf_of(const TfIdfModel& m, const std::string& w) { return m.idf.at(*m.vocab.find(w)); }

}  // namespace

TEST(TfIdf, SmoothedIdfValues) {
    const auto m = fit_tfidf(corpus_of({"a b", "a"}), kNoStop);
    EXPECT_EQ(m.doc_count, 2u);
    EXPECT_DOUBLE_EQ(idf_of(m, "a"), 1.0);
    EXPECT_NEAR(idf_of(m, "b"), 1.4054651081081644, 1e-15);

    const auto single = fit_tfidf(corpus_of({"a"}), kNoStop);
    EXPECT_DOUBLE_EQ(idf_of(single, "a"), 1.0);
    EXPECT_FALSE(m.vocab.contains("z"));
}

TEST(TfIdf, EmbedExamples) {
    const auto m = fit_tfidf(corpus_of({"a b", "a"}), kNoStop);
    const auto ia = *m.vocab.find("a"), ib = *m.vocab.find("b");

    const auto va = embed_tfidf(m, {"a"});
    EXPECT_DOUBLE_EQ(va.values[ia], 1.0);
    EXPECT_DOUBLE_EQ(va.values[ib], 0.0);

    // (2, ln 1.5 + 1) normalized.
    const auto vaab = embed_tfidf(m, {"a", "a", "b"});
    EXPECT_NEAR(vaab.values[ia], 0.8181802073667197, 1e-12);
    EXPECT_NEAR(vaab.values[ib], 0.5749618667993135, 1e-12);
    EXPECT_NEAR(l2_norm(vaab.values), 1.0, 1e-15);

    const auto vz = embed_tfidf(m, {"z"});
    EXPECT_TRUE(std::all_of(vz.values.begin(), vz.values.end(), [](double x) { return x == 0.0; }));
}

TEST(TfIdf, ErrorsOnEmptyCorpus) {
    EXPECT_THROW(fit_tfidf({}, kNoStop), ArgumentError);
    EXPECT_THROW(fit_tfidf(corpus_of({"", "..."}), kNoStop), ArgumentError);
}

TEST(TfIdf, MatchesIndependentOracleOnRandomCorpora) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto texts = oracle::random_corpus(gen);
        std::vector<Document> docs;
        std::vector<oracle::Tokens> toks;
        for (const auto& t : texts) {
            docs.push_back({"d" + std::to_string(docs.size()), DocKind::Resume, t});
            toks.push_back(oracle::tokens(t));
        }
        const auto m = fit_tfidf(docs, kNoStop);
        const auto ref = oracle::fit(toks);
        ASSERT_EQ(m.vocab.size(), ref.idf.size());
        for (const auto& [w, idf] : ref.idf) EXPECT_NEAR(idf_of(m, w), idf, 1e-12);

        for (const auto& d : toks) {
            const auto v = embed_tfidf(m, d);
            const auto rv = oracle::embed(ref, d);
            const auto want = oracle::dense_unit(rv, m.vocab.words());
            for (std::size_t i = 0; i < m.vocab.size(); ++i) EXPECT_NEAR(v.values[i], want[i], 1e-12);
        }
    }
}

TEST(TfIdf, SelfSimilarityAndBagOfWords) {
    std::mt19937_64 gen(5);
    const auto texts = oracle::random_corpus(gen);
    std::vector<Document> docs;
    for (const auto& t : texts) docs.push_back({"d" + std::to_string(docs.size()), DocKind::Resume, t});
    TfIdfEmbedder e(fit_tfidf(docs, kNoStop), kNoStop);
    for (const auto& t : texts) {
        const auto v = e.embed(t);
        EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-9);
        auto toks = tokenize(t);
        std::shuffle(toks.begin(), toks.end(), gen);
        EXPECT_EQ(e.embed(join(toks)), v);
        EXPECT_EQ(e.embed(t), v);
    }
    EXPECT_EQ(e.descriptor().kind, BackendKind::TfIdf);
    EXPECT_EQ(e.descriptor().dim, e.dim());
}

TEST(TfIdf, JsonRoundTrip) {
    const auto m = fit_tfidf(corpus_of({"rust go", "go python go"}), kNoStop);
    const std::string path = ::testing::TempDir() + "tfidf.json";
    save_tfidf(m, path);
    const auto back = load_tfidf(path);
    EXPECT_EQ(back.vocab, m.vocab);
    EXPECT_EQ(back.idf, m.idf);
    EXPECT_EQ(back.doc_count, m.doc_count);

    auto j = to_json(m);
    EXPECT_EQ(j.at("vocab").size(), 3u);
    j["idf"].push_back(1.0);
    EXPECT_THROW(tfidf_from_json(j), ArgumentError);
    j = to_json(m);
    j["idf"][0] = -1.0;
    EXPECT_THROW(tfidf_from_json(j), ArgumentError);
    EXPECT_THROW(load_tfidf(path + ".missing"), IoError);
}

TEST(Hashed, DeterministicAndScaleInvariant) {
    const auto a = embed_hashed(42, 64, {"python", "rust"});
    EXPECT_EQ(embed_hashed(42, 64, {"python", "rust"}), a);
    EXPECT_EQ(a.dim(), 64u);
    EXPECT_NEAR(l2_norm(a.values), 1.0, 1e-12);

    const auto one = embed_hashed(42, 64, {"a"});
    const auto two = embed_hashed(42, 64, {"a", "a"});
    EXPECT_NEAR(cosine_similarity(one, two), 1.0, 1e-12);

    const auto empty = embed_hashed(42, 64, {});
    EXPECT_EQ(l2_norm(empty.values), 0.0);
    EXPECT_THROW(embed_hashed(42, 4, {"a"}), ArgumentError);
}

TEST(Hashed, OrderInvariantAndSeedSensitive) {
    const auto a = embed_hashed(1, 32, {"x", "y", "z", "x"});
    const auto b = embed_hashed(1, 32, {"z", "x", "x", "y"});
    for (std::size_t i = 0; i < a.dim(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-12);
    EXPECT_NE(embed_hashed(2, 32, {"x", "y", "z", "x"}), a);
}

TEST(Hashed, EmbedderMatchesFreeFunction) {
    HashedEmbedder e(9, 48, StopwordSet{"the"});
    const auto v = e.embed("The python and THE rust");
    EXPECT_EQ(v, embed_hashed(9, 48, {"python", "and", "rust"}));
    EXPECT_EQ(e.embed("The python and THE rust"), v);
    EXPECT_EQ(e.descriptor().kind, BackendKind::HashedProjection);
    EXPECT_EQ(e.descriptor().config.at("seed"), "9");
    EXPECT_THROW(HashedEmbedder(9, 7, {}), ArgumentError);
}

TEST(Cosine, Examples) {
    const EmbeddingVector u({1.0, 2.0, -3.0});
    EXPECT_NEAR(cosine_similarity(u, u), 1.0, 1e-15);
    EXPECT_NEAR(cosine_similarity(EmbeddingVector({1, 0}), EmbeddingVector({0, 1})), 0.0, 1e-15);
    EXPECT_NEAR(cosine_similarity(u, EmbeddingVector({-1.0, -2.0, 3.0})), -1.0, 1e-15);
    EXPECT_EQ(cosine_similarity(EmbeddingVector({0, 0}), EmbeddingVector({1, 1})), 0.0);
    EXPECT_THROW(cosine_similarity(EmbeddingVector({1}), EmbeddingVector({1, 2})), ArgumentError);
}

TEST(Cosine, MatchesOracleAndStaysInRange) {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(10), b(10);
        oracle::SparseVec sa, sb;
        for (int i = 0; i < 10; ++i) {
            a[i] = nd(gen);
            b[i] = nd(gen);
            sa["k" + std::to_string(i)] = a[i];
            sb["k" + std::to_string(i)] = b[i];
        }
        const double c = cosine_similarity(EmbeddingVector(a), EmbeddingVector(b));
        EXPECT_NEAR(c, oracle::cosine(sa, sb), 1e-12);
        EXPECT_LE(std::abs(c), 1.0);
    }
}

TEST(Backend, KindParsingAndFactory) {
    EXPECT_EQ(parse_backend_kind("tfidf"), BackendKind::TfIdf);
    EXPECT_EQ(parse_backend_kind("hashed"), BackendKind::HashedProjection);
    EXPECT_EQ(parse_backend_kind("remote"), BackendKind::Remote);
    EXPECT_THROW(parse_backend_kind("use"), ArgumentError);

    const auto corpus = corpus_of({"python rust", "go"});
    BackendOptions opt;
    auto tf = make_backend(opt, corpus, kNoStop);
    EXPECT_EQ(tf->dim(), 3u);
    opt.kind = BackendKind::HashedProjection;
    opt.hashed_dim = 16;
    auto h = make_backend(opt, corpus, kNoStop);
    EXPECT_EQ(h->dim(), 16u);
    EXPECT_EQ(to_json(h->descriptor()).at("kind"), "hashed");
}
