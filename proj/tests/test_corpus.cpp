#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "rankattack/corpus.hpp"

using namespace rankattack;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::path(::testing::TempDir()) / ("rankattack_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

std::set<std::string> token_set(const std::string& text) {
    const auto t = tokenize(text);
    return {t.begin(), t.end()};
}

std::set<std::string> requirement_skills(const Document& job) {
    const auto start = job.text.find("requirements:");
    const auto end = job.text.find('\n', start);
    auto toks = tokenize(job.text.substr(start, end - start));
    toks.erase(toks.begin());
    return {toks.begin(), toks.end()};
}

}  // namespace

TEST(LoadCorpus, ReadsSortedDirectories) {
    const auto root = fresh_dir("load");
    write_text(root / "resumes" / "c.txt", "gamma");
    write_text(root / "resumes" / "a.txt", "alpha");
    write_text(root / "resumes" / "b.txt", "beta");
    write_text(root / "resumes" / "notes.md", "ignored");
    write_text(root / "jobs" / "j1.txt", "python");
    const auto c = load_corpus(root);
    ASSERT_EQ(c.resumes.size(), 3u);
    ASSERT_EQ(c.jobs.size(), 1u);
    EXPECT_EQ(c.resumes[0].id, "a");
    EXPECT_EQ(c.resumes[1].id, "b");
    EXPECT_EQ(c.resumes[2].id, "c");
    EXPECT_EQ(c.resumes[0].kind, DocKind::Resume);
    EXPECT_EQ(c.jobs[0].kind, DocKind::JobDescription);
    EXPECT_EQ(c.jobs[0].text, "python");
    EXPECT_EQ(c.job("j1").id, "j1");
    EXPECT_THROW(c.job("nope"), NotFoundError);
    EXPECT_EQ(c.source, root.string());
    EXPECT_EQ(c.all().size(), 4u);
}

TEST(LoadCorpus, Errors) {
    const auto root = fresh_dir("errors");
    EXPECT_THROW(load_corpus(root), IoError);
    write_text(root / "resumes" / "a.txt", "alpha");
    EXPECT_THROW(load_corpus(root), IoError);
    fs::create_directories(root / "jobs");
    try {
        load_corpus(root);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("jobs"), std::string::npos);
    }
    write_text(root / "jobs" / "a.txt", "dup");
    EXPECT_THROW(load_corpus(root), IoError);
}

TEST(Synthetic, DeterministicAndRoundTrips) {
    SyntheticConfig cfg;
    cfg.seed = 5;
    cfg.n_resumes = 12;
    cfg.n_jobs = 4;
    const auto a = generate_synthetic(cfg);
    const auto b = generate_synthetic(cfg);
    EXPECT_EQ(a.resumes, b.resumes);
    EXPECT_EQ(a.jobs, b.jobs);
    EXPECT_EQ(a.source, "synthetic(5)");
    cfg.seed = 6;
    EXPECT_NE(generate_synthetic(cfg).resumes, a.resumes);

    const auto root = fresh_dir("roundtrip");
    write_corpus(a, root);
    const auto back = load_corpus(root);
    EXPECT_EQ(back.resumes, a.resumes);
    EXPECT_EQ(back.jobs, a.jobs);
    EXPECT_EQ(corpus_stats(back), corpus_stats(a));
    EXPECT_EQ(corpus_stats(load_corpus(root)), corpus_stats(back));
}

TEST(Synthetic, DefaultsAndStructure) {
    const auto c = generate_synthetic(SyntheticConfig{});
    EXPECT_EQ(c.resumes.size(), 100u);
    EXPECT_EQ(c.jobs.size(), 50u);
    EXPECT_EQ(c.resumes[7].id, "resume007");
    EXPECT_EQ(c.jobs[49].id, "job049");
    for (const auto& r : c.resumes) {
        EXPECT_NE(r.text.find("summary:"), std::string::npos);
        EXPECT_NE(r.text.find("skills:"), std::string::npos);
        EXPECT_NE(r.text.find("experience:"), std::string::npos);
        EXPECT_GE(std::count(r.text.begin(), r.text.end(), '\n'), 6);
    }
    for (const auto& j : c.jobs) {
        const auto skills = requirement_skills(j);
        EXPECT_GE(skills.size(), 10u);
        EXPECT_LE(skills.size(), 17u);
    }
}

TEST(Synthetic, WordListsAreDisjointSingleTokens) {
    std::set<std::string> skills, filler;
    for (auto s : detail::kSkills) {
        EXPECT_EQ(tokenize(s).size(), 1u) << s;
        EXPECT_TRUE(skills.insert(std::string(s)).second) << s;
    }
    for (auto s : detail::kFiller) {
        EXPECT_EQ(tokenize(s).size(), 1u) << s;
        EXPECT_TRUE(filler.insert(std::string(s)).second) << s;
        EXPECT_FALSE(skills.contains(std::string(s))) << s;
    }
}

TEST(Synthetic, OverlapExtremes) {
    SyntheticConfig cfg;
    cfg.n_resumes = 10;
    cfg.n_jobs = 5;
    cfg.overlap = 1.0;
    const auto full = generate_synthetic(cfg);
    for (const auto& r : full.resumes) {
        const auto toks = token_set(r.text);
        for (const auto& j : full.jobs)
            for (const auto& s : requirement_skills(j)) EXPECT_TRUE(toks.contains(s)) << r.id << " lacks " << s;
    }
    cfg.overlap = 0.0;
    const auto none = generate_synthetic(cfg);
    for (const auto& r : none.resumes) {
        const auto toks = token_set(r.text);
        for (const auto& j : none.jobs)
            for (const auto& s : requirement_skills(j)) EXPECT_FALSE(toks.contains(s)) << r.id << " has " << s;
    }
}

TEST(Synthetic, Preconditions) {
    SyntheticConfig cfg;
    cfg.skill_pool_size = 19;
    EXPECT_THROW(generate_synthetic(cfg), ArgumentError);
    cfg.skill_pool_size = 150;
    EXPECT_NO_THROW(generate_synthetic(cfg));
    cfg.overlap = 1.5;
    EXPECT_THROW(generate_synthetic(cfg), ArgumentError);
}

TEST(PlantKeyword, ExactFraction) {
    SyntheticConfig cfg;
    cfg.n_resumes = 50;
    cfg.n_jobs = 3;
    auto c = generate_synthetic(cfg);
    plant_keyword(c, "python", 0.2, 9);
    std::size_t with = 0;
    for (const auto& r : c.resumes) with += token_set(r.text).contains("python");
    EXPECT_EQ(with, 10u);
    EXPECT_EQ(remove_word("Python, python3 and PYTHON.", "python"), ", python3 and .");
    EXPECT_THROW(plant_keyword(c, "python", 1.2, 9), ArgumentError);
}

TEST(Stats, Examples) {
    Corpus c;
    c.resumes = {{"a", DocKind::Resume, "one two three four five"}, {"b", DocKind::Resume, "one two three four six"}};
    c.jobs = {{"j", DocKind::JobDescription, "seven"}};
    auto s = corpus_stats(c);
    EXPECT_DOUBLE_EQ(s.mean_resume_length, 5.0);
    EXPECT_EQ(s.resume_count, 2u);
    EXPECT_EQ(s.job_count, 1u);
    EXPECT_EQ(s.vocabulary_size, 7u);
    EXPECT_DOUBLE_EQ(s.mean_document_length, 11.0 / 3.0);

    c.resumes.push_back({"empty", DocKind::Resume, ""});
    s = corpus_stats(c);
    EXPECT_EQ(s.resume_count, 3u);
    EXPECT_DOUBLE_EQ(s.mean_resume_length, 10.0 / 3.0);

    const auto j = to_json(s);
    EXPECT_EQ(j.at("resumes").at("count"), 3);
    EXPECT_EQ(j.at("vocabulary_size"), 7);
}
