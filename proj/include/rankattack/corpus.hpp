#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rankattack/error.hpp"
#include "rankattack/rng.hpp"
#include "rankattack/text.hpp"

namespace rankattack {

struct Corpus {
    std::vector<Document> resumes;
    std::vector<Document> jobs;
    std::string source;

    const Document& job(std::string_view id) const {
        for (const auto& j : jobs) {
            if (j.id == id) return j;
        }
        throw NotFoundError("unknown job id: " + std::string(id));
    }

    /// Resumes followed by jobs.
    std::vector<Document> all() const {
        std::vector<Document> out = resumes;
        out.insert(out.end(), jobs.begin(), jobs.end());
        return out;
    }
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + p.string());
    return ss.str();
}

inline std::vector<Document> load_dir(const std::filesystem::path& dir, DocKind kind) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("missing directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    std::vector<Document> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back({f.stem().string(), kind, read_file(f)});
    return out;
}

}  // namespace detail

/// Reads root/resumes/*.txt and root/jobs/*.txt in sorted filename order.
/// Document ids are filename stems and must be unique across both folders.
inline Corpus load_corpus(const std::filesystem::path& root) {
    Corpus c;
    c.resumes = detail::load_dir(root / "resumes", DocKind::Resume);
    c.jobs = detail::load_dir(root / "jobs", DocKind::JobDescription);
    if (c.jobs.empty()) throw IoError("no job files in " + (root / "jobs").string());
    std::unordered_set<std::string> ids;
    for (const auto* docs : {&c.resumes, &c.jobs}) {
        for (const auto& d : *docs) {
            if (!ids.insert(d.id).second) throw IoError("duplicate document id '" + d.id + "' under " + root.string());
        }
    }
    c.source = root.string();
    return c;
}

inline void write_corpus(const Corpus& c, const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    for (const char* sub : {"resumes", "jobs"}) {
        fs::create_directories(root / sub, ec);
        if (ec) throw IoError("cannot create " + (root / sub).string() + ": " + ec.message());
    }
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        out << text;
        if (!out) throw IoError("cannot write " + p.string());
    };
    for (const auto& d : c.resumes) write(root / "resumes" / (d.id + ".txt"), d.text);
    for (const auto& d : c.jobs) write(root / "jobs" / (d.id + ".txt"), d.text);
}

struct SyntheticConfig {
    std::uint64_t seed = 0;
    std::size_t n_resumes = 100;
    std::size_t n_jobs = 50;
    std::size_t skill_pool_size = 80;
    /// Probability that a resume lists any given job skill.
    double overlap = 0.3;
};

namespace detail {

inline constexpr auto kSkills = std::to_array<std::string_view>({
    "python", "java", "rust", "golang", "kotlin", "swift", "typescript", "javascript", "react",
    "angular", "vue", "django", "flask", "spring", "kubernetes", "docker", "terraform", "ansible",
    "aws", "azure", "gcp", "linux", "bash", "sql", "postgresql", "mysql", "mongodb", "redis",
    "kafka", "spark", "hadoop", "airflow", "tensorflow", "pytorch", "keras", "pandas", "numpy",
    "scikit", "tableau", "excel", "git", "jenkins", "graphql", "grpc", "microservices", "agile",
    "scrum", "jira", "nginx", "html", "css", "sass", "webpack", "nodejs", "express", "ruby",
    "rails", "php", "laravel", "scala", "haskell", "elixir", "erlang", "matlab", "fortran",
    "cobol", "perl", "lua", "dart", "flutter", "android", "ios", "unity", "unreal", "opencv",
    "nlp", "bigquery", "snowflake", "dbt", "looker", "powerbi", "salesforce", "sap", "oracle",
    "cassandra", "elasticsearch", "prometheus", "grafana", "datadog", "splunk", "selenium",
    "cypress", "jest", "pytest", "junit", "maven", "gradle", "cmake", "cuda", "opengl"});

inline constexpr auto kFiller = std::to_array<std::string_view>({
    "team", "collaborate", "deliver", "build", "design", "develop", "maintain", "scalable",
    "reliable", "systems", "customers", "product", "quality", "improve", "performance", "lead",
    "mentor", "engineers", "stakeholders", "requirements", "solutions", "business", "data",
    "platform", "services", "applications", "features", "release", "testing", "production",
    "support", "operations", "architecture", "analysis", "reporting", "strategy", "planning",
    "communication", "problem", "solving", "ownership", "initiative", "growth", "experience",
    "years", "degree", "computer", "science", "engineering", "projects", "company", "startup",
    "enterprise", "global", "remote", "office", "fast", "paced", "environment", "culture",
    "passion", "learning", "innovation", "impact", "users", "mobile", "web", "backend",
    "frontend", "fullstack", "infrastructure", "cloud", "security", "compliance", "automation",
    "pipelines", "deployment", "monitoring", "incident", "response", "documentation", "review",
    "code", "standards", "best", "practices", "roadmap", "vision", "metrics", "goals", "results",
    "efficiency", "cost", "reduction", "revenue", "scale", "partners", "vendors", "clients",
    "consulting", "research", "prototype", "launch", "iterate", "feedback", "optimize",
    "integrate", "migrate", "modernize", "refactor", "debug", "troubleshoot", "analyze",
    "model", "forecast", "dashboard", "insights", "workflow", "process", "tooling", "library",
    "framework", "interface", "api", "database", "storage", "network", "latency", "throughput",
    "availability", "resilience", "observability", "scheduling", "batch", "streaming",
    "realtime", "distributed", "concurrent", "parallel", "embedded", "firmware", "hardware",
    "graphics", "rendering", "simulation", "finance", "healthcare", "retail", "logistics",
    "education", "media", "gaming", "advertising", "marketplace", "payments", "banking",
    "insurance", "telecom", "energy", "manufacturing", "government", "nonprofit", "travel"});

inline std::vector<std::string> skill_pool(std::size_t size) {
    std::vector<std::string> out;
    out.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        out.push_back(i < kSkills.size() ? std::string(kSkills[i]) : "skill" + std::to_string(i));
    }
    return out;
}

inline std::string filler_sentence(Rng& rng, std::size_t words) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) out.push_back(' ');
        out.append(kFiller[rng.below(kFiller.size())]);
    }
    return out;
}

/// Draws k distinct items from pool.
inline std::vector<std::string> sample(Rng& rng, const std::vector<std::string>& pool, std::size_t k) {
    auto idx = rng.permutation(pool.size());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, pool.size()); ++i) out.push_back(pool[idx[i]]);
    return out;
}

inline std::string zero_pad(std::size_t i, std::size_t width) {
    auto s = std::to_string(i);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

}  // namespace detail

/// Seeded synthetic corpus. Jobs list a random skill subset plus boilerplate.
/// Resumes are line-structured (summary, skills, experience, education) and
/// include each skill required by any job with probability `overlap`, plus
/// a few skills no job asks for.
inline Corpus generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.skill_pool_size < 20) throw ArgumentError("skill pool size must be >= 20");
    if (!(cfg.overlap >= 0.0 && cfg.overlap <= 1.0)) throw ArgumentError("overlap must be in [0, 1]");
    Rng rng(derive_seed(cfg.seed, "corpus"));
    const auto pool = detail::skill_pool(cfg.skill_pool_size);
    Corpus c;
    c.source = "synthetic(" + std::to_string(cfg.seed) + ")";

    std::set<std::string> job_skills;
    for (std::size_t j = 0; j < cfg.n_jobs; ++j) {
        const auto skills = detail::sample(rng, pool, 10 + rng.below(8));
        job_skills.insert(skills.begin(), skills.end());
        std::string text = "position: " + detail::filler_sentence(rng, 2) + " engineer\n";
        text += "requirements: " + join(skills, ", ") + "\n";
        for (int s = 0; s < 6; ++s) text += detail::filler_sentence(rng, 7 + rng.below(4)) + ".\n";
        c.jobs.push_back({"job" + detail::zero_pad(j, 3), DocKind::JobDescription, std::move(text)});
    }

    std::vector<std::string> required(job_skills.begin(), job_skills.end());
    std::vector<std::string> other;
    for (const auto& s : pool) {
        if (!job_skills.contains(s)) other.push_back(s);
    }
    for (std::size_t r = 0; r < cfg.n_resumes; ++r) {
        std::vector<std::string> skills;
        for (const auto& s : required) {
            if (rng.bernoulli(cfg.overlap)) skills.push_back(s);
        }
        for (auto& s : detail::sample(rng, other, rng.below(6))) skills.push_back(std::move(s));
        rng.shuffle(skills);

        std::string text = "summary: " + detail::filler_sentence(rng, 8) + ".\n";
        text += detail::filler_sentence(rng, 8) + ".\n";
        text += "skills: " + join(skills, ", ") + "\n";
        for (int e = 0; e < 3; ++e) text += "experience: " + detail::filler_sentence(rng, 9) + ".\n";
        text += "education: " + detail::filler_sentence(rng, 4) + ".\n";
        text += "interests: " + detail::filler_sentence(rng, 3) + ".\n";
        c.resumes.push_back({"resume" + detail::zero_pad(r, 3), DocKind::Resume, std::move(text)});
    }
    return c;
}

/// Removes every whole-word occurrence of `word` (case-insensitive).
inline std::string remove_word(std::string_view text, std::string_view word) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!detail::is_word_byte(static_cast<unsigned char>(text[i]))) {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && detail::is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
        const auto tok = tokenize(text.substr(i, j - i));
        if (!(tok.size() == 1 && tok.front() == word)) out.append(text.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Makes `word` appear in exactly round(fraction * |resumes|) seeded-random
/// resumes (appended to the skills line when there is one) and nowhere else
/// among the resumes. Jobs are left untouched.
inline void plant_keyword(Corpus& c, std::string_view word, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ArgumentError("fraction must be in [0, 1]");
    for (auto& r : c.resumes) r.text = remove_word(r.text, word);
    const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(c.resumes.size())));
    Rng rng(derive_seed(seed, "plant"));
    const auto order = rng.permutation(c.resumes.size());
    for (std::size_t k = 0; k < n; ++k) {
        auto& text = c.resumes[order[k]].text;
        const auto pos = text.find("skills:");
        if (pos == std::string::npos) {
            text += "\n" + std::string(word);
        } else {
            const auto eol = text.find('\n', pos);
            text.insert(eol == std::string::npos ? text.size() : eol, " " + std::string(word));
        }
    }
}

struct CorpusStats {
    std::size_t resume_count = 0;
    std::size_t job_count = 0;
    std::size_t resume_tokens = 0;
    std::size_t job_tokens = 0;
    std::size_t vocabulary_size = 0;
    double mean_resume_length = 0.0;
    double mean_job_length = 0.0;
    double mean_document_length = 0.0;

    bool operator==(const CorpusStats&) const = default;
};

/// Counts use raw tokenize() output (no stopword filtering).
inline CorpusStats corpus_stats(const Corpus& c) {
    CorpusStats s;
    std::unordered_set<std::string> vocab;
    auto count = [&](const std::vector<Document>& docs, std::size_t& total) {
        for (const auto& d : docs) {
            auto toks = tokenize(d.text);
            total += toks.size();
            for (auto& t : toks) vocab.insert(std::move(t));
        }
    };
    count(c.resumes, s.resume_tokens);
    count(c.jobs, s.job_tokens);
    s.resume_count = c.resumes.size();
    s.job_count = c.jobs.size();
    s.vocabulary_size = vocab.size();
    auto mean = [](std::size_t total, std::size_t n) { return n ? static_cast<double>(total) / static_cast<double>(n) : 0.0; };
    s.mean_resume_length = mean(s.resume_tokens, s.resume_count);
    s.mean_job_length = mean(s.job_tokens, s.job_count);
    s.mean_document_length = mean(s.resume_tokens + s.job_tokens, s.resume_count + s.job_count);
    return s;
}

inline nlohmann::json to_json(const CorpusStats& s) {
    return {{"resumes", {{"count", s.resume_count}, {"tokens", s.resume_tokens}, {"mean_length", s.mean_resume_length}}},
            {"jobs", {{"count", s.job_count}, {"tokens", s.job_tokens}, {"mean_length", s.mean_job_length}}},
            {"vocabulary_size", s.vocabulary_size},
            {"mean_document_length", s.mean_document_length}};
}

}  // namespace rankattack
