#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rankattack/embedding.hpp"
#include "rankattack/error.hpp"
#include "rankattack/mlp.hpp"
#include "rankattack/parallel.hpp"
#include "rankattack/ranking.hpp"
#include "rankattack/rng.hpp"
#include "rankattack/text.hpp"
#include "rankattack/whitebox.hpp"

namespace rankattack {

// ---------------------------------------------------------------------------
// Oracles

/// Accepts a resume iff every required word appears among its tokens.
class RuleOracle {
public:
    explicit RuleOracle(std::vector<std::string> required_words) {
        if (required_words.empty()) throw ArgumentError("rule oracle needs at least one required word");
        for (const auto& w : required_words) {
            const auto toks = tokenize(w);
            if (toks.size() != 1 || toks.front() != w)
                throw ArgumentError("rule oracle words must be single lowercase tokens: '" + w + "'");
            required_.insert(w);
        }
    }

    const std::set<std::string>& required_words() const noexcept { return required_; }

    bool accepts_tokens(const std::unordered_set<std::string>& tokens) const {
        return std::all_of(required_.begin(), required_.end(), [&](const auto& w) { return tokens.contains(w); });
    }

    bool accepts(std::string_view text) const {
        const auto toks = tokenize(text);
        return accepts_tokens({toks.begin(), toks.end()});
    }

private:
    std::set<std::string> required_;
};

/// Ranks a resume against a fixed job within a static pool.
class RankingOracle {
public:
    RankingOracle(Document job, std::vector<Document> pool, std::shared_ptr<const Embedder> backend,
                  std::size_t threads = 1)
        : job_(std::move(job)),
          pool_docs_(std::move(pool)),
          backend_(std::move(backend)),
          scored_(job_, pool_docs_, *backend_, threads) {}

    const Document& job() const noexcept { return job_; }
    const std::vector<Document>& pool() const noexcept { return pool_docs_; }
    const Embedder& backend() const noexcept { return *backend_; }

    std::size_t rank_of(std::string_view resume_id) const { return scored_.rank_of(resume_id); }

    /// Rank the resume would get if its text were replaced.
    std::size_t rank_if(std::string_view resume_id, std::string_view text) const {
        return scored_.rank_if_replaced(resume_id, text);
    }

private:
    Document job_;
    std::vector<Document> pool_docs_;
    std::shared_ptr<const Embedder> backend_;
    ScoredPool scored_;
};

// ---------------------------------------------------------------------------
// Augmentation

/// Every resume paired with every job: resume text, newline, job text.
inline std::vector<Document> augment_concat(std::span<const Document> resumes, std::span<const Document> jobs) {
    if (resumes.empty() || jobs.empty()) throw ArgumentError("augment_concat: empty input");
    std::vector<Document> out;
    out.reserve(resumes.size() * jobs.size());
    for (const auto& r : resumes) {
        for (const auto& j : jobs) out.push_back({r.id + "+" + j.id, DocKind::Resume, r.text + "\n" + j.text});
    }
    return out;
}

struct AugmentWarning {
    std::string doc_id;
    std::string message;
};

struct SplitAugmentation {
    std::vector<Document> documents;
    std::vector<AugmentWarning> warnings;
};

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) {
            out.push_back(text.substr(start));
            return out;
        }
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
}

}  // namespace detail

/// Upper half of every resume joined with the lower half of every resume
/// (self pairs included). Halves split at the line midpoint, the upper half
/// taking the extra line. Single-line resumes are skipped with a warning.
inline SplitAugmentation augment_split(std::span<const Document> resumes) {
    struct Halves {
        const Document* doc;
        std::string upper, lower;
    };
    SplitAugmentation out;
    std::vector<Halves> halves;
    for (const auto& r : resumes) {
        const auto lines = detail::split_lines(r.text);
        if (lines.size() < 2) {
            out.warnings.push_back({r.id, "single-line resume skipped"});
            continue;
        }
        const std::size_t cut = (lines.size() + 1) / 2;
        halves.push_back({&r, join(std::span(lines).first(cut), "\n"), join(std::span(lines).subspan(cut), "\n")});
    }
    out.documents.reserve(halves.size() * halves.size());
    for (const auto& up : halves) {
        for (const auto& lo : halves) {
            out.documents.push_back({up.doc->id + "x" + lo.doc->id, DocKind::Resume, up.upper + "\n" + lo.lower});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Labels and datasets

/// label[i] = 1 iff the oracle rejects the resume and accepts it once
/// vocab[i] is appended. Already-accepted resumes get all zeros.
inline std::vector<std::uint8_t> label_binary(const Document& resume, const Document& /*job*/,
                                              const RuleOracle& oracle, const Vocabulary& vocab_labels) {
    std::vector<std::uint8_t> labels(vocab_labels.size(), 0);
    const auto toks = tokenize(resume.text);
    std::unordered_set<std::string> base(toks.begin(), toks.end());
    if (oracle.accepts_tokens(base)) return labels;
    for (std::size_t i = 0; i < vocab_labels.size(); ++i) {
        if (oracle.accepts(append_phrases(resume.text, std::span(&vocab_labels[i], 1)))) labels[i] = 1;
    }
    return labels;
}

/// White-box teacher labels: unigram phase 2 over the given phase-1 shortlist,
/// keeping the top `top` phrases that belong to vocab_labels.
inline std::vector<std::uint8_t> label_ranking(const Document& resume, const Document& job,
                                               std::span<const KeywordScore> phase1_shortlist,
                                               const Vocabulary& vocab_labels, const Embedder& backend,
                                               std::size_t top = 50) {
    std::vector<std::uint8_t> labels(vocab_labels.size(), 0);
    if (phase1_shortlist.empty()) return labels;
    const auto ordered = phase2_resort(job, resume, phase1_shortlist, backend);
    std::size_t taken = 0;
    for (const auto& k : ordered) {
        if (taken == top) break;
        if (auto i = vocab_labels.find(k.phrase)) {
            labels[*i] = 1;
            ++taken;
        }
    }
    return labels;
}

/// Runs unigram phase 1 on the job (shortlist of `shortlist` phrases), then
/// label_ranking.
inline std::vector<std::uint8_t> label_ranking(const Document& resume, const Document& job,
                                               const Vocabulary& vocab_labels, const Embedder& backend,
                                               const StopwordSet& stopwords, std::size_t top = 50,
                                               std::size_t shortlist = 50) {
    auto p1 = phase1_extract(job, Gram::Unigram, backend, stopwords);
    if (p1.size() > shortlist) p1.resize(shortlist);
    return label_ranking(resume, job, p1, vocab_labels, backend, top);
}

struct GroundtruthSet {
    Matrix X;
    Matrix Y;
    Vocabulary vocab_features;
    Vocabulary vocab_labels;
    /// Row ids and the resume each row attacks; aligned with X and Y rows.
    std::vector<std::string> ids;
    std::vector<Document> subjects;

    std::size_t rows() const noexcept { return X.rows; }
};

namespace detail {

inline void copy_bits(std::span<double> dst, const OneHotVector& bits) {
    for (std::size_t i = 0; i < bits.size(); ++i) dst[i] = bits[i];
}

}  // namespace detail

/// Concatenated resume/job one-hot rows over the most frequent words of all
/// documents; labels from the rule oracle over the same vocabulary.
inline GroundtruthSet build_simple_dataset(std::span<const Document> resumes, std::span<const Document> jobs,
                                           const RuleOracle& oracle, const StopwordSet& stopwords,
                                           std::size_t vocab_size = 20) {
    if (resumes.empty() || jobs.empty()) throw ArgumentError("build_simple_dataset: empty input");
    std::vector<Document> all(resumes.begin(), resumes.end());
    all.insert(all.end(), jobs.begin(), jobs.end());
    GroundtruthSet ds;
    ds.vocab_features = build_vocabulary(all, stopwords, vocab_size);
    ds.vocab_labels = ds.vocab_features;
    const std::size_t v = ds.vocab_features.size();

    std::vector<OneHotVector> job_bits;
    for (const auto& j : jobs) job_bits.push_back(one_hot(content_tokens(j.text, stopwords), ds.vocab_features));

    const std::size_t n = resumes.size() * jobs.size();
    ds.X = Matrix(n, 2 * v);
    ds.Y = Matrix(n, v);
    std::size_t row = 0;
    for (const auto& r : resumes) {
        const auto rbits = one_hot(content_tokens(r.text, stopwords), ds.vocab_features);
        for (std::size_t k = 0; k < jobs.size(); ++k, ++row) {
            auto x = ds.X.row(row);
            detail::copy_bits(x.first(v), rbits);
            detail::copy_bits(x.subspan(v), job_bits[k]);
            detail::copy_bits(ds.Y.row(row), label_binary(r, jobs[k], oracle, ds.vocab_labels));
            ds.ids.push_back(r.id + "+" + jobs[k].id);
            ds.subjects.push_back(r);
        }
    }
    return ds;
}

struct ComplexDatasetOptions {
    std::size_t vocab_size = 500;
    std::size_t label_cap = 50;
    std::size_t label_top = 50;
    std::size_t shortlist = 50;
    std::size_t threads = 1;
};

/// One-hot resumes against a single job. Labels are the job's words in
/// phase-1 influence order (capped), set per resume by the white-box teacher.
inline GroundtruthSet build_complex_dataset(std::span<const Document> resumes, const Document& job,
                                            const Embedder& backend, const StopwordSet& stopwords,
                                            const ComplexDatasetOptions& opt = {}) {
    if (resumes.empty()) throw ArgumentError("build_complex_dataset: no resumes");
    GroundtruthSet ds;
    ds.vocab_features = build_vocabulary(resumes, stopwords, opt.vocab_size);

    auto p1 = phase1_extract(job, Gram::Unigram, backend, stopwords, opt.threads);
    std::vector<std::string> label_words;
    for (const auto& k : p1) {
        if (label_words.size() == opt.label_cap) break;
        label_words.push_back(k.phrase);
    }
    ds.vocab_labels = Vocabulary(label_words);
    if (p1.size() > opt.shortlist) p1.resize(opt.shortlist);

    ds.X = Matrix(resumes.size(), ds.vocab_features.size());
    ds.Y = Matrix(resumes.size(), ds.vocab_labels.size());
    ds.ids.resize(resumes.size());
    ds.subjects.assign(resumes.begin(), resumes.end());
    parallel_for(resumes.size(), opt.threads, [&](std::size_t r) {
        detail::copy_bits(ds.X.row(r), one_hot(content_tokens(resumes[r].text, stopwords), ds.vocab_features));
        detail::copy_bits(ds.Y.row(r), label_ranking(resumes[r], job, p1, ds.vocab_labels, backend, opt.label_top));
        ds.ids[r] = resumes[r].id;
    });
    return ds;
}

namespace detail {

inline std::vector<std::size_t> set_bits(std::span<const double> row) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] != 0.0) out.push_back(i);
    }
    return out;
}

}  // namespace detail

/// JSON lines, one per row: {"id", "x": [set bit indices], "y": [...]}.
inline void write_groundtruth_jsonl(std::ostream& out, const GroundtruthSet& ds) {
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        out << nlohmann::json{{"id", ds.ids[r]}, {"x", detail::set_bits(ds.X.row(r))}, {"y", detail::set_bits(ds.Y.row(r))}}
                   .dump()
            << '\n';
    }
}

/// Parses rows written by write_groundtruth_jsonl; widths come from the
/// caller. Returns ids plus dense X and Y.
inline GroundtruthSet read_groundtruth_jsonl(std::istream& in, std::size_t x_width, std::size_t y_width) {
    GroundtruthSet ds;
    std::vector<std::vector<std::size_t>> xs, ys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            ds.ids.push_back(j.at("id").get<std::string>());
            xs.push_back(j.at("x").get<std::vector<std::size_t>>());
            ys.push_back(j.at("y").get<std::vector<std::size_t>>());
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("malformed groundtruth line: ") + e.what());
        }
    }
    ds.X = Matrix(ds.ids.size(), x_width);
    ds.Y = Matrix(ds.ids.size(), y_width);
    for (std::size_t r = 0; r < ds.ids.size(); ++r) {
        for (auto i : xs[r]) {
            if (i >= x_width) throw IoError("groundtruth x index out of range");
            ds.X(r, i) = 1.0;
        }
        for (auto i : ys[r]) {
            if (i >= y_width) throw IoError("groundtruth y index out of range");
            ds.Y(r, i) = 1.0;
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
    TrainConfig train;
    std::vector<std::size_t> hidden{128, 64, 32};
    double dropout_rate = 0.1;
    double test_fraction = 0.3;
    double threshold = 0.5;
    std::size_t top_k = 50;
};

/// Single seeded shuffle, then the first (1 - test_fraction) rows train.
struct DataSplit {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

inline DataSplit split_rows(std::size_t n, double test_fraction, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "split"));
    auto order = rng.permutation(n);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test >= n) throw ArgumentError("degenerate train/test split");
    DataSplit s;
    s.train_rows.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_test));
    s.test_rows.assign(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());
    return s;
}

inline Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), m.cols);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto src = m.row(rows[k]);
        std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
}

struct TrainedSurrogate {
    MlpModel model;
    std::vector<EpochMetrics> metrics;
    DataSplit split;
};

inline TrainedSurrogate train_surrogate(const GroundtruthSet& ds, const ExperimentConfig& cfg) {
    auto split = split_rows(ds.rows(), cfg.test_fraction, cfg.train.seed);
    auto model = make_mlp(ds.X.cols, cfg.hidden, ds.Y.cols, cfg.dropout_rate, cfg.train.seed);
    auto result = train(std::move(model), gather_rows(ds.X, split.train_rows), gather_rows(ds.Y, split.train_rows),
                        cfg.train);
    return {std::move(result.model), std::move(result.metrics), std::move(split)};
}

struct BinaryExperimentResult {
    double acceptance_before = 0.0;
    double acceptance_after = 0.0;
    std::size_t test_rows = 0;
    std::vector<std::vector<std::string>> inserted;
};

/// Acceptance rate on the test rows before and after appending the words
/// the surrogate predicts at cfg.threshold.
inline BinaryExperimentResult run_binary_experiment(const GroundtruthSet& ds, const RuleOracle& oracle,
                                                    const MlpModel& model, std::span<const std::size_t> test_rows,
                                                    const ExperimentConfig& cfg) {
    if (test_rows.empty()) throw ArgumentError("run_binary_experiment: empty test split");
    BinaryExperimentResult res;
    res.test_rows = test_rows.size();
    std::size_t before = 0, after = 0;
    for (auto r : test_rows) {
        const auto& resume = ds.subjects[r];
        before += oracle.accepts(resume.text);
        std::vector<std::string> words;
        for (auto i : predict_threshold(model, ds.X.row(r), cfg.threshold)) words.push_back(ds.vocab_labels[i]);
        after += oracle.accepts(append_phrases(resume.text, words));
        res.inserted.push_back(std::move(words));
    }
    res.acceptance_before = static_cast<double>(before) / static_cast<double>(test_rows.size());
    res.acceptance_after = static_cast<double>(after) / static_cast<double>(test_rows.size());
    return res;
}

/// Rank before and after appending the top-k predicted words, one report per
/// test row. k is clamped to the label width.
inline std::vector<RankReport> run_ranking_experiment(const GroundtruthSet& ds, const RankingOracle& oracle,
                                                      const MlpModel& model, std::span<const std::size_t> test_rows,
                                                      const ExperimentConfig& cfg, std::size_t threads = 1) {
    const std::size_t k = std::min(cfg.top_k, ds.Y.cols);
    std::vector<RankReport> out(test_rows.size());
    parallel_for(test_rows.size(), threads, [&](std::size_t t) {
        const auto r = test_rows[t];
        const auto& resume = ds.subjects[r];
        std::vector<std::string> words;
        for (auto i : predict_topk(model, ds.X.row(r), k)) words.push_back(ds.vocab_labels[i]);
        const auto before = oracle.rank_of(resume.id);
        const auto after = oracle.rank_if(resume.id, append_phrases(resume.text, words));
        out[t] = {oracle.job().id,
                  resume.id,
                  Gram::Unigram,
                  k,
                  before,
                  after,
                  static_cast<long>(before) - static_cast<long>(after),
                  std::move(words)};
    });
    return out;
}

/// White-box attack on the oracle's own pool with the given phase-1
/// shortlist, for comparison against the surrogate.
inline std::vector<RankReport> whitebox_reference(const RankingOracle& oracle, std::span<const Document> resumes,
                                                  std::span<const KeywordScore> shortlist, std::size_t budget,
                                                  std::size_t threads = 1) {
    std::vector<RankReport> out(resumes.size());
    parallel_for(resumes.size(), threads, [&](std::size_t t) {
        const auto& resume = resumes[t];
        const auto ordered = phase2_resort(oracle.job(), resume, shortlist, oracle.backend());
        std::vector<std::string> words;
        for (std::size_t k = 0; k < std::min(budget, ordered.size()); ++k) words.push_back(ordered[k].phrase);
        const auto before = oracle.rank_of(resume.id);
        const auto after = oracle.rank_if(resume.id, append_phrases(resume.text, words));
        out[t] = {oracle.job().id,
                  resume.id,
                  Gram::Unigram,
                  budget,
                  before,
                  after,
                  static_cast<long>(before) - static_cast<long>(after),
                  std::move(words)};
    });
    return out;
}

inline double mean_rank_change(std::span<const RankReport> reports) {
    if (reports.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : reports) s += static_cast<double>(r.rank_change);
    return s / static_cast<double>(reports.size());
}

// ---------------------------------------------------------------------------
// Oracle config files

/// {"kind": "rule", "required_words": [...]}.
inline RuleOracle rule_oracle_from_json(const nlohmann::json& j) {
    if (j.value("kind", std::string{}) != "rule") throw ArgumentError("oracle config kind must be 'rule'");
    return RuleOracle(j.at("required_words").get<std::vector<std::string>>());
}

struct RankingOracleConfig {
    std::string job_id;
    nlohmann::json backend;
};

/// {"kind": "ranking", "job": "<id>", "backend": {...}}.
inline RankingOracleConfig ranking_oracle_config_from_json(const nlohmann::json& j) {
    if (j.value("kind", std::string{}) != "ranking") throw ArgumentError("oracle config kind must be 'ranking'");
    return {j.at("job").get<std::string>(), j.value("backend", nlohmann::json::object())};
}

}  // namespace rankattack
