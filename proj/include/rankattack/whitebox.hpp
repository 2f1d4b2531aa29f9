#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rankattack/embedding.hpp"
#include "rankattack/error.hpp"
#include "rankattack/parallel.hpp"
#include "rankattack/ranking.hpp"
#include "rankattack/text.hpp"

namespace rankattack {

enum class Gram : std::size_t { Unigram = 1, Bigram = 2, Trigram = 3 };

inline std::size_t gram_size(Gram g) { return static_cast<std::size_t>(g); }

inline std::string to_string(Gram g) {
    switch (g) {
        case Gram::Unigram: return "unigram";
        case Gram::Bigram: return "bigram";
        case Gram::Trigram: return "trigram";
    }
    return "unknown";
}

inline Gram parse_gram(std::string_view s) {
    if (s == "unigram" || s == "1") return Gram::Unigram;
    if (s == "bigram" || s == "2") return Gram::Bigram;
    if (s == "trigram" || s == "3") return Gram::Trigram;
    throw ArgumentError("unknown gram size: " + std::string(s));
}

struct KeywordScore {
    std::string phrase;
    double score = 0.0;
    std::size_t n = 1;

    bool operator==(const KeywordScore&) const = default;
};

struct AttackConfig {
    Gram gram = Gram::Unigram;
    /// Phase-1 keywords carried into phase 2.
    std::size_t shortlist = 50;
    std::vector<std::size_t> budgets{1, 2, 5, 10, 20, 50};

    void validate() const {
        if (shortlist == 0) throw ArgumentError("shortlist must be positive");
        if (budgets.empty()) throw ArgumentError("at least one budget is required");
        for (std::size_t i = 0; i < budgets.size(); ++i) {
            if (budgets[i] == 0) throw ArgumentError("budgets must be positive");
            if (i && budgets[i] <= budgets[i - 1]) throw ArgumentError("budgets must be strictly ascending");
        }
        if (budgets.back() > shortlist)
            throw ArgumentError("budget " + std::to_string(budgets.back()) + " exceeds shortlist " +
                                std::to_string(shortlist));
    }
};

struct RankReport {
    std::string job_id;
    std::string resume_id;
    Gram gram = Gram::Unigram;
    std::size_t budget = 0;
    std::size_t rank_before = 0;
    std::size_t rank_after = 0;
    /// rank_before - rank_after; positive means the resume moved toward rank 1.
    long rank_change = 0;
    std::vector<std::string> inserted;

    bool operator==(const RankReport&) const = default;
};

namespace detail {

/// Drops every non-overlapping occurrence of `gram`, scanning left to right.
inline TokenSeq remove_all(const TokenSeq& tokens, std::span<const std::string> gram) {
    TokenSeq out;
    out.reserve(tokens.size());
    const std::size_t n = gram.size();
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (i + n <= tokens.size() && std::equal(gram.begin(), gram.end(), tokens.begin() + i)) {
            i += n;
        } else {
            out.push_back(tokens[i++]);
        }
    }
    return out;
}

}  // namespace detail

/// Deletion scoring: each distinct n-gram of the stopword-filtered job is
/// removed (all occurrences) and the variant is compared with the original.
/// Lower similarity means a more influential phrase, so the result is sorted
/// ascending; equal scores keep first-occurrence order.
inline std::vector<KeywordScore> phase1_extract(const Document& job, Gram gram, const Embedder& backend,
                                                const StopwordSet& stopwords, std::size_t threads = 1) {
    const std::size_t n = gram_size(gram);
    const auto tokens = content_tokens(job.text, stopwords);
    if (tokens.empty()) throw ArgumentError("job '" + job.id + "' is empty after stopword filtering");
    if (tokens.size() < n)
        throw ArgumentError("job '" + job.id + "' has " + std::to_string(tokens.size()) +
                            " content tokens; no " + to_string(gram) + "s available");

    std::vector<std::size_t> first_pos;
    std::vector<std::string> phrases;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        auto p = join(std::span(tokens).subspan(i, n));
        if (seen.insert(p).second) {
            first_pos.push_back(i);
            phrases.push_back(std::move(p));
        }
    }

    const auto original = backend.embed(join(tokens));
    std::vector<KeywordScore> out(phrases.size());
    parallel_for(phrases.size(), threads, [&](std::size_t k) {
        const auto variant = detail::remove_all(tokens, std::span(tokens).subspan(first_pos[k], n));
        out[k] = {phrases[k], cosine_similarity(original, backend.embed(join(variant))), n};
    });
    std::stable_sort(out.begin(), out.end(),
                     [](const KeywordScore& a, const KeywordScore& b) { return a.score < b.score; });
    return out;
}

/// Addition scoring against one resume: each candidate is appended to the
/// original resume on its own and scored by similarity to the job. Sorted
/// descending; equal scores keep input order.
inline std::vector<KeywordScore> phase2_resort(const Document& job, const Document& resume,
                                               std::span<const KeywordScore> shortlist,
                                               const Embedder& backend, std::size_t threads = 1) {
    if (shortlist.empty()) throw ArgumentError("phase2_resort: empty shortlist");
    const auto job_vec = backend.embed(job.text);
    std::vector<KeywordScore> out(shortlist.size());
    parallel_for(shortlist.size(), threads, [&](std::size_t k) {
        const std::string adv = append_phrases(resume.text, std::span(&shortlist[k].phrase, 1));
        out[k] = {shortlist[k].phrase, cosine_similarity(backend.embed(adv), job_vec), shortlist[k].n};
    });
    std::stable_sort(out.begin(), out.end(),
                     [](const KeywordScore& a, const KeywordScore& b) { return a.score > b.score; });
    return out;
}

/// Full white-box experiment: for every (job, resume) pair and budget, insert
/// the top phase-2 phrases into that resume alone and re-rank the pool.
/// Experiments never compound; the input pool is not modified. Reports are
/// ordered job-major, then resume, then budget.
///
/// When a job yields fewer phrases than the shortlist, the shortlist clamps
/// and budgets above it insert every available phrase.
inline std::vector<RankReport> phase3_attack(std::span<const Document> jobs, std::span<const Document> resumes,
                                             const AttackConfig& config, const Embedder& backend,
                                             const StopwordSet& stopwords, std::size_t threads = 1) {
    config.validate();
    if (jobs.empty()) throw ArgumentError("phase3_attack: no jobs");
    if (resumes.size() < 2) throw ArgumentError("phase3_attack: need at least 2 resumes");

    const std::size_t nb = config.budgets.size();
    std::vector<RankReport> reports(jobs.size() * resumes.size() * nb);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& job = jobs[j];
        const ScoredPool pool(job, resumes, backend, threads);
        auto shortlist = phase1_extract(job, config.gram, backend, stopwords, threads);
        if (shortlist.size() > config.shortlist) shortlist.resize(config.shortlist);

        parallel_for(resumes.size(), threads, [&](std::size_t r) {
            const auto& resume = resumes[r];
            const auto before = pool.rank_of(resume.id);
            const auto ordered = phase2_resort(job, resume, shortlist, backend);
            for (std::size_t b = 0; b < nb; ++b) {
                const auto take = std::min(config.budgets[b], ordered.size());
                std::vector<std::string> inserted;
                inserted.reserve(take);
                for (std::size_t k = 0; k < take; ++k) inserted.push_back(ordered[k].phrase);
                const auto after = pool.rank_if_replaced(resume.id, append_phrases(resume.text, inserted));
                auto& rep = reports[(j * resumes.size() + r) * nb + b];
                rep = {job.id,
                       resume.id,
                       config.gram,
                       config.budgets[b],
                       before,
                       after,
                       static_cast<long>(before) - static_cast<long>(after),
                       std::move(inserted)};
            }
        });
    }
    return reports;
}

struct GroupMean {
    Gram gram = Gram::Unigram;
    std::size_t budget = 0;
    std::size_t count = 0;
    double mean_rank_change = 0.0;
};

struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
};

struct AttackSummary {
    std::vector<GroupMean> groups;
    /// Distribution of each resume's mean rank_change over all its reports.
    std::vector<HistogramBin> histogram;
    double bin_width = 2.0;

    /// Mean for (gram, budget); throws NotFoundError when absent.
    double mean(Gram gram, std::size_t budget) const {
        for (const auto& g : groups) {
            if (g.gram == gram && g.budget == budget) return g.mean_rank_change;
        }
        throw NotFoundError("no reports for " + to_string(gram) + " budget " + std::to_string(budget));
    }
};

inline AttackSummary aggregate(std::span<const RankReport> reports, double bin_width = 2.0) {
    if (reports.empty()) throw ArgumentError("aggregate: no reports");
    if (!(bin_width > 0.0)) throw ArgumentError("aggregate: bin width must be positive");

    std::map<std::pair<Gram, std::size_t>, std::pair<double, std::size_t>> groups;
    std::map<std::string, std::pair<double, std::size_t>> per_resume;
    for (const auto& r : reports) {
        auto& g = groups[{r.gram, r.budget}];
        g.first += static_cast<double>(r.rank_change);
        ++g.second;
        auto& p = per_resume[r.resume_id];
        p.first += static_cast<double>(r.rank_change);
        ++p.second;
    }

    AttackSummary out;
    out.bin_width = bin_width;
    for (const auto& [key, acc] : groups) {
        out.groups.push_back({key.first, key.second, acc.second, acc.first / static_cast<double>(acc.second)});
    }
    std::map<long long, std::size_t> bins;
    for (const auto& [_, acc] : per_resume) {
        const double m = acc.first / static_cast<double>(acc.second);
        ++bins[static_cast<long long>(std::floor(m / bin_width))];
    }
    for (const auto& [idx, count] : bins) {
        const double lo = static_cast<double>(idx) * bin_width;
        out.histogram.push_back({lo, lo + bin_width, count});
    }
    return out;
}

inline void write_reports_csv(std::ostream& out, std::span<const RankReport> reports) {
    out << "job_id,resume_id,gram,budget,rank_before,rank_after,rank_change,inserted\n";
    for (const auto& r : reports) {
        out << csv_field(r.job_id) << ',' << csv_field(r.resume_id) << ',' << to_string(r.gram) << ','
            << r.budget << ',' << r.rank_before << ',' << r.rank_after << ',' << r.rank_change << ','
            << csv_field(join(r.inserted, ";")) << '\n';
    }
}

inline nlohmann::json to_json(const AttackSummary& s) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : s.groups) {
        groups.push_back({{"gram", to_string(g.gram)},
                          {"budget", g.budget},
                          {"count", g.count},
                          {"mean_rank_change", g.mean_rank_change}});
    }
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& b : s.histogram) {
        hist.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}});
    }
    return {{"groups", std::move(groups)}, {"histogram", std::move(hist)}, {"bin_width", s.bin_width}};
}

}  // namespace rankattack
