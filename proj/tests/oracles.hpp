#pragma once

// Reference implementations written directly from the formulas, sharing no
// code with the library, used to cross-check its results.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;
using SparseVec = std::map<std::string, double>;

inline Tokens tokens(const std::string& text, const std::set<std::string>& stop = {}) {
    Tokens out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && !stop.count(cur)) out.push_back(cur);
        cur.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur += static_cast<char>(std::tolower(c));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

inline std::string joined(const Tokens& t) {
    std::string s;
    for (const auto& w : t) s += (s.empty() ? "" : " ") + w;
    return s;
}

struct Tfidf {
    std::map<std::string, double> idf;
};

inline Tfidf fit(const std::vector<Tokens>& docs) {
    Tfidf m;
    std::map<std::string, int> df;
    for (const auto& d : docs) {
        for (const auto& w : std::set<std::string>(d.begin(), d.end())) ++df[w];
    }
    const double n = static_cast<double>(docs.size());
    for (const auto& [w, c] : df) m.idf[w] = std::log((1.0 + n) / (1.0 + c)) + 1.0;
    return m;
}

/// Unnormalized count x idf; cosine does not care about scale.
inline SparseVec embed(const Tfidf& m, const Tokens& doc) {
    SparseVec v;
    for (const auto& w : doc) {
        auto it = m.idf.find(w);
        if (it != m.idf.end()) v[w] += it->second;
    }
    return v;
}

inline double cosine(const SparseVec& a, const SparseVec& b) {
    double ab = 0, aa = 0, bb = 0;
    for (const auto& [w, x] : a) {
        aa += x * x;
        auto it = b.find(w);
        if (it != b.end()) ab += x * it->second;
    }
    for (const auto& [w, y] : b) bb += y * y;
    if (aa == 0 || bb == 0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

/// Dense unit vector in vocabulary (sorted word) order, for direct comparison.
inline std::vector<double> dense_unit(const SparseVec& v, const std::vector<std::string>& vocab) {
    std::vector<double> out;
    double nn = 0;
    for (const auto& w : vocab) {
        auto it = v.find(w);
        out.push_back(it == v.end() ? 0.0 : it->second);
        nn += out.back() * out.back();
    }
    if (nn > 0)
        for (auto& x : out) x /= std::sqrt(nn);
    return out;
}

/// Removes all non-overlapping occurrences of phrase, scanning left to right,
/// by substring replacement on the space-padded text.
inline Tokens delete_phrase(const Tokens& doc, const std::string& phrase) {
    std::string s = " " + joined(doc) + " ";
    const std::string pat = " " + phrase + " ";
    std::size_t pos = 0;
    while ((pos = s.find(pat, pos)) != std::string::npos) {
        s.replace(pos, pat.size(), " ");
    }
    return tokens(s);
}

inline std::vector<std::string> distinct_ngrams(const Tokens& doc, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i + n <= doc.size(); ++i) {
        std::string p = doc[i];
        for (std::size_t k = 1; k < n; ++k) p += " " + doc[i + k];
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    return out;
}

/// Exhaustive deletion scoring, sorted ascending by score with first
/// occurrence breaking ties.
inline std::vector<std::pair<std::string, double>> deletion_scores(const Tfidf& m, const Tokens& job,
                                                                   std::size_t n) {
    std::vector<std::pair<std::string, double>> out;
    const auto base = embed(m, job);
    for (const auto& p : distinct_ngrams(job, n)) out.emplace_back(p, cosine(base, embed(m, delete_phrase(job, p))));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

inline double insertion_score(const Tfidf& m, const Tokens& resume, const Tokens& job, const std::string& phrase) {
    Tokens adv = resume;
    for (const auto& w : tokens(phrase)) adv.push_back(w);
    return cosine(embed(m, adv), embed(m, job));
}

inline double best_insertion(const Tfidf& m, const Tokens& resume, const Tokens& job,
                             const std::vector<std::string>& candidates) {
    double best = -2.0;
    for (const auto& c : candidates) best = std::max(best, insertion_score(m, resume, job, c));
    return best;
}

/// Random text over a small alphabet so words repeat across documents.
inline std::string random_text(std::mt19937_64& gen, std::size_t max_tokens, std::size_t alphabet = 8) {
    std::uniform_int_distribution<std::size_t> len(1, max_tokens), word(0, alphabet - 1);
    std::string s;
    const auto n = len(gen);
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string("w") + std::to_string(word(gen));
    return s;
}

inline std::vector<std::string> random_corpus(std::mt19937_64& gen, std::size_t max_docs = 10,
                                              std::size_t max_tokens = 20) {
    std::uniform_int_distribution<std::size_t> nd(2, max_docs);
    std::vector<std::string> docs(nd(gen));
    for (auto& d : docs) d = random_text(gen, max_tokens);
    return docs;
}

}  // namespace oracle
