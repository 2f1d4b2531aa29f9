#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rankattack/error.hpp"
#include "rankattack/stopwords_en.hpp"

namespace rankattack {

enum class DocKind { Resume, JobDescription };

inline std::string_view to_string(DocKind kind) {
    return kind == DocKind::Resume ? "resume" : "job";
}

struct Document {
    std::string id;
    DocKind kind = DocKind::Resume;
    std::string text;

    bool operator==(const Document&) const = default;
};

/// Lowercase tokens in original text order.
using TokenSeq = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

namespace detail {

// Bytes >= 0x80 count as word characters so UTF-8 sequences stay inside a
// token instead of splitting it. Only ASCII letters are case folded.
inline bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c >= 0x80;
}

inline char fold(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

}  // namespace detail

/// Lowercases and splits on every non-alphanumeric character. Numeric
/// tokens are kept.
inline TokenSeq tokenize(std::string_view text) {
    TokenSeq out;
    std::string cur;
    for (unsigned char c : text) {
        if (detail::is_word_byte(c)) {
            cur.push_back(detail::fold(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline TokenSeq filter_stopwords(const TokenSeq& seq, const StopwordSet& stopwords) {
    TokenSeq out;
    out.reserve(seq.size());
    for (const auto& t : seq) {
        if (!stopwords.contains(t)) out.push_back(t);
    }
    return out;
}

/// tokenize followed by filter_stopwords.
inline TokenSeq content_tokens(std::string_view text, const StopwordSet& stopwords) {
    auto seq = tokenize(text);
    std::erase_if(seq, [&](const std::string& t) { return stopwords.contains(t); });
    return seq;
}

inline std::string join(std::span<const std::string> tokens, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.append(sep);
        out.append(tokens[i]);
    }
    return out;
}

/// Contiguous windows of n tokens joined by a single space.
inline std::vector<std::string> ngrams(const TokenSeq& seq, std::size_t n) {
    if (n == 0) throw ArgumentError("ngrams: n must be >= 1");
    std::vector<std::string> out;
    if (seq.size() < n) return out;
    out.reserve(seq.size() - n + 1);
    for (std::size_t i = 0; i + n <= seq.size(); ++i) {
        out.push_back(join(std::span(seq).subspan(i, n)));
    }
    return out;
}

inline StopwordSet default_stopwords() {
    StopwordSet out;
    for (auto w : kDefaultStopwords) out.emplace(w);
    return out;
}

/// One lowercase word per line; blank lines and lines starting with '#'
/// are skipped.
inline StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword file: " + path);
    StopwordSet out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line.erase(0, start);
        if (line.front() == '#') continue;
        std::string lower;
        for (unsigned char c : line) lower.push_back(detail::fold(c));
        out.insert(std::move(lower));
    }
    return out;
}

/// Ordered list of unique words with its inverse index.
class Vocabulary {
public:
    Vocabulary() = default;

    explicit Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
        index_.reserve(words_.size());
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i].empty()) throw ArgumentError("vocabulary word must be non-empty");
            if (!index_.emplace(words_[i], i).second)
                throw ArgumentError("duplicate vocabulary word: " + words_[i]);
        }
    }

    const std::vector<std::string>& words() const noexcept { return words_; }
    std::size_t size() const noexcept { return words_.size(); }
    bool empty() const noexcept { return words_.empty(); }
    const std::string& operator[](std::size_t i) const { return words_[i]; }

    std::optional<std::size_t> find(std::string_view word) const {
        auto it = index_.find(std::string(word));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view word) const { return find(word).has_value(); }

    bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Words ordered by total frequency (descending) over all documents after
/// tokenization and stopword filtering, ties lexicographic ascending.
/// An empty max_size means unlimited.
inline Vocabulary build_vocabulary(std::span<const Document> docs, const StopwordSet& stopwords,
                                   std::optional<std::size_t> max_size = std::nullopt) {
    if (docs.empty()) throw ArgumentError("build_vocabulary: no documents");
    std::map<std::string, std::size_t> freq;
    for (const auto& d : docs) {
        for (auto& t : content_tokens(d.text, stopwords)) ++freq[std::move(t)];
    }
    if (freq.empty()) throw ArgumentError("build_vocabulary: every document is empty after filtering");
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    // std::map iteration is already lexicographic, so a stable sort on count
    // alone yields the tie rule.
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (max_size && ranked.size() > *max_size) ranked.resize(*max_size);
    std::vector<std::string> words;
    words.reserve(ranked.size());
    for (auto& [w, _] : ranked) words.push_back(w);
    return Vocabulary(std::move(words));
}

using OneHotVector = std::vector<std::uint8_t>;

/// bits[i] = 1 iff vocab[i] occurs in seq.
inline OneHotVector one_hot(const TokenSeq& seq, const Vocabulary& vocab) {
    if (vocab.empty()) throw ArgumentError("one_hot: empty vocabulary");
    OneHotVector bits(vocab.size(), 0);
    for (const auto& t : seq) {
        if (auto i = vocab.find(t)) bits[*i] = 1;
    }
    return bits;
}

/// Text with phrases appended at the end, each separated by one space.
inline std::string append_phrases(std::string_view text, std::span<const std::string> phrases) {
    std::string out(text);
    for (const auto& p : phrases) {
        out.push_back(' ');
        out.append(p);
    }
    return out;
}

}  // namespace rankattack
