#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace spectrace {

inline bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

inline const std::unordered_set<std::string>& stopwords() {
    // Fixed embedded list; includes datasheet normative verbs so that
    // requirement keywords never rank as query terms.
    static const std::unordered_set<std::string> words = {
        "a",       "about",  "above",   "after",  "again",   "all",     "also",   "am",
        "an",      "and",    "any",     "are",    "as",      "at",      "be",     "because",
        "been",    "before", "being",   "below",  "between", "both",    "but",    "by",
        "can",     "cannot", "could",   "did",    "do",      "does",    "doing",  "down",
        "during",  "each",   "either",  "etc",    "few",     "for",     "from",   "further",
        "had",     "has",    "have",    "having", "he",      "her",     "here",   "hers",
        "him",     "his",    "how",     "i",      "if",      "in",      "into",   "is",
        "it",      "its",    "itself",  "just",   "may",     "me",      "might",  "more",
        "most",    "must",   "my",      "no",     "nor",     "not",     "of",     "off",
        "on",      "once",   "only",    "or",     "other",   "our",     "ours",   "out",
        "over",    "own",    "same",    "shall",  "she",     "should",  "so",     "some",
        "such",    "than",   "that",    "the",    "their",   "theirs",  "them",   "then",
        "there",   "these",  "they",    "this",   "those",   "through", "to",     "too",
        "under",   "until",  "up",      "upon",   "us",      "used",    "uses",   "using",
        "very",    "was",    "we",      "were",   "what",    "when",    "where",  "which",
        "while",   "who",    "whom",    "why",    "will",    "with",    "within", "without",
        "would",   "you",    "your",    "yours",  "via",     "eg",      "ie",     "et",
        "al",      "per",    "vs",      "onto",   "across",  "along",   "amid",   "among",
    };
    return words;
}

inline bool is_stopword(std::string_view w) {
    return stopwords().count(to_lower(w)) > 0;
}

// Raw word runs: [A-Za-z0-9_]+, original case preserved.
inline std::vector<std::string> raw_words(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_char(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_word_char(text[j])) ++j;
        out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

// Splits one snake segment on camel-case boundaries. An uppercase run
// followed by Upper+lower breaks before the final upper: "I2COpen" ->
// {"i2c", "open"}, "phTmlNfc" -> {"ph", "tml", "nfc"}.
inline void split_camel(std::string_view seg, std::vector<std::string>& out) {
    std::size_t n = seg.size();
    std::size_t start = 0;
    auto upper = [&](std::size_t k) { return std::isupper(static_cast<unsigned char>(seg[k])) != 0; };
    auto lower = [&](std::size_t k) { return std::islower(static_cast<unsigned char>(seg[k])) != 0; };
    for (std::size_t i = 1; i < n; ++i) {
        bool boundary = false;
        if (upper(i) && (lower(i - 1) || std::isdigit(static_cast<unsigned char>(seg[i - 1])))) {
            boundary = true; // aB / 9B
        } else if (i + 1 < n && upper(i) && upper(i - 1) && lower(i + 1)) {
            boundary = true; // ABc -> A|Bc
        }
        if (boundary) {
            out.push_back(to_lower(seg.substr(start, i - start)));
            start = i;
        }
    }
    if (start < n) out.push_back(to_lower(seg.substr(start)));
}

// Identifier-aware tokens, duplicates preserved (term frequency matters for
// BM25): each word lowered and, when it has snake/camel structure, its parts
// are emitted alongside the joined form. Single characters are dropped.
inline std::vector<std::string> tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const std::string& w : raw_words(text)) {
        std::string joined = to_lower(w);
        std::vector<std::string> parts;
        std::size_t i = 0;
        while (i < w.size()) {
            while (i < w.size() && w[i] == '_') ++i;
            std::size_t j = i;
            while (j < w.size() && w[j] != '_') ++j;
            if (j > i) split_camel(std::string_view(w).substr(i, j - i), parts);
            i = j;
        }
        if (joined.size() >= 2) out.push_back(joined);
        if (parts.size() > 1 || (parts.size() == 1 && parts[0] != joined)) {
            for (auto& p : parts)
                if (p.size() >= 2) out.push_back(std::move(p));
        }
    }
    return out;
}

inline std::set<std::string> token_set(std::string_view text) {
    auto v = tokens(text);
    return std::set<std::string>(v.begin(), v.end());
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& big = a.size() <= b.size() ? b : a;
    for (const auto& t : small) inter += big.count(t);
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : double(inter) / double(uni);
}

// Sentence spans partition [0, text.size()); terminators are ". ", "? ",
// "! " and blank lines. Trailing separators stay inside the span so that
// concatenating spans reconstructs the input exactly.
inline std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t n = text.size();
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < n) {
        bool brk = false;
        std::size_t end = i;
        if ((text[i] == '.' || text[i] == '?' || text[i] == '!') && i + 1 < n &&
            (text[i + 1] == ' ' || text[i + 1] == '\t')) {
            end = i + 2;
            brk = true;
        } else if (text[i] == '\n' && i + 1 < n && text[i + 1] == '\n') {
            end = i + 2;
            while (end < n && text[end] == '\n') ++end;
            brk = true;
        }
        if (brk) {
            spans.emplace_back(start, end);
            start = end;
            i = end;
        } else {
            ++i;
        }
    }
    if (start < n) spans.emplace_back(start, n);
    return spans;
}

// ceil(chars / 4): the tokenizer-free estimate used when backends omit usage.
inline long estimate_tokens(std::string_view text) {
    return long((text.size() + 3) / 4);
}

// Normative-language detection for status classification of sections with
// no mapped symbols.
inline bool has_normative_language(std::string_view text) {
    static const std::unordered_set<std::string> verbs = {"shall", "must", "should", "required",
                                                          "will"};
    for (const auto& w : raw_words(text)) {
        if (verbs.count(to_lower(w))) return true;
    }
    return false;
}

} // namespace spectrace
