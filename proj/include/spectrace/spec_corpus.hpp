#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spectrace/embedding.hpp"
#include "spectrace/errors.hpp"
#include "spectrace/text.hpp"

namespace spectrace {

struct SpecSection {
    std::string id;    // hierarchical identifier, e.g. "1", "4.2"
    std::string title; // heading text without the numeric prefix
    std::string body;  // prose up to the next heading, child text excluded
    int order = 0;     // 0-based document position
    std::vector<std::string> query_terms;
    int level = 1;            // heading depth 1..4
    std::size_t body_start = 0; // source character offsets of the body
    std::size_t body_end = 0;
};

struct SpecDocument {
    std::string source_path;
    std::vector<SpecSection> sections;
};

struct DocChunk {
    std::string text;
    std::size_t start_offset = 0;
    std::size_t end_offset = 0;
    std::optional<std::string> embedding_key;
};

namespace detail {

// "4.2 File Discovery" -> ("4.2", "File Discovery"); returns empty id when
// the heading has no numeric prefix.
inline std::pair<std::string, std::string> split_numeric_prefix(std::string_view heading) {
    std::size_t i = 0;
    while (i < heading.size() &&
           (std::isdigit(static_cast<unsigned char>(heading[i])) || heading[i] == '.'))
        ++i;
    if (i == 0 || !std::isdigit(static_cast<unsigned char>(heading[0])))
        return {"", std::string(heading)};
    if (i < heading.size() && heading[i] != ' ' && heading[i] != '\t')
        return {"", std::string(heading)};
    std::string id(heading.substr(0, i));
    while (!id.empty() && id.back() == '.') id.pop_back();
    if (id.empty()) return {"", std::string(heading)};
    std::size_t j = i;
    while (j < heading.size() && (heading[j] == ' ' || heading[j] == '\t')) ++j;
    return {id, std::string(heading.substr(j))};
}

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

} // namespace detail

// Markdown sectioning over heading levels 1-4; deeper headings fold into the
// parent body. Section ids come from numeric heading prefixes when present,
// otherwise from per-level counters. Duplicate ids get a "_2" style suffix
// so ids stay unique within the document.
inline SpecDocument parse_spec_markdown(std::string_view text, std::string source_path = "") {
    constexpr int kMaxDepth = 4;
    SpecDocument doc;
    doc.source_path = std::move(source_path);

    struct Heading {
        int level;
        std::string text;
        std::size_t body_start;
        std::size_t line_start;
    };
    std::vector<Heading> headings;

    std::size_t pos = 0;
    bool in_fence = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        std::string_view stripped = line;
        while (!stripped.empty() && (stripped.front() == ' ' || stripped.front() == '\t'))
            stripped = stripped.substr(1);
        if (stripped.substr(0, 3) == "```") in_fence = !in_fence;
        if (!in_fence && !line.empty() && line[0] == '#') {
            int level = 0;
            while (std::size_t(level) < line.size() && line[std::size_t(level)] == '#') ++level;
            if (level <= kMaxDepth && std::size_t(level) < line.size() &&
                (line[std::size_t(level)] == ' ' || line[std::size_t(level)] == '\t')) {
                headings.push_back({level, detail::trim(line.substr(std::size_t(level))),
                                    eol == text.size() ? eol : eol + 1, pos});
            }
        }
        if (eol == text.size()) break;
        pos = eol + 1;
    }
    if (headings.empty()) throw EmptyDocument("no headings found in specification markdown");

    std::vector<int> counters(kMaxDepth, 0);
    std::map<std::string, int> seen;
    for (std::size_t h = 0; h < headings.size(); ++h) {
        const auto& hd = headings[h];
        auto [explicit_id, title] = detail::split_numeric_prefix(hd.text);
        std::string id;
        if (!explicit_id.empty()) {
            id = explicit_id;
            // re-seed counters so later unnumbered siblings continue the sequence
            std::vector<int> comps;
            std::size_t i = 0;
            while (i < id.size()) {
                std::size_t j = id.find('.', i);
                if (j == std::string::npos) j = id.size();
                comps.push_back(std::atoi(id.substr(i, j - i).c_str()));
                i = j + 1;
            }
            for (int d = 0; d < kMaxDepth; ++d)
                counters[std::size_t(d)] = std::size_t(d) < comps.size() ? comps[std::size_t(d)] : 0;
        } else {
            counters[std::size_t(hd.level - 1)] += 1;
            for (int d = hd.level; d < kMaxDepth; ++d) counters[std::size_t(d)] = 0;
            for (int d = 0; d < hd.level; ++d) {
                if (d) id += '.';
                id += std::to_string(counters[std::size_t(d)]);
            }
        }
        int& n = seen[id];
        ++n;
        if (n > 1) id += "_" + std::to_string(n);

        std::size_t body_end = h + 1 < headings.size() ? headings[h + 1].line_start : text.size();
        SpecSection sec;
        sec.id = id;
        sec.title = title;
        sec.level = hd.level;
        sec.order = int(h);
        sec.body_start = hd.body_start;
        sec.body_end = body_end;
        sec.body = detail::trim(text.substr(hd.body_start, body_end - hd.body_start));
        doc.sections.push_back(std::move(sec));
    }
    return doc;
}

// Canonical rendering; parse(render(parse(x))) preserves ids, titles and
// bodies even for sections whose ids were synthesized.
inline std::string render_spec_markdown(const SpecDocument& doc) {
    std::string out;
    for (const auto& s : doc.sections) {
        out.append(std::size_t(s.level), '#');
        out += ' ';
        out += s.id;
        if (!s.title.empty()) {
            out += ' ';
            out += s.title;
        }
        out += '\n';
        if (!s.body.empty()) {
            out += s.body;
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline bool is_technical_token(const std::string& w) {
    bool has_upper = false, has_lower = false, has_digit = false, has_us = false;
    for (char c : w) {
        if (std::isupper(static_cast<unsigned char>(c))) has_upper = true;
        else if (std::islower(static_cast<unsigned char>(c))) has_lower = true;
        else if (std::isdigit(static_cast<unsigned char>(c))) has_digit = true;
        else if (c == '_') has_us = true;
    }
    if (has_us && (has_upper || has_lower)) return true;            // snake_case
    if (has_upper && has_lower && w.size() >= 3) return true;       // camelCase
    if (has_upper && !has_lower && w.size() >= 2) return true;      // ALL-CAPS acronym
    (void)has_digit;
    return false;
}

} // namespace detail

// Keyword extraction: technical tokens (acronyms, identifiers, hyphenated
// terms) first, plain words by frequency after, stopwords out. Deterministic
// for a fixed input.
inline std::vector<std::string> extract_query_terms(const SpecSection& section,
                                                    std::size_t max_terms) {
    std::string source = section.title + "\n" + section.body;

    struct Entry {
        std::string surface;
        bool technical = false;
        int freq = 0;
        std::size_t first = 0;
    };
    std::map<std::string, Entry> by_key; // key: lowercase form

    std::size_t position = 0;
    std::size_t i = 0;
    while (i < source.size()) {
        if (!is_word_char(source[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < source.size() && is_word_char(source[j])) ++j;
        std::string word = source.substr(i, j - i);
        // hyphenated terms: join word-word chains into one token
        while (j < source.size() && source[j] == '-' && j + 1 < source.size() &&
               is_word_char(source[j + 1])) {
            std::size_t k = j + 1;
            while (k < source.size() && is_word_char(source[k])) ++k;
            word += source.substr(j, k - j);
            j = k;
        }
        i = j;
        ++position;
        if (word.size() < 2) continue;
        if (is_stopword(word)) continue;
        bool tech = detail::is_technical_token(word) || word.find('-') != std::string::npos;
        std::string key = to_lower(word);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            by_key[key] = Entry{word, tech, 1, position};
        } else {
            it->second.freq += 1;
            it->second.technical = it->second.technical || tech;
        }
    }

    std::vector<Entry> entries;
    entries.reserve(by_key.size());
    for (auto& [k, e] : by_key) entries.push_back(e);
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.technical != b.technical) return a.technical;
        if (a.freq != b.freq) return a.freq > b.freq;
        return a.first < b.first;
    });

    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (out.size() >= max_terms) break;
        out.push_back(e.surface);
    }
    return out;
}

// Change-point chunking: for each candidate boundary between sentences g and
// g+1, the window of up to `window_sentences` sentences ending at g is
// compared against the window starting at g+1; a boundary fires when the
// cosine of their embeddings (clamped at 0) drops below the threshold.
// Chunks partition the input exactly.
inline std::vector<DocChunk> semantic_chunk(std::string_view text, const EmbedFn& embed,
                                            int window_sentences, double boundary_threshold) {
    if (window_sentences < 1) throw Error("window_sentences must be >= 1");
    std::vector<DocChunk> chunks;
    if (text.empty()) return chunks;

    auto spans = sentence_spans(text);
    std::size_t n = spans.size();
    std::vector<std::size_t> boundaries; // boundary after sentence index g

    if (n > 1 && boundary_threshold > 0.0) {
        auto window_text = [&](std::size_t from, std::size_t to) { // inclusive sentence range
            return std::string(text.substr(spans[from].first, spans[to].second - spans[from].first));
        };
        for (std::size_t g = 0; g + 1 < n; ++g) {
            std::size_t w = std::size_t(window_sentences);
            std::size_t lo = g + 1 >= w ? g + 1 - w : 0;
            std::size_t hi = std::min(n - 1, g + w);
            auto left = embed(window_text(lo, g));
            auto right = embed(window_text(g + 1, hi));
            double sim = std::max(0.0, cosine(left, right));
            if (sim < boundary_threshold) boundaries.push_back(g);
        }
    }

    std::size_t chunk_start = 0;
    auto flush = [&](std::size_t end_sentence) {
        std::size_t a = spans[chunk_start].first;
        std::size_t b = spans[end_sentence].second;
        DocChunk c;
        c.text = std::string(text.substr(a, b - a));
        c.start_offset = a;
        c.end_offset = b;
        chunks.push_back(std::move(c));
        chunk_start = end_sentence + 1;
    };
    for (std::size_t g : boundaries) flush(g);
    if (chunk_start < n) flush(n - 1);
    return chunks;
}

} // namespace spectrace
