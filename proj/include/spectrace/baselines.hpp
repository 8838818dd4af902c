#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectrace/embedding.hpp"
#include "spectrace/fsutil.hpp"
#include "spectrace/pipeline.hpp"
#include "spectrace/repo_model.hpp"
#include "spectrace/spec_corpus.hpp"
#include "spectrace/text.hpp"

namespace spectrace {

// ---------------------------------------------------------------------------
// grep baseline
// ---------------------------------------------------------------------------

struct KeywordMatch {
    std::string file;
    int line_start = 1;
    int line_end = 1;
    std::string snippet; // exact file text at the range
    double score = 0.0;  // sum of matched-term rarity weights
};

namespace detail {

// case-insensitive whole-token occurrences: neither neighbour is a word char
inline bool contains_whole_token(const std::string& line, const std::string& term_lower) {
    if (term_lower.empty()) return false;
    std::string low = to_lower(line);
    std::size_t pos = 0;
    while ((pos = low.find(term_lower, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_word_char(low[pos - 1]);
        std::size_t end = pos + term_lower.size();
        bool right_ok = end >= low.size() || !is_word_char(low[end]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t eol = text.find('\n', start);
        if (eol == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, eol - start));
        start = eol + 1;
    }
    return lines;
}

} // namespace detail

/// Keyword search over raw file contents: case-insensitive whole-token
/// matches, per-file hits merged into ranges when within 5 lines, range score
/// the sum over distinct matched terms of ln(total_files / files_with_term).
/// Top-k by score, then path, then line.
inline std::vector<KeywordMatch> grep_search(const RepoModel& model,
                                             const std::vector<std::string>& terms, int k) {
    if (terms.empty()) throw std::invalid_argument("grep_search: empty term list");
    std::vector<std::string> lowered;
    for (const auto& t : terms) lowered.push_back(to_lower(t));

    // document frequency per term (files containing it)
    std::map<std::string, std::vector<std::vector<std::string>>> cache; // file -> lines
    std::map<std::string, int> df;
    std::map<std::string, std::vector<std::vector<int>>> hits_per_file; // file -> per-term lines
    for (const auto& f : model.files) {
        auto lines = detail::split_lines(read_text_file(model.root / f));
        std::vector<std::vector<int>> per_term(lowered.size());
        bool any = false;
        for (std::size_t li = 0; li < lines.size(); ++li) {
            for (std::size_t t = 0; t < lowered.size(); ++t) {
                if (detail::contains_whole_token(lines[li], lowered[t])) {
                    per_term[t].push_back(int(li) + 1);
                    any = true;
                }
            }
        }
        for (std::size_t t = 0; t < lowered.size(); ++t)
            if (!per_term[t].empty()) df[lowered[t]] += 1;
        if (any) {
            hits_per_file[f] = std::move(per_term);
            cache[f] = std::move(lines);
        }
    }

    double total_files = double(model.files.size());
    std::vector<KeywordMatch> matches;
    for (const auto& [file, per_term] : hits_per_file) {
        // merge all hit lines into ranges within 5 lines
        std::vector<int> all;
        for (const auto& v : per_term) all.insert(all.end(), v.begin(), v.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        std::vector<std::pair<int, int>> ranges;
        for (int line : all) {
            if (!ranges.empty() && line - ranges.back().second <= 5) ranges.back().second = line;
            else ranges.emplace_back(line, line);
        }
        const auto& lines = cache[file];
        for (auto [a, b] : ranges) {
            double score = 0.0;
            for (std::size_t t = 0; t < lowered.size(); ++t) {
                bool in_range = std::any_of(per_term[t].begin(), per_term[t].end(),
                                            [&](int l) { return l >= a && l <= b; });
                if (in_range) score += std::log(total_files / double(df[lowered[t]]));
            }
            std::string snippet;
            for (int l = a; l <= b; ++l) {
                snippet += lines[std::size_t(l - 1)];
                if (l < b) snippet += '\n';
            }
            matches.push_back({file, a, b, snippet, score});
        }
    }
    std::sort(matches.begin(), matches.end(), [](const KeywordMatch& x, const KeywordMatch& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.file != y.file) return x.file < y.file;
        return x.line_start < y.line_start;
    });
    if (int(matches.size()) > k) matches.resize(std::size_t(k));
    return matches;
}

// ---------------------------------------------------------------------------
// BM25 + embedding hybrid
// ---------------------------------------------------------------------------

struct SymbolDoc {
    CodeSymbol symbol;
    std::string id;   // symbol id; lexicographic tie-break key
    std::string text; // name + signature + structure-doc description
    std::vector<std::string> toks;
    std::vector<double> embedding; // unit L2 norm

    bool operator==(const SymbolDoc& o) const {
        return id == o.id && text == o.text && embedding == o.embedding;
    }
};

/// BM25 postings plus unit-norm embedding store over code symbols.
struct HybridIndex {
    std::vector<SymbolDoc> docs;
    std::map<std::string, int> df; // token -> docs containing it
    double avg_len = 0.0;
    int dim = 0;
    std::string fingerprint;
    EmbedFn embed; // not serialized; re-attached on load

    bool operator==(const HybridIndex& o) const {
        return docs == o.docs && df == o.df && avg_len == o.avg_len && dim == o.dim &&
               fingerprint == o.fingerprint;
    }
};

struct HybridWeights {
    double w_bm25 = 0.4;
    double w_overlap = 0.2;
    double w_vec = 0.4;
    int prefilter_k = 200;
    int final_k = 50;
};

/// Okapi BM25 with IDF = ln((N - df + 0.5)/(df + 0.5) + 1); query terms are
/// deduplicated, document term frequencies counted over identifier-aware
/// tokens. Defaults k1=1.2, b=0.75.
inline double bm25_score(const std::vector<std::string>& query_terms, const SymbolDoc& doc,
                         const HybridIndex& index, double k1 = 1.2, double b = 0.75) {
    double N = double(index.docs.size());
    double len = double(doc.toks.size());
    std::set<std::string> uniq(query_terms.begin(), query_terms.end());
    double score = 0.0;
    for (const auto& q : uniq) {
        auto dit = index.df.find(q);
        if (dit == index.df.end()) continue;
        long tf = std::count(doc.toks.begin(), doc.toks.end(), q);
        if (tf == 0) continue;
        double df = double(dit->second);
        double idf = std::log((N - df + 0.5) / (df + 0.5) + 1.0);
        double denom = double(tf) + k1 * (1.0 - b + b * len / index.avg_len);
        score += idf * double(tf) * (k1 + 1.0) / denom;
    }
    return score;
}

/// One document per definition symbol: name, signature and (when available)
/// its structure-doc description. Embeddings are L2-normalized before
/// storage.
inline HybridIndex build_hybrid_index(const RepoModel& model, EmbedFn embed,
                                      const std::map<std::string, std::string>& descriptions = {},
                                      int dim = 1024) {
    HybridIndex index;
    index.embed = embed;
    index.dim = dim;
    long total_len = 0;
    for (const auto& sym : model.symbols) {
        if (sym.declaration) continue;
        SymbolDoc doc;
        doc.symbol = sym;
        doc.id = sym.id();
        doc.text = sym.name + " " + sym.signature;
        auto it = descriptions.find(doc.id);
        if (it != descriptions.end()) doc.text += " " + it->second;
        doc.toks = tokens(doc.text);
        doc.embedding = embed(doc.text);
        if (int(doc.embedding.size()) != dim)
            throw EmbeddingFailure("embedder returned wrong dimension for " + doc.id);
        l2_normalize(doc.embedding);
        total_len += long(doc.toks.size());
        index.docs.push_back(std::move(doc));
    }
    std::sort(index.docs.begin(), index.docs.end(),
              [](const SymbolDoc& a, const SymbolDoc& b) { return a.id < b.id; });
    for (const auto& d : index.docs) {
        std::set<std::string> uniq(d.toks.begin(), d.toks.end());
        for (const auto& t : uniq) index.df[t] += 1;
    }
    index.avg_len = index.docs.empty() ? 0.0 : double(total_len) / double(index.docs.size());

    std::uint64_t h = kFnvOffset;
    for (const auto& d : index.docs) {
        h = fnv1a64(d.id, h);
        h = fnv1a64(d.text, h);
    }
    index.fingerprint = to_hex(h);
    return index;
}

struct HybridResult {
    std::string id;
    CodeSymbol symbol;
    double combined = 0.0;
    double bm25 = 0.0;    // min-max normalized within the candidate set
    double overlap = 0.0; // Jaccard of query tokens vs doc tokens
    double cos = 0.0;     // cosine of unit vectors
};

/// Two-stage search: BM25 prefilter to the top prefilter_k symbols, then the
/// weighted combination w_bm25*bm25_norm + w_overlap*jaccard + w_vec*cosine
/// over those candidates only; bm25_norm is min-max normalized within the
/// candidate set (0.5 for all when degenerate). Ties break lexicographically.
inline std::vector<HybridResult> hybrid_search(const DocChunk& chunk, const HybridIndex& index,
                                               const HybridWeights& weights) {
    if (index.docs.empty()) throw EmptyIndex("hybrid index contains no symbols");
    auto query_toks = tokens(chunk.text);
    std::set<std::string> query_set(query_toks.begin(), query_toks.end());
    std::vector<double> query_vec = index.embed ? index.embed(chunk.text)
                                                : std::vector<double>(std::size_t(index.dim), 0.0);
    l2_normalize(query_vec);

    // stage 1: BM25 prefilter
    struct Scored {
        std::size_t idx;
        double bm25;
    };
    std::vector<Scored> stage1;
    for (std::size_t i = 0; i < index.docs.size(); ++i)
        stage1.push_back({i, bm25_score(query_toks, index.docs[i], index)});
    std::sort(stage1.begin(), stage1.end(), [&](const Scored& a, const Scored& b) {
        if (a.bm25 != b.bm25) return a.bm25 > b.bm25;
        return index.docs[a.idx].id < index.docs[b.idx].id;
    });
    if (int(stage1.size()) > weights.prefilter_k)
        stage1.resize(std::size_t(weights.prefilter_k));

    // stage 2: weighted refinement over the candidate set
    double lo = stage1.front().bm25, hi = stage1.front().bm25;
    for (const auto& s : stage1) {
        lo = std::min(lo, s.bm25);
        hi = std::max(hi, s.bm25);
    }
    std::vector<HybridResult> results;
    for (const auto& s : stage1) {
        const SymbolDoc& doc = index.docs[s.idx];
        HybridResult r;
        r.id = doc.id;
        r.symbol = doc.symbol;
        r.bm25 = hi > lo ? (s.bm25 - lo) / (hi - lo) : 0.5;
        std::set<std::string> doc_set(doc.toks.begin(), doc.toks.end());
        r.overlap = jaccard(query_set, doc_set);
        r.cos = dot(query_vec, doc.embedding);
        r.combined = weights.w_bm25 * r.bm25 + weights.w_overlap * r.overlap + weights.w_vec * r.cos;
        results.push_back(std::move(r));
    }
    std::sort(results.begin(), results.end(), [](const HybridResult& a, const HybridResult& b) {
        if (a.combined != b.combined) return a.combined > b.combined;
        return a.id < b.id;
    });
    if (int(results.size()) > weights.final_k) results.resize(std::size_t(weights.final_k));
    return results;
}

// --- snapshot (versioned JSON; doubles round-trip bit-exactly) ---

inline void save_hybrid_index(const HybridIndex& index, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "spectrace-hybrid-index";
    j["version"] = 1;
    j["fingerprint"] = index.fingerprint;
    j["dim"] = index.dim;
    j["avg_len"] = index.avg_len;
    j["docs"] = nlohmann::json::array();
    for (const auto& d : index.docs) {
        j["docs"].push_back({{"id", d.id},
                             {"name", d.symbol.name},
                             {"kind", to_string(d.symbol.kind)},
                             {"file", d.symbol.file},
                             {"line_start", d.symbol.line_start},
                             {"line_end", d.symbol.line_end},
                             {"signature", d.symbol.signature},
                             {"text", d.text},
                             {"embedding", d.embedding}});
    }
    write_file_atomic(path, j.dump());
}

inline HybridIndex load_hybrid_index(const std::filesystem::path& path, EmbedFn embed) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || j.value("format", "") != "spectrace-hybrid-index")
        throw Error("not a hybrid index snapshot: " + path.string());
    if (j.value("version", 0) != 1)
        throw Error("unsupported hybrid index version in " + path.string());
    HybridIndex index;
    index.embed = std::move(embed);
    index.dim = j.value("dim", 0);
    index.avg_len = j.value("avg_len", 0.0);
    index.fingerprint = j.value("fingerprint", "");
    for (const auto& dj : j["docs"]) {
        SymbolDoc d;
        d.id = dj.value("id", "");
        d.symbol.name = dj.value("name", "");
        symbol_kind_from_string(dj.value("kind", "function"), d.symbol.kind);
        d.symbol.file = dj.value("file", "");
        d.symbol.line_start = dj.value("line_start", 1);
        d.symbol.line_end = dj.value("line_end", 1);
        d.symbol.signature = dj.value("signature", "");
        d.text = dj.value("text", "");
        d.toks = tokens(d.text);
        d.embedding = dj["embedding"].get<std::vector<double>>();
        index.docs.push_back(std::move(d));
    }
    for (const auto& d : index.docs) {
        std::set<std::string> uniq(d.toks.begin(), d.toks.end());
        for (const auto& t : uniq) index.df[t] += 1;
    }
    return index;
}

// ---------------------------------------------------------------------------
// baseline result -> SectionTrace (uniform evaluation shape)
// ---------------------------------------------------------------------------

/// Folders and files are inferred from result paths; matched line ranges map
/// onto overlapping definition symbols. Status is Implemented whenever any
/// symbol was found, per-symbol confidence stays unset.
inline SectionTrace grep_results_to_trace(const std::vector<KeywordMatch>& matches,
                                          const std::string& section_id, const RepoModel& model) {
    SectionTrace trace;
    trace.section_id = section_id;
    std::set<std::string> files, folders;
    std::map<std::string, ScoredSymbol> symbols;
    for (const auto& m : matches) {
        files.insert(m.file);
        folders.insert(parent_folder(m.file));
        auto it = model.symbol_by_file.find(m.file);
        if (it == model.symbol_by_file.end()) continue;
        for (std::size_t idx : it->second) {
            const CodeSymbol& sym = model.symbols[idx];
            if (sym.declaration) continue;
            if (sym.line_start <= m.line_end && sym.line_end >= m.line_start) {
                ScoredSymbol s{sym.file, sym.name, to_string(sym.kind), sym.line_start, m.score,
                               ""};
                auto [sit, inserted] = symbols.emplace(s.id(), s);
                if (!inserted) sit->second.score = std::max(sit->second.score, m.score);
            }
        }
    }
    for (const auto& f : folders) trace.folders.push_back({f, 0.0});
    for (const auto& f : files) trace.files.push_back({f, 0.0});
    for (const auto& [id, s] : symbols) {
        trace.symbols.push_back(s);
        trace.validated_symbols.push_back({s.file, s.name, s.kind, s.line_start, std::nullopt});
    }
    trace.status =
        trace.validated_symbols.empty() ? ImplStatus::Not_Implemented : ImplStatus::Implemented;
    return trace;
}

inline SectionTrace hybrid_results_to_trace(const std::vector<HybridResult>& results,
                                            const std::string& section_id) {
    SectionTrace trace;
    trace.section_id = section_id;
    std::set<std::string> files, folders;
    for (const auto& r : results) {
        files.insert(r.symbol.file);
        folders.insert(parent_folder(r.symbol.file));
        trace.symbols.push_back({r.symbol.file, r.symbol.name, to_string(r.symbol.kind),
                                 r.symbol.line_start, r.combined, ""});
        trace.validated_symbols.push_back(
            {r.symbol.file, r.symbol.name, to_string(r.symbol.kind), r.symbol.line_start,
             std::nullopt});
    }
    for (const auto& f : folders) trace.folders.push_back({f, 0.0});
    for (const auto& f : files) trace.files.push_back({f, 0.0});
    trace.status =
        trace.validated_symbols.empty() ? ImplStatus::Not_Implemented : ImplStatus::Implemented;
    return trace;
}

} // namespace spectrace
