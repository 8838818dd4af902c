#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "spectrace/provider.hpp"
#include "spectrace/repo_model.hpp"
#include "spectrace/spec_corpus.hpp"
#include "spectrace/structure_docs.hpp"

namespace spectrace {

enum class ImplStatus { Implemented, Partially_Implemented, Not_Implemented, Not_Applicable };

inline const char* to_string(ImplStatus s) {
    switch (s) {
        case ImplStatus::Implemented: return "Implemented";
        case ImplStatus::Partially_Implemented: return "Partially_Implemented";
        case ImplStatus::Not_Implemented: return "Not_Implemented";
        case ImplStatus::Not_Applicable: return "Not_Applicable";
    }
    return "Not_Implemented";
}

inline bool impl_status_from_string(std::string_view s, ImplStatus& out) {
    if (s == "Implemented") out = ImplStatus::Implemented;
    else if (s == "Partially_Implemented") out = ImplStatus::Partially_Implemented;
    else if (s == "Not_Implemented") out = ImplStatus::Not_Implemented;
    else if (s == "Not_Applicable") out = ImplStatus::Not_Applicable;
    else return false;
    return true;
}

struct ScoredPath {
    std::string path;
    double score = 0.0;
};

struct ScoredSymbol {
    std::string file;
    std::string name;
    std::string kind;
    int line_start = 1;
    double score = 0.0;
    std::string description;

    std::string id() const {
        return file + "|" + name + "|" + kind + "|" + std::to_string(line_start);
    }
};

struct ValidatedSymbol {
    std::string file;
    std::string name;
    std::string kind;
    int line_start = 1;
    std::optional<double> confidence;
};

/// Full per-section mapping trail: folders -> files -> symbols -> validated
/// status and confidence.
struct SectionTrace {
    std::string section_id;
    std::vector<ScoredPath> folders;
    std::vector<ScoredPath> files;
    std::vector<ScoredSymbol> symbols;
    std::vector<ValidatedSymbol> validated_symbols;
    ImplStatus status = ImplStatus::Not_Implemented;
    std::optional<double> confidence;
    std::string gap_notes;
    std::optional<std::string> error; // provider failure quarantined the section
};

struct PipelineConfig {
    double theta1 = 0.5;
    double theta2 = 0.5;
    double theta3 = 0.5;
    long folder_chunk_budget = 8000; // estimated tokens per folder judgment
    int refinement_max_folders = 6;
    int max_files_per_section = 20;
    int context_window_sections = 3;
    int query_max_terms = 12;
    bool include_declarations = false;
};

/// Rolling summary of previously validated sections fed into validation.
struct ValidationContext {
    int window = 3;
    std::deque<ContextEntry> entries;

    void push(const std::string& section_id, const std::string& status,
              const std::vector<ValidatedSymbol>& validated) {
        ContextEntry e;
        e.section_id = section_id;
        e.status = status;
        for (const auto& v : validated) {
            if (e.top_symbols.size() == 5) break;
            e.top_symbols.push_back(v.name);
        }
        entries.push_back(std::move(e));
        while (int(entries.size()) > window) entries.pop_front();
    }

    std::vector<ContextEntry> snapshot() const {
        return std::vector<ContextEntry>(entries.begin(), entries.end());
    }
};

inline SectionView section_view(const SpecSection& section, int max_terms) {
    SectionView v;
    v.id = section.id;
    v.title = section.title;
    v.terms = section.query_terms.empty()
                  ? extract_query_terms(section, std::size_t(max_terms))
                  : section.query_terms;
    v.excerpt = section.title + "\n" + section.body.substr(0, 1200);
    return v;
}

/// Removes folders that are proper ancestors of other selected folders,
/// keeping the most specific ones.
inline std::vector<ScoredPath> filter_parent_child(const std::vector<ScoredPath>& folders) {
    std::vector<ScoredPath> out;
    for (const auto& f : folders) {
        bool has_descendant = false;
        for (const auto& g : folders)
            if (is_proper_ancestor(f.path, g.path)) has_descendant = true;
        if (!has_descendant) out.push_back(f);
    }
    return out;
}

namespace detail {

inline void sort_scored(std::vector<ScoredPath>& v) {
    std::sort(v.begin(), v.end(), [](const ScoredPath& a, const ScoredPath& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.path < b.path;
    });
}

inline void sort_scored(std::vector<ScoredSymbol>& v) {
    std::sort(v.begin(), v.end(), [](const ScoredSymbol& a, const ScoredSymbol& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id() < b.id();
    });
}

} // namespace detail

/// Stage 1, folder discovery: judge repo-doc folder entries (in budget-sized
/// chunks when the doc is large, results unioned), keep scores above theta1,
/// drop ancestor folders, and run one refinement judgment when more than
/// refinement_max_folders survive.
inline std::vector<ScoredPath> discover_folders(const SpecSection& section,
                                                const StructureDoc& repo_doc, Provider& provider,
                                                const PipelineConfig& cfg) {
    auto entries = parse_structure_entries(repo_doc.content);
    if (entries.empty()) return {};
    SectionView view = section_view(section, cfg.query_max_terms);

    // adaptive chunking by estimated tokens
    std::vector<std::vector<CandidateDoc>> chunks;
    chunks.emplace_back();
    long budget = cfg.folder_chunk_budget;
    long used = 0;
    bool oversize = estimate_tokens(repo_doc.content) > budget;
    for (const auto& e : entries) {
        long cost = estimate_tokens(e.id) + estimate_tokens(e.description);
        if (oversize && used + cost > budget && !chunks.back().empty()) {
            chunks.emplace_back();
            used = 0;
        }
        chunks.back().push_back({e.id, e.description});
        used += cost;
    }

    std::vector<ScoredPath> kept;
    for (const auto& chunk : chunks) {
        for (const auto& j : judge_relevance(view, chunk, Phase::folder_discovery, provider,
                                             "folder")) {
            if (j.score > cfg.theta1) kept.push_back({j.candidate_id, j.score});
        }
    }
    kept = filter_parent_child(kept);

    if (int(kept.size()) > cfg.refinement_max_folders) {
        std::vector<CandidateDoc> survivors;
        std::map<std::string, std::string> desc_by_id;
        for (const auto& e : entries) desc_by_id[e.id] = e.description;
        for (const auto& k : kept) survivors.push_back({k.path, desc_by_id[k.path]});
        auto refined = judge_relevance(view, survivors, Phase::folder_discovery, provider,
                                       "folder refinement");
        kept.clear();
        for (const auto& j : refined) kept.push_back({j.candidate_id, j.score});
        detail::sort_scored(kept);
        kept.resize(std::size_t(cfg.refinement_max_folders));
    }
    detail::sort_scored(kept);
    return kept;
}

/// Stage 2, file discovery: candidates are the direct files of the selected
/// folders, judged against their folder-doc descriptions; keep above theta2,
/// cap at max_files_per_section.
inline std::vector<ScoredPath> discover_files(const SpecSection& section,
                                              const std::vector<ScoredPath>& folders,
                                              const RepoModel& model, Provider& provider,
                                              StructureCache& cache, const PipelineConfig& cfg) {
    if (folders.empty()) return {};
    SectionView view = section_view(section, cfg.query_max_terms);
    std::vector<CandidateDoc> candidates;
    for (const auto& folder : folders) {
        StructureDoc doc = generate_folder_structure_doc(folder.path, model, provider, cache);
        for (const auto& e : parse_structure_entries(doc.content))
            candidates.push_back({e.id, e.description});
    }
    if (candidates.empty()) return {};

    std::vector<ScoredPath> kept;
    for (const auto& j :
         judge_relevance(view, candidates, Phase::file_discovery, provider, "file")) {
        if (j.score > cfg.theta2) kept.push_back({j.candidate_id, j.score});
    }
    detail::sort_scored(kept);
    if (int(kept.size()) > cfg.max_files_per_section)
        kept.resize(std::size_t(cfg.max_files_per_section));
    return kept;
}

/// Stage 3, symbol discovery: candidates are every definition symbol of the
/// selected files (all six kinds; prototypes only when configured in), judged
/// with their file-doc descriptions; keep above theta3.
inline std::vector<ScoredSymbol> discover_symbols(const SpecSection& section,
                                                  const std::vector<ScoredPath>& files,
                                                  const RepoModel& model, Provider& provider,
                                                  StructureCache& cache,
                                                  const PipelineConfig& cfg) {
    if (files.empty()) return {};
    SectionView view = section_view(section, cfg.query_max_terms);

    std::map<std::string, std::string> desc_by_id;
    std::vector<const CodeSymbol*> pool;
    std::vector<CandidateDoc> candidates;
    for (const auto& f : files) {
        StructureDoc doc = generate_file_structure_doc(f.path, model, provider, cache);
        std::map<std::string, std::string> name_desc;
        for (const auto& e : parse_structure_entries(doc.content)) {
            // entry ids read "name (kind, lines a-b)"
            auto cut = e.id.find(" (");
            name_desc[cut == std::string::npos ? e.id : e.id.substr(0, cut)] = e.description;
        }
        auto it = model.symbol_by_file.find(f.path);
        if (it == model.symbol_by_file.end()) continue;
        for (std::size_t idx : it->second) {
            const CodeSymbol& sym = model.symbols[idx];
            if (sym.declaration && !cfg.include_declarations) continue;
            std::string desc = std::string(to_string(sym.kind)) + " " + sym.name;
            auto dit = name_desc.find(sym.name);
            if (dit != name_desc.end()) desc += " — " + dit->second;
            pool.push_back(&sym);
            candidates.push_back({sym.id(), desc});
        }
    }
    if (candidates.empty()) return {};

    std::vector<ScoredSymbol> kept;
    auto judgments =
        judge_relevance(view, candidates, Phase::symbol_discovery, provider, "code symbol");
    for (std::size_t i = 0; i < judgments.size(); ++i) {
        if (judgments[i].score > cfg.theta3) {
            const CodeSymbol& sym = *pool[i];
            kept.push_back({sym.file, sym.name, to_string(sym.kind), sym.line_start,
                            judgments[i].score, candidates[i].description});
        }
    }
    detail::sort_scored(kept);
    return kept;
}

struct ValidationDecision {
    std::vector<ValidatedSymbol> validated;
    ImplStatus status = ImplStatus::Not_Implemented;
    std::optional<double> confidence;
    std::string gap_notes;
};

/// Stage 4, sequential validation: the provider keeps or drops each symbol,
/// assigns one of the four statuses, and names gaps. The kept set is a subset
/// of the discovered set by construction.
inline ValidationDecision validate_mapping(const SpecSection& section,
                                           const std::vector<ScoredSymbol>& symbols,
                                           const ValidationContext& context, Provider& provider,
                                           const PipelineConfig& cfg) {
    SectionView view = section_view(section, cfg.query_max_terms);
    std::vector<SymbolCandidate> cands;
    for (const auto& s : symbols)
        cands.push_back({s.id(), s.name, s.kind, s.file, s.description, s.score});

    ValidationOutcome outcome =
        validate_with_provider(view, cands, context.snapshot(), provider);

    ValidationDecision decision;
    impl_status_from_string(outcome.status, decision.status);
    double sum = 0.0;
    for (const auto& [id, conf] : outcome.keep) {
        for (const auto& s : symbols) {
            if (s.id() == id) {
                decision.validated.push_back({s.file, s.name, s.kind, s.line_start, conf});
                sum += conf;
                break;
            }
        }
    }
    if (decision.validated.empty() && decision.status != ImplStatus::Not_Applicable)
        decision.status = ImplStatus::Not_Implemented; // trace invariant
    if (!decision.validated.empty())
        decision.confidence = sum / double(decision.validated.size());
    decision.gap_notes = outcome.gap_notes;
    return decision;
}

struct PipelineRun {
    std::vector<SectionTrace> traces;
    double runtime_seconds = 0.0;
};

/// Algorithm: repo structure doc once, stages 1-3 per section on a bounded
/// worker pool, validation strictly in section order threading the rolling
/// context. Per-section provider failures quarantine that section only; the
/// run fails only if the repository doc cannot be generated.
inline PipelineRun run_pipeline(const SpecDocument& spec, const RepoModel& model,
                                Provider& provider, const PipelineConfig& cfg,
                                StructureCache& cache, int worker_limit = 4) {
    auto t0 = std::chrono::steady_clock::now();
    PipelineRun run;
    if (spec.sections.empty()) return run;

    StructureDoc repo_doc = generate_repo_structure_doc(model, provider, cache);

    struct StageResult {
        std::vector<ScoredPath> folders, files;
        std::vector<ScoredSymbol> symbols;
        std::optional<std::string> error;
    };
    std::vector<StageResult> results(spec.sections.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= spec.sections.size()) return;
            const SpecSection& sec = spec.sections[i];
            try {
                results[i].folders = discover_folders(sec, repo_doc, provider, cfg);
                results[i].files =
                    discover_files(sec, results[i].folders, model, provider, cache, cfg);
                results[i].symbols =
                    discover_symbols(sec, results[i].files, model, provider, cache, cfg);
            } catch (const Error& e) {
                results[i].error = e.what();
            }
        }
    };
    int workers = std::max(1, worker_limit);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ValidationContext context;
    context.window = cfg.context_window_sections;
    for (std::size_t i = 0; i < spec.sections.size(); ++i) {
        const SpecSection& sec = spec.sections[i];
        SectionTrace trace;
        trace.section_id = sec.id;
        trace.folders = results[i].folders;
        trace.files = results[i].files;
        trace.symbols = results[i].symbols;
        if (results[i].error) {
            trace.error = results[i].error;
            trace.status = ImplStatus::Not_Implemented;
            trace.gap_notes = "section quarantined: " + *results[i].error;
        } else {
            try {
                ValidationDecision d =
                    validate_mapping(sec, results[i].symbols, context, provider, cfg);
                trace.validated_symbols = d.validated;
                trace.status = d.status;
                trace.confidence = d.confidence;
                trace.gap_notes = d.gap_notes;
                context.push(sec.id, to_string(d.status), d.validated);
            } catch (const Error& e) {
                trace.error = e.what();
                trace.status = ImplStatus::Not_Implemented;
                trace.gap_notes = "section quarantined: " + std::string(e.what());
            }
        }
        run.traces.push_back(std::move(trace));
    }

    run.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

// --- structural integrity (the composition property of the hierarchy) ---

/// Violations of the hierarchy containment rules for one trace; empty means
/// the trace is structurally sound.
inline std::vector<std::string> trace_hierarchy_violations(const SectionTrace& trace) {
    std::vector<std::string> v;
    std::set<std::string> folders, files;
    for (const auto& f : trace.folders) folders.insert(f.path);
    for (const auto& f : trace.files) files.insert(f.path);

    for (const auto& f : trace.files)
        if (!folders.count(parent_folder(f.path)))
            v.push_back("file " + f.path + " has no discovered folder");
    for (const auto& s : trace.symbols)
        if (!files.count(s.file)) v.push_back("symbol " + s.name + " outside discovered files");
    std::set<std::string> symbol_ids;
    for (const auto& s : trace.symbols) symbol_ids.insert(s.id());
    for (const auto& s : trace.validated_symbols) {
        std::string id =
            s.file + "|" + s.name + "|" + s.kind + "|" + std::to_string(s.line_start);
        if (!symbol_ids.count(id)) v.push_back("validated symbol " + s.name + " not discovered");
        if (!files.count(s.file))
            v.push_back("validated symbol " + s.name + " outside discovered files");
    }
    for (const auto& a : trace.folders)
        for (const auto& b : trace.folders)
            if (is_proper_ancestor(a.path, b.path))
                v.push_back("folder " + (a.path.empty() ? "." : a.path) + " is an ancestor of " +
                            b.path);
    if (trace.validated_symbols.empty() && trace.status != ImplStatus::Not_Implemented &&
        trace.status != ImplStatus::Not_Applicable)
        v.push_back("empty validated set with status " + std::string(to_string(trace.status)));
    return v;
}

// --- JSON (stable field names; section order preserved by the caller) ---

inline void to_json(nlohmann::json& j, const ScoredPath& p) {
    j = {{"path", p.path}, {"score", p.score}};
}
inline void to_json(nlohmann::json& j, const ScoredSymbol& s) {
    j = {{"file", s.file},       {"name", s.name},   {"kind", s.kind},
         {"line_start", s.line_start}, {"score", s.score}};
}
inline void to_json(nlohmann::json& j, const ValidatedSymbol& s) {
    j = {{"file", s.file}, {"name", s.name}, {"kind", s.kind}, {"line_start", s.line_start}};
    if (s.confidence) j["confidence"] = *s.confidence;
}
inline void to_json(nlohmann::json& j, const SectionTrace& t) {
    j = {{"section_id", t.section_id},
         {"folders", t.folders},
         {"files", t.files},
         {"symbols", t.symbols},
         {"validated_symbols", t.validated_symbols},
         {"status", to_string(t.status)},
         {"gap_notes", t.gap_notes}};
    if (t.confidence) j["confidence"] = *t.confidence;
    if (t.error) j["error"] = *t.error;
}

inline void from_json(const nlohmann::json& j, ScoredPath& p) {
    p.path = j.value("path", "");
    p.score = j.value("score", 0.0);
}
inline void from_json(const nlohmann::json& j, ScoredSymbol& s) {
    s.file = j.value("file", "");
    s.name = j.value("name", "");
    s.kind = j.value("kind", "");
    s.line_start = j.value("line_start", 1);
    s.score = j.value("score", 0.0);
}
inline void from_json(const nlohmann::json& j, ValidatedSymbol& s) {
    s.file = j.value("file", "");
    s.name = j.value("name", "");
    s.kind = j.value("kind", "");
    s.line_start = j.value("line_start", 1);
    if (j.contains("confidence")) s.confidence = j["confidence"].get<double>();
}
inline void from_json(const nlohmann::json& j, SectionTrace& t) {
    t.section_id = j.value("section_id", "");
    t.folders = j.value("folders", std::vector<ScoredPath>{});
    t.files = j.value("files", std::vector<ScoredPath>{});
    t.symbols = j.value("symbols", std::vector<ScoredSymbol>{});
    t.validated_symbols = j.value("validated_symbols", std::vector<ValidatedSymbol>{});
    impl_status_from_string(j.value("status", "Not_Implemented"), t.status);
    t.gap_notes = j.value("gap_notes", "");
    if (j.contains("confidence")) t.confidence = j["confidence"].get<double>();
    if (j.contains("error")) t.error = j["error"].get<std::string>();
}

} // namespace spectrace
