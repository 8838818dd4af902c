#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "spectrace/c_lexer.hpp"
#include "spectrace/evaluator.hpp"
#include "spectrace/run_config.hpp"
#include "spectrace/tags_ingest.hpp"

namespace spectrace {

struct CommandOutput {
    std::filesystem::path run_dir;
    std::filesystem::path record_path;
    std::filesystem::path traces_path;
    RunRecord record;
};

namespace detail {

inline RepoModel build_model(const RunConfig& cfg, std::ostream& log) {
    ScanOptions opts;
    opts.include_extensions = cfg.include_extensions;
    opts.exclude_globs = cfg.exclude_globs;
    RepoModel model = scan_repository(cfg.repo_root, opts);

    bool used_tags = false;
    if (!cfg.tags_source.empty() && cfg.prefer_tags) {
        TagIngestStats stats;
        if (cfg.tags_source == "-") {
            stats = ingest_tags_stream(std::cin, model);
        } else {
            std::ifstream in(cfg.tags_source);
            if (!in) throw ConfigError("cannot open tags source: " + cfg.tags_source);
            stats = ingest_tags_stream(in, model);
        }
        used_tags = true;
        log << "tags: " << stats.mapped << " symbols";
        if (!stats.skipped_kinds.empty()) {
            log << ", skipped kinds:";
            for (const auto& [k, n] : stats.skipped_kinds) log << " " << k << "=" << n;
        }
        if (!stats.malformed.empty()) log << ", malformed lines: " << stats.malformed.size();
        log << "\n";
        for (const auto& m : stats.malformed) log << "  warning: " << m << "\n";
    }
    if (!used_tags) {
        auto warnings = extract_all_builtin(model);
        log << "builtin lexer: " << model.symbols.size() << " symbols";
        if (!warnings.empty()) log << ", " << warnings.size() << " warnings";
        log << "\n";
    }
    return model;
}

inline SpecDocument load_spec(const RunConfig& cfg) {
    if (cfg.spec_path.empty()) throw ConfigError("config: spec_path is required");
    SpecDocument doc = parse_spec_markdown(read_text_file(cfg.spec_path), cfg.spec_path);
    for (auto& s : doc.sections)
        s.query_terms = extract_query_terms(s, std::size_t(cfg.pipeline.query_max_terms));
    return doc;
}

inline std::unique_ptr<TranscriptRecorder> attach_recorder(const RunConfig& cfg,
                                                           Provider& provider) {
    if (!cfg.provider.record_transcript || cfg.provider.transcript_path.empty()) return nullptr;
    auto rec = std::make_unique<TranscriptRecorder>(cfg.provider.transcript_path);
    provider.set_transcript_recorder(rec.get());
    return rec;
}

inline CommandOutput write_run(const RunConfig& cfg, RunRecord record) {
    namespace fs = std::filesystem;
    CommandOutput out;
    out.run_dir = fs::path(cfg.output_dir) / ("run_" + record.run_id);
    fs::create_directories(out.run_dir);
    out.record_path = out.run_dir / "record.json";
    out.traces_path = out.run_dir / "traces.json";
    write_file_atomic(out.record_path, run_record_to_json(record).dump(2) + "\n");
    write_file_atomic(out.traces_path, traces_canonical_json(record.traces));
    out.record = std::move(record);
    return out;
}

} // namespace detail

/// Scan the repository, extract symbols (tags stream or builtin lexer) and
/// pre-generate every structure doc through the cache.
inline int cmd_index(const RunConfig& cfg, std::ostream& log = std::cerr) {
    RepoModel model = detail::build_model(cfg, log);
    TokenLedger ledger;
    auto provider = make_provider(cfg.provider, ledger);
    auto recorder = detail::attach_recorder(cfg, *provider);
    StructureCache cache(std::filesystem::path(cfg.output_dir) / "structures");
    if (cache.manifest_was_corrupt())
        log << "warning: structure cache manifest was corrupt; regenerating\n";

    generate_repo_structure_doc(model, *provider, cache);
    for (const auto& folder : model.folders)
        generate_folder_structure_doc(folder, model, *provider, cache);
    for (const auto& file : model.files)
        if (is_c_like(file)) generate_file_structure_doc(file, model, *provider, cache);

    log << "indexed " << model.files.size() << " files in " << model.folders.size()
        << " folders, " << model.symbols.size() << " symbols; provider calls: "
        << ledger.total_calls() << ", tokens: " << ledger.total_tokens() << "\n";
    return 0;
}

/// Run the hierarchical pipeline and persist the run record.
inline CommandOutput cmd_map(const RunConfig& cfg, std::ostream& log = std::cerr) {
    SpecDocument spec = detail::load_spec(cfg);
    RepoModel model = detail::build_model(cfg, log);
    TokenLedger ledger;
    auto provider = make_provider(cfg.provider, ledger);
    auto recorder = detail::attach_recorder(cfg, *provider);
    StructureCache cache(std::filesystem::path(cfg.output_dir) / "structures");

    PipelineRun run =
        run_pipeline(spec, model, *provider, cfg.pipeline, cache, cfg.worker_limit);

    RunRecord record;
    record.config = materialize_config(cfg);
    record.run_id = make_run_id(record.config);
    record.method = "hierarchical";
    record.traces = run.traces;
    record.ledger = ledger.to_json();
    record.runtime_seconds = run.runtime_seconds;

    CommandOutput out = detail::write_run(cfg, std::move(record));
    write_file_atomic(out.run_dir / "gap_report.md", gap_report_markdown(spec, run.traces));
    log << "mapped " << spec.sections.size() << " sections in " << run.runtime_seconds
        << "s; tokens: " << ledger.total_tokens() << "; run " << out.record.run_id << "\n";
    return out;
}

/// Run one of the baselines with the same run-record shape as the pipeline.
inline CommandOutput cmd_baseline(const RunConfig& cfg, const std::string& method,
                                  std::ostream& log = std::cerr) {
    if (method != "grep" && method != "hybrid")
        throw ConfigError("unknown baseline method: " + method);
    SpecDocument spec = detail::load_spec(cfg);
    RepoModel model = detail::build_model(cfg, log);

    auto t0 = std::chrono::steady_clock::now();
    std::vector<SectionTrace> traces;

    if (method == "grep") {
        for (const auto& sec : spec.sections) {
            if (sec.query_terms.empty()) {
                SectionTrace t;
                t.section_id = sec.id;
                traces.push_back(std::move(t));
                continue;
            }
            auto matches = grep_search(model, sec.query_terms, cfg.baseline.grep_k);
            traces.push_back(grep_results_to_trace(matches, sec.id, model));
        }
    } else {
        EmbedFn embed = make_hash_embedder(cfg.baseline.embedding_dim);
        std::filesystem::path snapshot =
            std::filesystem::path(cfg.output_dir) / "hybrid_index.json";
        HybridIndex index;
        bool loaded = false;
        if (std::filesystem::exists(snapshot)) {
            try {
                index = load_hybrid_index(snapshot, embed);
                loaded = index == build_hybrid_index(model, embed, {}, cfg.baseline.embedding_dim);
            } catch (const Error&) {
                loaded = false;
            }
        }
        if (!loaded) {
            index = build_hybrid_index(model, embed, {}, cfg.baseline.embedding_dim);
            save_hybrid_index(index, snapshot);
            log << "hybrid index built: " << index.docs.size() << " symbols -> " << snapshot
                << "\n";
        }

        std::string spec_text = read_text_file(cfg.spec_path);
        auto chunks = semantic_chunk(spec_text, embed, cfg.baseline.window_sentences,
                                     cfg.baseline.boundary_threshold);
        for (const auto& sec : spec.sections) {
            // chunks overlapping the section's body span
            std::vector<HybridResult> merged;
            std::set<std::string> seen;
            for (const auto& chunk : chunks) {
                if (chunk.end_offset <= sec.body_start || chunk.start_offset >= sec.body_end)
                    continue;
                for (auto& r : hybrid_search(chunk, index, cfg.baseline.weights)) {
                    if (seen.insert(r.id).second) merged.push_back(std::move(r));
                }
            }
            std::sort(merged.begin(), merged.end(),
                      [](const HybridResult& a, const HybridResult& b) {
                          if (a.combined != b.combined) return a.combined > b.combined;
                          return a.id < b.id;
                      });
            traces.push_back(hybrid_results_to_trace(merged, sec.id));
        }
    }

    RunRecord record;
    record.config = materialize_config(cfg);
    record.run_id = make_run_id(record.config);
    record.method = method;
    record.traces = std::move(traces);
    record.ledger = TokenLedger().to_json(); // baselines make no provider calls
    record.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    CommandOutput out = detail::write_run(cfg, std::move(record));
    log << method << " baseline finished; run " << out.record.run_id << "\n";
    return out;
}

/// Compare run records against ground truth; writes JSON and markdown
/// reports.
inline EvalReport cmd_eval(const std::vector<std::filesystem::path>& run_files,
                           const std::filesystem::path& ground_truth_path,
                           const std::filesystem::path& out_dir, std::ostream& log = std::cerr) {
    if (run_files.empty()) throw ConfigError("eval: at least one run file is required");
    GroundTruth gt = load_ground_truth(ground_truth_path);

    std::vector<MethodRun> runs;
    RunConfig first_cfg;
    bool have_cfg = false;
    for (const auto& rf : run_files) {
        RunRecord rec = load_run_record(rf);
        if (!have_cfg) {
            first_cfg = run_config_from_json(rec.config);
            have_cfg = true;
        }
        MethodRun mr;
        mr.method = rec.method;
        mr.traces = rec.traces;
        mr.ledger = rec.ledger;
        mr.runtime_seconds = rec.runtime_seconds;
        runs.push_back(std::move(mr));
    }

    ScanOptions opts;
    opts.include_extensions = first_cfg.include_extensions;
    opts.exclude_globs = first_cfg.exclude_globs;
    RepoModel model = scan_repository(first_cfg.repo_root, opts);

    EvalReport report = compare_methods(runs, gt, model);
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "eval_report.json", eval_report_to_json(report).dump(2) + "\n");
    write_file_atomic(out_dir / "eval_report.md", eval_report_markdown(report));
    log << "eval report written for " << runs.size() << " run(s) -> " << out_dir.string() << "\n";
    return report;
}

} // namespace spectrace
