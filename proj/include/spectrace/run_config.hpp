#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectrace/baselines.hpp"
#include "spectrace/errors.hpp"
#include "spectrace/fsutil.hpp"
#include "spectrace/hash.hpp"
#include "spectrace/http_provider.hpp"
#include "spectrace/pipeline.hpp"
#include "spectrace/version.hpp"

namespace spectrace {

struct ProviderConfig {
    std::string kind = "oracle"; // oracle | http | replay
    std::string endpoint;
    std::string model;
    std::string api_key_env = "SPECTRACE_API_KEY";
    std::string transcript_path; // written when recording, read when replaying
    bool record_transcript = false;
    int max_in_flight = 4;
    int retry_attempts = 3;
    int retry_base_ms = 1000;
};

struct BaselineConfig {
    int grep_k = 10;
    HybridWeights weights;
    int embedding_dim = 1024;
    int window_sentences = 3;
    double boundary_threshold = 0.55;
};

struct RunConfig {
    std::string repo_root;
    std::string spec_path;
    std::string output_dir;
    ProviderConfig provider;
    PipelineConfig pipeline;
    BaselineConfig baseline;
    std::string tags_source; // optional JSON-lines tags file; "-" reads stdin
    bool prefer_tags = true; // tags stream wins over the builtin lexer when both exist
    int worker_limit = 4;
    std::vector<std::string> include_extensions = {".c",  ".h",  ".cpp", ".hpp", ".cc",
                                                   ".hh", ".cxx", ".hxx", ".md",  ".txt"};
    std::vector<std::string> exclude_globs;
};

namespace detail {

// "${VAR}" anywhere in a string value expands from the environment.
inline std::string interpolate_env(const std::string& s) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '$' && i + 1 < s.size() && s[i + 1] == '{') {
            auto close = s.find('}', i + 2);
            if (close != std::string::npos) {
                std::string var = s.substr(i + 2, close - i - 2);
                if (const char* v = std::getenv(var.c_str())) out += v;
                i = close + 1;
                continue;
            }
        }
        out += s[i++];
    }
    return out;
}

inline void interpolate_env_json(nlohmann::json& j) {
    if (j.is_string()) j = interpolate_env(j.get<std::string>());
    else if (j.is_object() || j.is_array())
        for (auto& v : j) interpolate_env_json(v);
}

} // namespace detail

inline RunConfig run_config_from_json(nlohmann::json j) {
    detail::interpolate_env_json(j);
    RunConfig c;
    try {
        c.repo_root = j.value("repo_root", "");
        c.spec_path = j.value("spec_path", "");
        c.output_dir = j.value("output_dir", "");
        if (j.contains("provider")) {
            const auto& p = j["provider"];
            c.provider.kind = p.value("kind", c.provider.kind);
            c.provider.endpoint = p.value("endpoint", "");
            c.provider.model = p.value("model", "");
            c.provider.api_key_env = p.value("api_key_env", c.provider.api_key_env);
            c.provider.transcript_path = p.value("transcript_path", "");
            c.provider.record_transcript = p.value("record_transcript", false);
            c.provider.max_in_flight = p.value("max_in_flight", c.provider.max_in_flight);
            c.provider.retry_attempts = p.value("retry_attempts", c.provider.retry_attempts);
            c.provider.retry_base_ms = p.value("retry_base_ms", c.provider.retry_base_ms);
        }
        if (j.contains("pipeline")) {
            const auto& p = j["pipeline"];
            c.pipeline.theta1 = p.value("theta1", c.pipeline.theta1);
            c.pipeline.theta2 = p.value("theta2", c.pipeline.theta2);
            c.pipeline.theta3 = p.value("theta3", c.pipeline.theta3);
            c.pipeline.folder_chunk_budget =
                p.value("folder_chunk_budget", c.pipeline.folder_chunk_budget);
            c.pipeline.refinement_max_folders =
                p.value("refinement_max_folders", c.pipeline.refinement_max_folders);
            c.pipeline.max_files_per_section =
                p.value("max_files_per_section", c.pipeline.max_files_per_section);
            c.pipeline.context_window_sections =
                p.value("context_window_sections", c.pipeline.context_window_sections);
            c.pipeline.query_max_terms = p.value("query_max_terms", c.pipeline.query_max_terms);
            c.pipeline.include_declarations =
                p.value("include_declarations", c.pipeline.include_declarations);
        }
        if (j.contains("baseline")) {
            const auto& b = j["baseline"];
            c.baseline.grep_k = b.value("grep_k", c.baseline.grep_k);
            c.baseline.weights.w_bm25 = b.value("w_bm25", c.baseline.weights.w_bm25);
            c.baseline.weights.w_overlap = b.value("w_overlap", c.baseline.weights.w_overlap);
            c.baseline.weights.w_vec = b.value("w_vec", c.baseline.weights.w_vec);
            c.baseline.weights.prefilter_k = b.value("prefilter_k", c.baseline.weights.prefilter_k);
            c.baseline.weights.final_k = b.value("final_k", c.baseline.weights.final_k);
            c.baseline.embedding_dim = b.value("embedding_dim", c.baseline.embedding_dim);
            c.baseline.window_sentences = b.value("window_sentences", c.baseline.window_sentences);
            c.baseline.boundary_threshold =
                b.value("boundary_threshold", c.baseline.boundary_threshold);
        }
        c.tags_source = j.value("tags_source", "");
        c.prefer_tags = j.value("prefer_tags", true);
        c.worker_limit = j.value("worker_limit", c.worker_limit);
        if (j.contains("include_extensions"))
            c.include_extensions = j["include_extensions"].get<std::vector<std::string>>();
        if (j.contains("exclude_globs"))
            c.exclude_globs = j["exclude_globs"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    if (c.repo_root.empty()) throw ConfigError("config: repo_root is required");
    if (c.output_dir.empty()) throw ConfigError("config: output_dir is required");
    if (c.worker_limit < 1) throw ConfigError("config: worker_limit must be >= 1");
    if (c.provider.kind != "oracle" && c.provider.kind != "http" && c.provider.kind != "replay")
        throw ConfigError("config: provider.kind must be oracle, http or replay");
    double wsum = c.baseline.weights.w_bm25 + c.baseline.weights.w_overlap +
                  c.baseline.weights.w_vec;
    if (std::abs(wsum - 1.0) > 1e-9)
        throw ConfigError("config: baseline weights must sum to 1");
    if (c.baseline.weights.final_k > c.baseline.weights.prefilter_k)
        throw ConfigError("config: final_k must not exceed prefilter_k");
    for (double t : {c.pipeline.theta1, c.pipeline.theta2, c.pipeline.theta3})
        if (t < 0.0 || t > 1.0) throw ConfigError("config: thresholds must be in [0,1]");
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("config file is not a JSON object: " + path.string());
    return run_config_from_json(j);
}

/// Effective configuration with every default materialized; this exact JSON
/// is snapshotted into each run record and hashed into the run id.
inline nlohmann::json materialize_config(const RunConfig& c) {
    return nlohmann::json{
        {"repo_root", c.repo_root},
        {"spec_path", c.spec_path},
        {"output_dir", c.output_dir},
        {"provider",
         {{"kind", c.provider.kind},
          {"endpoint", c.provider.endpoint},
          {"model", c.provider.model},
          {"api_key_env", c.provider.api_key_env},
          {"transcript_path", c.provider.transcript_path},
          {"record_transcript", c.provider.record_transcript},
          {"max_in_flight", c.provider.max_in_flight},
          {"retry_attempts", c.provider.retry_attempts},
          {"retry_base_ms", c.provider.retry_base_ms}}},
        {"pipeline",
         {{"theta1", c.pipeline.theta1},
          {"theta2", c.pipeline.theta2},
          {"theta3", c.pipeline.theta3},
          {"folder_chunk_budget", c.pipeline.folder_chunk_budget},
          {"refinement_max_folders", c.pipeline.refinement_max_folders},
          {"max_files_per_section", c.pipeline.max_files_per_section},
          {"context_window_sections", c.pipeline.context_window_sections},
          {"query_max_terms", c.pipeline.query_max_terms},
          {"include_declarations", c.pipeline.include_declarations}}},
        {"baseline",
         {{"grep_k", c.baseline.grep_k},
          {"w_bm25", c.baseline.weights.w_bm25},
          {"w_overlap", c.baseline.weights.w_overlap},
          {"w_vec", c.baseline.weights.w_vec},
          {"prefilter_k", c.baseline.weights.prefilter_k},
          {"final_k", c.baseline.weights.final_k},
          {"embedding_dim", c.baseline.embedding_dim},
          {"window_sentences", c.baseline.window_sentences},
          {"boundary_threshold", c.baseline.boundary_threshold}}},
        {"tags_source", c.tags_source},
        {"prefer_tags", c.prefer_tags},
        {"worker_limit", c.worker_limit},
        {"include_extensions", c.include_extensions},
        {"exclude_globs", c.exclude_globs}};
}

// UTC timestamp + 8-hex config hash; sortable and collision-evident.
inline std::string make_run_id(const nlohmann::json& materialized_config) {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return std::string(buf) + "-" + to_hex(fnv1a64(materialized_config.dump()), 8);
}

struct RunRecord {
    std::string run_id;
    std::string method; // hierarchical | grep | hybrid
    nlohmann::json config;
    std::vector<SectionTrace> traces;
    nlohmann::json ledger;
    double runtime_seconds = 0.0;
    std::string tool_version = kVersion;
};

inline nlohmann::json run_record_to_json(const RunRecord& r) {
    nlohmann::json sections = nlohmann::json::array();
    for (const auto& t : r.traces) sections.push_back(t);
    return {{"run_id", r.run_id},
            {"method", r.method},
            {"tool_version", r.tool_version},
            {"config", r.config},
            {"sections", sections},
            {"metrics",
             {{"runtime_seconds", r.runtime_seconds}, {"tokens_by_phase", r.ledger}}}};
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.run_id = j.value("run_id", "");
    r.method = j.value("method", "");
    r.tool_version = j.value("tool_version", "");
    r.config = j.value("config", nlohmann::json::object());
    if (j.contains("sections"))
        for (const auto& t : j["sections"]) r.traces.push_back(t.get<SectionTrace>());
    if (j.contains("metrics")) {
        r.runtime_seconds = j["metrics"].value("runtime_seconds", 0.0);
        r.ledger = j["metrics"].value("tokens_by_phase", nlohmann::json::object());
    }
    return r;
}

inline RunRecord load_run_record(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) throw Error("not a run record: " + path.string());
    return run_record_from_json(j);
}

/// Canonical bytes for determinism comparisons: the sections array only
/// (run ids and wall-clock metrics differ between otherwise identical runs).
inline std::string traces_canonical_json(const std::vector<SectionTrace>& traces) {
    nlohmann::json sections = nlohmann::json::array();
    for (const auto& t : traces) sections.push_back(t);
    return sections.dump(2) + "\n";
}

inline std::unique_ptr<Provider> make_provider(const ProviderConfig& cfg, TokenLedger& ledger) {
    if (cfg.kind == "oracle") {
        return std::make_unique<OracleProvider>(ledger, cfg.max_in_flight);
    }
    if (cfg.kind == "replay") {
        if (cfg.transcript_path.empty())
            throw ConfigError("replay provider requires provider.transcript_path");
        return std::make_unique<ReplayProvider>(ledger, cfg.transcript_path, cfg.max_in_flight);
    }
    HttpProviderConfig http;
    http.endpoint = cfg.endpoint;
    http.model = cfg.model;
    http.api_key_env = cfg.api_key_env;
    http.retry_attempts = cfg.retry_attempts;
    http.retry_base_ms = cfg.retry_base_ms;
    return std::make_unique<HttpProvider>(ledger, http, cfg.max_in_flight);
}

} // namespace spectrace
