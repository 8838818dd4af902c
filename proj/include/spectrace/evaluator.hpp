#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectrace/errors.hpp"
#include "spectrace/pipeline.hpp"
#include "spectrace/repo_model.hpp"
#include "spectrace/spec_corpus.hpp"

namespace spectrace {

struct GroundTruthEntry {
    std::string section_id;
    std::set<std::string> expected_folders;
    std::set<std::string> expected_files;
    std::set<std::pair<std::string, std::string>> expected_symbols; // (name, kind)
    std::map<std::string, std::string> layers; // folder -> architectural layer label
};

using GroundTruth = std::map<std::string, GroundTruthEntry>;

inline GroundTruth load_ground_truth(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw Error("ground truth must be a JSON array: " + path.string());
    GroundTruth gt;
    for (const auto& e : j) {
        GroundTruthEntry entry;
        entry.section_id = e.value("section_id", "");
        for (const auto& f : e.value("expected_folders", std::vector<std::string>{}))
            entry.expected_folders.insert(normalize_rel(f));
        for (const auto& f : e.value("expected_files", std::vector<std::string>{}))
            entry.expected_files.insert(normalize_rel(f));
        if (e.contains("expected_symbols"))
            for (const auto& s : e["expected_symbols"])
                entry.expected_symbols.emplace(s.value("name", ""), s.value("kind", ""));
        if (e.contains("layers"))
            for (auto& [k, v] : e["layers"].items())
                entry.layers[normalize_rel(k)] = v.get<std::string>();
        gt[entry.section_id] = std::move(entry);
    }
    return gt;
}

// ---------------------------------------------------------------------------
// §5.1 metrics
// ---------------------------------------------------------------------------

/// Percentage of mapped files that exist in the repository, over the union of
/// all sections; vacuously 100 when nothing was mapped.
inline double file_existence_accuracy(const std::vector<SectionTrace>& traces,
                                      const RepoModel& model) {
    std::set<std::string> mapped;
    for (const auto& t : traces) {
        if (t.error) continue;
        for (const auto& f : t.files) mapped.insert(f.path);
    }
    if (mapped.empty()) return 100.0;
    std::size_t existing = 0;
    for (const auto& f : mapped) existing += model.files.count(f);
    return 100.0 * double(existing) / double(mapped.size());
}

/// Per-section recall |mapped ∩ expected| / |expected|, macro-averaged over
/// sections whose expected file set is non-empty.
inline double file_mapping_accuracy(const std::vector<SectionTrace>& traces,
                                    const GroundTruth& gt) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& t : traces) {
        if (t.error) continue;
        auto it = gt.find(t.section_id);
        if (it == gt.end())
            throw MissingGroundTruth("no ground truth entry for section " + t.section_id);
        const auto& expected = it->second.expected_files;
        if (expected.empty()) continue;
        std::size_t hit = 0;
        for (const auto& f : t.files) hit += expected.count(f.path);
        sum += double(hit) / double(expected.size());
        ++counted;
    }
    return counted == 0 ? 0.0 : 100.0 * sum / double(counted);
}

/// Supplementary precision (not a published metric): macro-averaged
/// |mapped ∩ expected| / |mapped| over sections that mapped anything.
inline double file_mapping_precision(const std::vector<SectionTrace>& traces,
                                     const GroundTruth& gt) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& t : traces) {
        if (t.error || t.files.empty()) continue;
        auto it = gt.find(t.section_id);
        if (it == gt.end())
            throw MissingGroundTruth("no ground truth entry for section " + t.section_id);
        std::size_t hit = 0;
        for (const auto& f : t.files) hit += it->second.expected_files.count(f.path);
        sum += double(hit) / double(t.files.size());
        ++counted;
    }
    return counted == 0 ? 0.0 : 100.0 * sum / double(counted);
}

struct ConfidenceCoverage {
    std::optional<double> confidence_pct; // absent when no symbol carries confidence
    double elements_per_section = 0.0;
    bool empty_warning = false;
};

/// Mean per-validated-symbol confidence (x100) and mean validated symbols per
/// non-errored section.
inline ConfidenceCoverage confidence_and_coverage(const std::vector<SectionTrace>& traces) {
    ConfidenceCoverage out;
    double conf_sum = 0.0;
    std::size_t conf_n = 0, elem_sum = 0, sections = 0;
    for (const auto& t : traces) {
        if (t.error) continue;
        ++sections;
        elem_sum += t.validated_symbols.size();
        for (const auto& v : t.validated_symbols) {
            if (v.confidence) {
                conf_sum += *v.confidence;
                ++conf_n;
            }
        }
    }
    if (conf_n > 0) out.confidence_pct = 100.0 * conf_sum / double(conf_n);
    out.elements_per_section = sections == 0 ? 0.0 : double(elem_sum) / double(sections);
    out.empty_warning = sections == 0;
    return out;
}

// ---------------------------------------------------------------------------
// Drift score
// ---------------------------------------------------------------------------

namespace detail {

// One level of the rubric. "Correct layer" is membership of the item's layer
// label in the layers spanned by the expected set; at the symbol level the
// analogue is the symbol's kind against the expected kinds.
//   0.0  exact set match
//   0.3  all expected present, at most 2 extraneous items, all in correct layers
//   0.5  wrong items but every mapped item in a correct layer
//   1.0  anything mapped in a wrong layer, or an expected layer entirely missed
template <typename Item>
double drift_level(const std::set<Item>& mapped, const std::set<Item>& expected,
                   const std::function<std::string(const Item&)>& layer_of,
                   const std::set<std::string>& expected_layers) {
    if (mapped == expected) return 0.0;
    bool superset = std::includes(mapped.begin(), mapped.end(), expected.begin(), expected.end());
    std::vector<Item> extras;
    for (const auto& m : mapped)
        if (!expected.count(m)) extras.push_back(m);
    auto in_correct_layer = [&](const Item& it) {
        return expected_layers.count(layer_of(it)) > 0;
    };
    if (superset && extras.size() <= 2 &&
        std::all_of(extras.begin(), extras.end(), in_correct_layer))
        return 0.3;
    if (!mapped.empty() &&
        std::all_of(mapped.begin(), mapped.end(), in_correct_layer))
        return 0.5;
    return 1.0;
}

} // namespace detail

/// Summed per-level deviation of one trace from ground truth; 0.0 means
/// perfect alignment at folder, file and symbol level.
inline double drift_score(const SectionTrace& trace, const GroundTruthEntry& gt) {
    auto layer_of_folder = [&](const std::string& folder) -> std::string {
        auto it = gt.layers.find(folder);
        return it == gt.layers.end() ? std::string("(unlabeled)") : it->second;
    };
    std::set<std::string> expected_layers;
    for (const auto& f : gt.expected_folders) expected_layers.insert(layer_of_folder(f));

    std::set<std::string> mapped_folders, mapped_files;
    for (const auto& f : trace.folders) mapped_folders.insert(f.path);
    for (const auto& f : trace.files) mapped_files.insert(f.path);
    std::set<std::pair<std::string, std::string>> mapped_symbols;
    for (const auto& s : trace.validated_symbols) mapped_symbols.emplace(s.name, s.kind);

    std::set<std::string> expected_kinds;
    for (const auto& [name, kind] : gt.expected_symbols) expected_kinds.insert(kind);

    double d_folder = detail::drift_level<std::string>(
        mapped_folders, gt.expected_folders, layer_of_folder, expected_layers);
    double d_file = detail::drift_level<std::string>(
        mapped_files, gt.expected_files,
        [&](const std::string& f) { return layer_of_folder(parent_folder(f)); }, expected_layers);
    double d_symbol = detail::drift_level<std::pair<std::string, std::string>>(
        mapped_symbols, gt.expected_symbols,
        [](const std::pair<std::string, std::string>& s) { return s.second; }, expected_kinds);
    return d_folder + d_file + d_symbol;
}

// ---------------------------------------------------------------------------
// Gap report
// ---------------------------------------------------------------------------

/// Sections grouped by implementation status; gap sections list their
/// gap_notes and the section's normative sentences.
inline std::string gap_report_markdown(const SpecDocument& spec,
                                       const std::vector<SectionTrace>& traces) {
    std::map<std::string, const SpecSection*> by_id;
    for (const auto& s : spec.sections) by_id[s.id] = &s;

    std::map<std::string, std::vector<const SectionTrace*>> groups;
    for (const auto& t : traces) groups[to_string(t.status)].push_back(&t);

    std::string md = "# Implementation gap report\n\n";
    md += "## Status summary\n\n";
    for (const char* status :
         {"Implemented", "Partially_Implemented", "Not_Implemented", "Not_Applicable"}) {
        md += "- " + std::string(status) + ": " + std::to_string(groups[status].size()) + "\n";
    }
    std::size_t errored = 0;
    for (const auto& t : traces) errored += t.error.has_value();
    if (errored) md += "- (errored, excluded from accuracy metrics): " + std::to_string(errored) + "\n";

    for (const char* status : {"Not_Implemented", "Partially_Implemented"}) {
        const auto& group = groups[status];
        if (group.empty()) continue;
        md += "\n## " + std::string(status) + "\n";
        for (const auto* t : group) {
            const SpecSection* sec = by_id.count(t->section_id) ? by_id[t->section_id] : nullptr;
            md += "\n### Section " + t->section_id;
            if (sec && !sec->title.empty()) md += " — " + sec->title;
            md += "\n\n";
            if (!t->gap_notes.empty()) md += "- notes: " + t->gap_notes + "\n";
            if (t->error) md += "- error: " + *t->error + "\n";
            if (sec) {
                for (const auto& [a, b] : sentence_spans(sec->body)) {
                    std::string sentence = sec->body.substr(a, b - a);
                    if (has_normative_language(sentence)) {
                        while (!sentence.empty() &&
                               std::isspace(static_cast<unsigned char>(sentence.back())))
                            sentence.pop_back();
                        md += "- requirement: " + sentence + "\n";
                    }
                }
            }
        }
    }
    return md;
}

// ---------------------------------------------------------------------------
// Method comparison
// ---------------------------------------------------------------------------

struct MethodRun {
    std::string method;
    std::vector<SectionTrace> traces;
    nlohmann::json ledger; // TokenLedger::to_json shape
    double runtime_seconds = 0.0;
};

struct EvalRow {
    std::string method;
    std::optional<double> confidence_pct;
    double elements_per_section = 0.0;
    double runtime_minutes = 0.0;
    std::optional<double> tokens_millions; // absent when the method made no provider calls
    double file_existence_pct = 0.0;
    double file_mapping_pct = 0.0;
    double file_mapping_precision_pct = 0.0; // supplementary, not a published metric
    std::optional<double> mean_drift;
    std::size_t errored_sections = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    nlohmann::json per_section; // per-method, per-section detail records
};

/// One row per method with the six metrics plus drift; pure function of its
/// inputs.
inline EvalReport compare_methods(const std::vector<MethodRun>& runs, const GroundTruth& gt,
                                  const RepoModel& model) {
    EvalReport report;
    report.per_section = nlohmann::json::object();
    for (const auto& run : runs) {
        EvalRow row;
        row.method = run.method;
        auto cc = confidence_and_coverage(run.traces);
        row.confidence_pct = cc.confidence_pct;
        row.elements_per_section = cc.elements_per_section;
        row.runtime_minutes = run.runtime_seconds / 60.0;
        long total_tokens = run.ledger.value("total_tokens", 0l);
        long calls = 0;
        if (run.ledger.contains("by_phase"))
            for (auto& [k, v] : run.ledger["by_phase"].items()) calls += v.value("calls", 0l);
        if (calls > 0) row.tokens_millions = double(total_tokens) / 1e6;
        row.file_existence_pct = file_existence_accuracy(run.traces, model);
        row.file_mapping_pct = file_mapping_accuracy(run.traces, gt);
        row.file_mapping_precision_pct = file_mapping_precision(run.traces, gt);
        for (const auto& t : run.traces) row.errored_sections += t.error.has_value();

        nlohmann::json details = nlohmann::json::array();
        double drift_sum = 0.0;
        std::size_t drift_n = 0;
        for (const auto& t : run.traces) {
            nlohmann::json d = {{"section_id", t.section_id},
                                {"status", to_string(t.status)},
                                {"mapped_files", t.files.size()},
                                {"validated_symbols", t.validated_symbols.size()}};
            auto it = gt.find(t.section_id);
            if (it != gt.end() && !t.error) {
                double drift = drift_score(t, it->second);
                d["drift"] = drift;
                drift_sum += drift;
                ++drift_n;
            }
            if (t.error) d["error"] = *t.error;
            details.push_back(std::move(d));
        }
        if (drift_n > 0) row.mean_drift = drift_sum / double(drift_n);
        report.per_section[run.method] = std::move(details);
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace detail {

inline std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}
inline std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt1(*v) : std::string("N/A");
}

} // namespace detail

/// Markdown comparison table, column order matching the standard performance
/// comparison layout; the precision column is supplementary.
inline std::string eval_report_markdown(const EvalReport& report) {
    std::string md = "# Method comparison\n\n";
    md += "| Method | Confidence (%) | Elements per Section | Runtime (min) | Tokens (M) | "
          "File Exist. (%) | File Map. Acc. (%) | Mean Drift | File Map. Prec. (%) (suppl.) |\n";
    md += "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : report.rows) {
        md += "| " + r.method + " | " + detail::fmt_opt(r.confidence_pct) + " | " +
              detail::fmt1(r.elements_per_section) + " | " + detail::fmt1(r.runtime_minutes) +
              " | " + detail::fmt_opt(r.tokens_millions) + " | " +
              detail::fmt1(r.file_existence_pct) + " | " + detail::fmt1(r.file_mapping_pct) +
              " | " + detail::fmt_opt(r.mean_drift) + " | " +
              detail::fmt1(r.file_mapping_precision_pct) + " |\n";
    }
    return md;
}

inline nlohmann::json eval_report_to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json row = {{"method", r.method},
                              {"elements_per_section", r.elements_per_section},
                              {"runtime_minutes", r.runtime_minutes},
                              {"file_existence_pct", r.file_existence_pct},
                              {"file_mapping_pct", r.file_mapping_pct},
                              {"file_mapping_precision_pct", r.file_mapping_precision_pct},
                              {"errored_sections", r.errored_sections}};
        row["confidence_pct"] = r.confidence_pct ? nlohmann::json(*r.confidence_pct)
                                                 : nlohmann::json(nullptr);
        row["tokens_millions"] = r.tokens_millions ? nlohmann::json(*r.tokens_millions)
                                                   : nlohmann::json(nullptr);
        row["mean_drift"] = r.mean_drift ? nlohmann::json(*r.mean_drift) : nlohmann::json(nullptr);
        rows.push_back(std::move(row));
    }
    return {{"rows", rows}, {"per_section", report.per_section}};
}

} // namespace spectrace
