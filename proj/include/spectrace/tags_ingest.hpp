#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectrace/fsutil.hpp"
#include "spectrace/repo_model.hpp"

namespace spectrace {

struct TagIngestStats {
    std::size_t mapped = 0;
    std::map<std::string, std::size_t> skipped_kinds;
    std::vector<std::string> malformed; // "line N: reason"
    std::size_t unknown_file = 0;
    std::size_t duplicates = 0;
};

// JSON-lines tags ingestion (universal-ctags --output-format=json shape).
// Kind mapping onto the six symbol kinds:
//   define/macro -> macro            member          -> dropped
//   enumerator   -> constant         enum            -> enum
//   typedef      -> typedef          struct          -> struct
//   function     -> function         prototype       -> function (declaration)
//   variable     -> constant when a const qualifier is visible, else dropped
// Unmapped kinds are skipped with a counted warning; malformed lines are
// collected and processing continues.
inline TagIngestStats ingest_tags_stream(std::istream& in, RepoModel& model) {
    TagIngestStats stats;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            stats.malformed.push_back("line " + std::to_string(line_no) + ": not a JSON object");
            continue;
        }
        if (j.contains("_type") && j["_type"] != "tag") continue; // ptag etc.
        if (!j.contains("name") || !j.contains("path") || !j.contains("line") ||
            !j.contains("kind")) {
            stats.malformed.push_back("line " + std::to_string(line_no) +
                                      ": missing required field (name/path/line/kind)");
            continue;
        }
        if (!j["name"].is_string() || !j["path"].is_string() ||
            !j["line"].is_number_integer() || !j["kind"].is_string()) {
            stats.malformed.push_back("line " + std::to_string(line_no) + ": bad field type");
            continue;
        }

        std::string tag_kind = j["kind"].get<std::string>();
        std::string extra;
        for (const char* f : {"typeref", "signature", "pattern"})
            if (j.contains(f) && j[f].is_string()) extra += j[f].get<std::string>() + " ";

        CodeSymbol sym;
        bool keep = true;
        if (tag_kind == "function") {
            sym.kind = SymbolKind::function;
        } else if (tag_kind == "prototype") {
            sym.kind = SymbolKind::function;
            sym.declaration = true;
        } else if (tag_kind == "define" || tag_kind == "macro") {
            sym.kind = SymbolKind::macro;
        } else if (tag_kind == "struct") {
            sym.kind = SymbolKind::struct_;
        } else if (tag_kind == "enum") {
            sym.kind = SymbolKind::enum_;
        } else if (tag_kind == "enumerator") {
            sym.kind = SymbolKind::constant;
        } else if (tag_kind == "typedef") {
            sym.kind = SymbolKind::typedef_;
        } else if (tag_kind == "variable") {
            if (extra.find("const") != std::string::npos) sym.kind = SymbolKind::constant;
            else keep = false;
        } else {
            keep = false; // member and anything else
        }
        if (!keep) {
            stats.skipped_kinds[tag_kind] += 1;
            continue;
        }

        sym.name = j["name"].get<std::string>();
        sym.file = normalize_rel(j["path"].get<std::string>());
        sym.line_start = j["line"].get<int>();
        sym.line_end = sym.line_start;
        if (j.contains("end") && j["end"].is_number_integer()) {
            int e = j["end"].get<int>();
            if (e >= sym.line_start) sym.line_end = e;
        }
        if (j.contains("signature") && j["signature"].is_string())
            sym.signature = sym.name + j["signature"].get<std::string>();
        else
            sym.signature = sym.name;

        if (!model.files.count(sym.file)) {
            stats.unknown_file += 1;
            continue;
        }
        if (model.add_symbol(std::move(sym))) stats.mapped += 1;
        else stats.duplicates += 1;
    }
    model.sort_symbols();
    return stats;
}

} // namespace spectrace
