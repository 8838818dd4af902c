#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <system_error>
#include <vector>

#include "spectrace/errors.hpp"
#include "spectrace/fsutil.hpp"

namespace spectrace {

enum class SymbolKind { function, macro, struct_, constant, enum_, typedef_ };

inline const char* to_string(SymbolKind k) {
    switch (k) {
        case SymbolKind::function: return "function";
        case SymbolKind::macro: return "macro";
        case SymbolKind::struct_: return "struct";
        case SymbolKind::constant: return "constant";
        case SymbolKind::enum_: return "enum";
        case SymbolKind::typedef_: return "typedef";
    }
    return "function";
}

inline bool symbol_kind_from_string(std::string_view s, SymbolKind& out) {
    if (s == "function") out = SymbolKind::function;
    else if (s == "macro") out = SymbolKind::macro;
    else if (s == "struct") out = SymbolKind::struct_;
    else if (s == "constant") out = SymbolKind::constant;
    else if (s == "enum") out = SymbolKind::enum_;
    else if (s == "typedef") out = SymbolKind::typedef_;
    else return false;
    return true;
}

struct CodeSymbol {
    std::string name;
    SymbolKind kind = SymbolKind::function;
    std::string file;   // repo-relative
    int line_start = 1; // 1-based inclusive
    int line_end = 1;
    std::string signature;
    bool declaration = false; // prototypes; excluded from mapping by default
    bool truncated = false;   // closed at EOF due to unbalanced braces

    std::string id() const {
        return file + "|" + name + "|" + to_string(kind) + "|" + std::to_string(line_start);
    }
};

struct RepoModel {
    std::filesystem::path root;
    std::set<std::string> folders; // includes "" for the repo root
    std::set<std::string> files;
    std::vector<CodeSymbol> symbols;
    std::map<std::string, std::vector<std::size_t>> symbol_by_file;

    bool add_symbol(CodeSymbol sym) {
        for (std::size_t i : symbol_by_file[sym.file]) {
            const auto& other = symbols[i];
            if (other.name == sym.name && other.kind == sym.kind &&
                other.line_start == sym.line_start)
                return false;
        }
        symbol_by_file[sym.file].push_back(symbols.size());
        symbols.push_back(std::move(sym));
        return true;
    }

    void sort_symbols() {
        std::sort(symbols.begin(), symbols.end(), [](const CodeSymbol& a, const CodeSymbol& b) {
            if (a.file != b.file) return a.file < b.file;
            if (a.line_start != b.line_start) return a.line_start < b.line_start;
            if (a.name != b.name) return a.name < b.name;
            return int(a.kind) < int(b.kind);
        });
        symbol_by_file.clear();
        for (std::size_t i = 0; i < symbols.size(); ++i)
            symbol_by_file[symbols[i].file].push_back(i);
    }

    std::vector<std::string> direct_files(const std::string& folder) const {
        std::vector<std::string> out;
        for (const auto& f : files)
            if (parent_folder(f) == folder) out.push_back(f);
        return out;
    }

    std::vector<std::string> direct_subfolders(const std::string& folder) const {
        std::vector<std::string> out;
        for (const auto& d : folders)
            if (!d.empty() && parent_folder(d) == folder) out.push_back(d);
        return out;
    }
};

struct ScanOptions {
    std::vector<std::string> include_extensions = {".c",  ".h",  ".cpp", ".hpp", ".cc",
                                                   ".hh", ".cxx", ".hxx", ".md",  ".txt"};
    std::vector<std::string> exclude_globs;
};

// Deterministic repository walk: lexicographic folders and files, excluded
// paths absent, symbols left empty for the extraction step.
inline RepoModel scan_repository(const std::filesystem::path& root, const ScanOptions& opts = {}) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::path abs = fs::absolute(root, ec);
    if (ec || !fs::exists(abs)) throw RootNotFound("repository root not found: " + root.string());
    if (!fs::is_directory(abs)) throw RootNotFound("repository root is not a directory: " + root.string());

    RepoModel model;
    model.root = fs::canonical(abs);
    model.folders.insert("");

    fs::recursive_directory_iterator it(model.root, fs::directory_options::none, ec), end;
    if (ec) {
        if (ec == std::errc::permission_denied)
            throw PermissionDenied("cannot open repository root: " + model.root.string());
        throw RootNotFound("cannot scan repository root: " + ec.message());
    }
    for (; it != end; it.increment(ec)) {
        if (ec) throw PermissionDenied("scan failed: " + ec.message());
        const fs::directory_entry& entry = *it;
        std::string rel = normalize_rel(
            entry.path().lexically_relative(model.root).generic_string());
        if (entry.is_directory()) {
            if (matches_any_glob(opts.exclude_globs, rel)) {
                it.disable_recursion_pending();
                continue;
            }
            model.folders.insert(rel);
        } else if (entry.is_regular_file()) {
            if (matches_any_glob(opts.exclude_globs, rel)) continue;
            if (!opts.include_extensions.empty()) {
                std::string ext = entry.path().extension().string();
                if (std::find(opts.include_extensions.begin(), opts.include_extensions.end(),
                              ext) == opts.include_extensions.end())
                    continue;
            }
            model.files.insert(rel);
        }
    }
    return model;
}

inline bool is_c_like(const std::string& path) {
    static const std::vector<std::string> exts = {".c", ".h", ".cpp", ".hpp",
                                                  ".cc", ".hh", ".cxx", ".hxx"};
    for (const auto& e : exts)
        if (path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
            return true;
    return false;
}

} // namespace spectrace
