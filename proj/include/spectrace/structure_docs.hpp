#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectrace/fsutil.hpp"
#include "spectrace/hash.hpp"
#include "spectrace/provider.hpp"
#include "spectrace/repo_model.hpp"

namespace spectrace {

struct StructureDoc {
    std::string scope;  // "repository" | "folder" | "file"
    std::string target; // repo-relative path, "" for the repository
    std::string content;
    std::string cache_key;
};

/// Cached structure docs live under <out>/structures with a manifest mapping
/// doc path to cache key. get_or_generate gives at-most-one generation per
/// (path, key): concurrent requesters wait on the winner's future. A corrupt
/// manifest or missing doc file simply regenerates.
class StructureCache {
  public:
    explicit StructureCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        load_manifest();
    }

    const std::filesystem::path& dir() const { return dir_; }

    std::string get_or_generate(const std::string& rel_path, const std::string& cache_key,
                                const std::function<std::string()>& generate,
                                bool* was_cached = nullptr) {
        std::string slot = rel_path + "\x1f" + cache_key;
        std::shared_future<std::string> fut;
        bool winner = false;
        {
            std::lock_guard<std::mutex> lock(m_);
            auto mit = manifest_.find(rel_path);
            if (mit != manifest_.end() && mit->second == cache_key) {
                auto p = dir_ / rel_path;
                std::error_code ec;
                if (std::filesystem::exists(p, ec)) {
                    if (was_cached) *was_cached = true;
                    return read_text_file(p);
                }
                manifest_.erase(mit); // doc vanished; fall through to regenerate
            }
            auto iit = inflight_.find(slot);
            if (iit != inflight_.end()) {
                fut = iit->second;
            } else {
                std::promise<std::string> prom;
                fut = prom.get_future().share();
                inflight_[slot] = fut;
                pending_[slot] = std::move(prom);
                winner = true;
            }
        }
        if (was_cached) *was_cached = false;
        if (!winner) return fut.get();

        std::string content;
        try {
            content = generate();
        } catch (...) {
            std::lock_guard<std::mutex> lock(m_);
            pending_[slot].set_exception(std::current_exception());
            pending_.erase(slot);
            inflight_.erase(slot);
            throw;
        }
        write_file_atomic(dir_ / rel_path, content);
        {
            std::lock_guard<std::mutex> lock(m_);
            manifest_[rel_path] = cache_key;
            save_manifest_locked();
            pending_[slot].set_value(content);
            pending_.erase(slot);
            inflight_.erase(slot);
        }
        return content;
    }

    bool manifest_was_corrupt() const { return manifest_corrupt_; }

  private:
    void load_manifest() {
        auto p = dir_ / "cache_manifest.json";
        std::error_code ec;
        if (!std::filesystem::exists(p, ec)) return;
        nlohmann::json j = nlohmann::json::parse(read_text_file(p), nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            manifest_corrupt_ = true; // regenerate everything
            return;
        }
        for (auto& [k, v] : j.items())
            if (v.is_string()) manifest_[k] = v.get<std::string>();
    }

    void save_manifest_locked() {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, v] : manifest_) j[k] = v;
        write_file_atomic(dir_ / "cache_manifest.json", j.dump(2) + "\n");
    }

    std::filesystem::path dir_;
    std::mutex m_;
    std::map<std::string, std::string> manifest_;
    std::map<std::string, std::shared_future<std::string>> inflight_;
    std::map<std::string, std::promise<std::string>> pending_;
    bool manifest_corrupt_ = false;
};

// --- content fingerprints (64-bit FNV-1a over file bytes, combined pairwise
// for folder and repository scope) ---

inline std::uint64_t file_fingerprint(const RepoModel& model, const std::string& rel) {
    return fnv1a64(read_text_file(model.root / rel));
}

inline std::uint64_t folder_fingerprint(const RepoModel& model, const std::string& folder) {
    std::uint64_t h = fnv1a64(folder);
    for (const auto& f : model.direct_files(folder)) {
        h = fnv_combine(h, fnv1a64(f));
        h = fnv_combine(h, file_fingerprint(model, f));
    }
    for (const auto& d : model.direct_subfolders(folder)) h = fnv_combine(h, fnv1a64(d));
    return h;
}

inline std::uint64_t repo_fingerprint(const RepoModel& model) {
    std::uint64_t h = kFnvOffset;
    for (const auto& d : model.folders) h = fnv_combine(h, fnv1a64(d));
    for (const auto& f : model.files) {
        h = fnv_combine(h, fnv1a64(f));
        h = fnv_combine(h, file_fingerprint(model, f));
    }
    return h;
}

// --- doc file naming ---

inline std::string repo_doc_rel_path() {
    return "repository_structure.md";
}

inline std::string folder_doc_rel_path(const std::string& folder) {
    return folder.empty() ? "folder_structure.md" : folder + "/folder_structure.md";
}

// {stem}_{ext}_structure.md next to the folder's other docs
inline std::string file_doc_rel_path(const std::string& file) {
    std::string dir = parent_folder(file);
    std::string base = base_name(file);
    std::string stem = base, ext;
    auto dot = base.rfind('.');
    if (dot != std::string::npos && dot > 0) {
        stem = base.substr(0, dot);
        ext = base.substr(dot + 1);
    }
    std::string name = ext.empty() ? stem + "_structure.md" : stem + "_" + ext + "_structure.md";
    return dir.empty() ? name : dir + "/" + name;
}

// Entry lines are "- <id>: <description>"; the repository root renders as ".".
struct StructureEntry {
    std::string id;
    std::string description;
};

inline std::vector<StructureEntry> parse_structure_entries(const std::string& content) {
    std::vector<StructureEntry> out;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string_view line(content.data() + pos, eol - pos);
        if (line.substr(0, 2) == "- ") {
            auto sep = line.find(": ");
            if (sep != std::string_view::npos) {
                std::string id(line.substr(2, sep - 2));
                if (id == ".") id = "";
                out.push_back({id, std::string(line.substr(sep + 2))});
            }
        }
        pos = eol + 1;
    }
    return out;
}

namespace detail {

// Batched describe calls; responses are "<id>: <desc>" lines.
inline std::map<std::string, std::string> describe_items(Provider& provider,
                                                         const std::string& scope,
                                                         const std::vector<CandidateDoc>& items,
                                                         std::size_t batch = 40) {
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < items.size(); i += batch) {
        std::vector<CandidateDoc> slice(items.begin() + long(i),
                                        items.begin() + long(std::min(items.size(), i + batch)));
        ProviderRequest req = make_describe_request(scope, slice);
        ProviderResponse resp = provider.complete(req, Phase::structure_gen);
        std::size_t pos = 0;
        while (pos < resp.text.size()) {
            std::size_t eol = resp.text.find('\n', pos);
            if (eol == std::string::npos) eol = resp.text.size();
            std::string_view line(resp.text.data() + pos, eol - pos);
            auto sep = line.find(": ");
            if (sep != std::string_view::npos)
                out[std::string(line.substr(0, sep))] = std::string(line.substr(sep + 2));
            pos = eol + 1;
        }
        for (const auto& it : slice)
            if (!out.count(it.id)) out[it.id] = "(no description)";
    }
    return out;
}

} // namespace detail

/// Repository structure doc: one bullet per folder with a provider-written
/// one-line description (folder name plus sampled file and subfolder names as
/// context). Served from cache while no covered file changed.
inline StructureDoc generate_repo_structure_doc(const RepoModel& model, Provider& provider,
                                                StructureCache& cache, bool* was_cached = nullptr) {
    std::string key = to_hex(repo_fingerprint(model));
    std::string content = cache.get_or_generate(
        repo_doc_rel_path(), key,
        [&]() {
            std::vector<CandidateDoc> items;
            for (const auto& folder : model.folders) {
                std::string ctx;
                auto files = model.direct_files(folder);
                auto subs = model.direct_subfolders(folder);
                ctx += "files:";
                int shown = 0;
                for (const auto& f : files) {
                    if (shown++ == 8) break;
                    ctx += " " + base_name(f);
                }
                if (files.empty()) ctx += " (none)";
                if (!subs.empty()) {
                    ctx += " subfolders:";
                    shown = 0;
                    for (const auto& d : subs) {
                        if (shown++ == 4) break;
                        ctx += " " + base_name(d);
                    }
                }
                items.push_back({folder.empty() ? "." : folder, ctx});
            }
            auto descs = detail::describe_items(provider, "folder", items);
            std::string md = "# Repository structure\n\n";
            for (const auto& it : items)
                md += "- " + it.id + ": " + descs[it.id] + "\n";
            return md;
        },
        was_cached);
    return {"repository", "", content, key};
}

/// Folder doc (<out>/structures/<folder>/folder_structure.md): one entry per
/// direct file, described from its name and extracted symbol names.
inline StructureDoc generate_folder_structure_doc(const std::string& folder,
                                                  const RepoModel& model, Provider& provider,
                                                  StructureCache& cache,
                                                  bool* was_cached = nullptr) {
    std::string key = to_hex(folder_fingerprint(model, folder));
    std::string content = cache.get_or_generate(
        folder_doc_rel_path(folder), key,
        [&]() {
            std::vector<CandidateDoc> items;
            for (const auto& f : model.direct_files(folder)) {
                std::string ctx = "symbols:";
                int shown = 0;
                std::size_t decls = 0;
                auto it = model.symbol_by_file.find(f);
                if (it != model.symbol_by_file.end()) {
                    for (std::size_t idx : it->second) {
                        const auto& sym = model.symbols[idx];
                        if (sym.declaration) {
                            ++decls;
                            continue;
                        }
                        if (shown++ < 10)
                            ctx += " " + sym.name + " (" + to_string(sym.kind) + ")";
                    }
                }
                if (shown == 0) ctx += " (none)";
                if (decls > 0) ctx += " declarations: " + std::to_string(decls);
                items.push_back({f, ctx});
            }
            std::string md = "# Folder: " + (folder.empty() ? std::string(".") : folder) + "\n\n";
            if (!items.empty()) {
                auto descs = detail::describe_items(provider, "file", items);
                for (const auto& it : items) md += "- " + it.id + ": " + descs[it.id] + "\n";
            }
            return md;
        },
        was_cached);
    return {"folder", folder, content, key};
}

/// File doc ({stem}_{ext}_structure.md): compact per-symbol summary — name,
/// kind, line range, one-line description. Declarations are summarized as a
/// count so headers stay lightweight.
inline StructureDoc generate_file_structure_doc(const std::string& file, const RepoModel& model,
                                                Provider& provider, StructureCache& cache,
                                                bool* was_cached = nullptr) {
    std::string key = to_hex(file_fingerprint(model, file));
    std::string content = cache.get_or_generate(
        file_doc_rel_path(file), key,
        [&]() {
            std::vector<CandidateDoc> items;
            std::vector<const CodeSymbol*> defs;
            std::size_t decls = 0;
            std::set<std::string> seen_names;
            auto it = model.symbol_by_file.find(file);
            if (it != model.symbol_by_file.end()) {
                for (std::size_t idx : it->second) {
                    const auto& sym = model.symbols[idx];
                    if (sym.declaration) {
                        ++decls;
                        continue;
                    }
                    defs.push_back(&sym);
                    // keyed by name, not path, so descriptions carry symbol
                    // vocabulary only; paths were already judged at the file
                    // stage
                    if (seen_names.insert(sym.name).second)
                        items.push_back({sym.name, std::string(to_string(sym.kind)) + " " +
                                                       sym.name + " " + sym.signature});
                }
            }
            std::string md = "# File: " + file + "\n\n";
            if (defs.empty()) {
                md += "No symbols.\n";
            } else {
                auto descs = detail::describe_items(provider, "symbol", items);
                for (const auto* sym : defs) {
                    md += "- " + sym->name + " (" + to_string(sym->kind) + ", lines " +
                          std::to_string(sym->line_start) + "-" + std::to_string(sym->line_end) +
                          "): " + descs[sym->name] + "\n";
                }
            }
            if (decls > 0) md += "\nDeclarations: " + std::to_string(decls) + "\n";
            return md;
        },
        was_cached);
    return {"file", file, content, key};
}

} // namespace spectrace
