#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spectrace/errors.hpp"

namespace spectrace {

namespace fs = std::filesystem;

inline std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// temp-then-rename so readers never observe a partial file
inline void write_file_atomic(const fs::path& p, std::string_view content) {
    fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write file: " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) throw Error("short write: " + tmp.string());
    }
    fs::rename(tmp, p);
}

// Repo-relative normalization: forward slashes, no ".", no empty segments,
// no trailing separator. ".." is not resolved; scan never produces it.
inline std::string normalize_rel(std::string_view raw) {
    std::string s(raw);
    std::replace(s.begin(), s.end(), '\\', '/');
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i <= s.size()) {
        std::size_t j = s.find('/', i);
        if (j == std::string::npos) j = s.size();
        std::string seg = s.substr(i, j - i);
        if (!seg.empty() && seg != ".") parts.push_back(seg);
        i = j + 1;
    }
    std::string out;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (k) out += '/';
        out += parts[k];
    }
    return out;
}

inline std::string parent_folder(std::string_view rel_path) {
    auto pos = rel_path.rfind('/');
    return pos == std::string_view::npos ? std::string() : std::string(rel_path.substr(0, pos));
}

inline std::string base_name(std::string_view rel_path) {
    auto pos = rel_path.rfind('/');
    return pos == std::string_view::npos ? std::string(rel_path)
                                         : std::string(rel_path.substr(pos + 1));
}

// True when `ancestor` is a proper ancestor folder of `path` ("" is the
// repository root and an ancestor of every non-root path).
inline bool is_proper_ancestor(std::string_view ancestor, std::string_view path) {
    if (ancestor == path) return false;
    if (ancestor.empty()) return !path.empty();
    return path.size() > ancestor.size() && path.substr(0, ancestor.size()) == ancestor &&
           path[ancestor.size()] == '/';
}

// Glob with gitignore-like semantics: '*' and '?' stay inside one path
// segment, "**" crosses segments.
inline bool glob_match(std::string_view pat, std::string_view str) {
    if (pat.empty()) return str.empty();
    if (pat.substr(0, 2) == "**") {
        std::string_view rest = pat.substr(2);
        while (!rest.empty() && rest.front() == '/') rest = rest.substr(1);
        if (rest.empty()) return true;
        for (std::size_t i = 0; i <= str.size(); ++i) {
            if (i > 0 && str[i - 1] != '/') continue; // segment boundaries only
            if (glob_match(rest, str.substr(i))) return true;
        }
        return false;
    }
    if (pat.front() == '*') {
        for (std::size_t i = 0; i <= str.size(); ++i) {
            if (glob_match(pat.substr(1), str.substr(i))) return true;
            if (i < str.size() && str[i] == '/') break;
        }
        return false;
    }
    if (str.empty()) return false;
    if (pat.front() == '?') return str.front() != '/' && glob_match(pat.substr(1), str.substr(1));
    return pat.front() == str.front() && glob_match(pat.substr(1), str.substr(1));
}

inline bool matches_any_glob(const std::vector<std::string>& globs, std::string_view path) {
    for (const auto& g : globs) {
        if (glob_match(g, path)) return true;
        // allow directory patterns like "**/build/**" to hit the dir itself
        if (glob_match(g, std::string(path) + "/")) return true;
    }
    return false;
}

} // namespace spectrace
