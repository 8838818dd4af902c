#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "spectrace/repo_model.hpp"

namespace spectrace {

struct LexWarning {
    std::string file;
    int line = 0;
    std::string message;
};

namespace clex {

// Comments and the contents of string/char literals are blanked (newlines
// kept) so later passes never match inside them.
inline std::string strip_comments_and_strings(std::string_view src) {
    std::string out(src);
    enum class St { code, line_comment, block_comment, str, chr };
    St st = St::code;
    for (std::size_t i = 0; i < src.size(); ++i) {
        char c = src[i];
        char next = i + 1 < src.size() ? src[i + 1] : '\0';
        switch (st) {
            case St::code:
                if (c == '/' && next == '/') {
                    st = St::line_comment;
                    out[i] = ' ';
                } else if (c == '/' && next == '*') {
                    st = St::block_comment;
                    out[i] = ' ';
                } else if (c == '"') {
                    st = St::str;
                } else if (c == '\'') {
                    st = St::chr;
                }
                break;
            case St::line_comment:
                if (c == '\n' && (i == 0 || src[i - 1] != '\\')) st = St::code;
                else if (c != '\n') out[i] = ' ';
                break;
            case St::block_comment:
                if (c == '*' && next == '/') {
                    out[i] = ' ';
                    out[i + 1] = ' ';
                    ++i;
                    st = St::code;
                } else if (c != '\n') {
                    out[i] = ' ';
                }
                break;
            case St::str:
                if (c == '\\' && next != '\0') {
                    out[i] = ' ';
                    if (next != '\n') out[i + 1] = ' ';
                    ++i;
                } else if (c == '"') {
                    st = St::code;
                } else if (c != '\n') {
                    out[i] = ' ';
                }
                break;
            case St::chr:
                if (c == '\\' && next != '\0') {
                    out[i] = ' ';
                    if (next != '\n') out[i + 1] = ' ';
                    ++i;
                } else if (c == '\'') {
                    st = St::code;
                } else if (c != '\n') {
                    out[i] = ' ';
                }
                break;
        }
    }
    return out;
}

struct Tok {
    enum class Kind { ident, number, punct, str_lit } kind = Kind::punct;
    std::string text;
    int line = 1;
};

inline bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool ident_char(char c) {
    return ident_start(c) || (c >= '0' && c <= '9');
}

inline const std::unordered_set<std::string>& control_keywords() {
    static const std::unordered_set<std::string> kw = {
        "if", "else", "for", "while", "do", "switch", "return", "sizeof",
        "case", "goto", "break", "continue", "default", "catch"};
    return kw;
}

inline const std::unordered_set<std::string>& type_qualifiers() {
    static const std::unordered_set<std::string> kw = {
        "static", "extern", "inline", "const", "volatile", "register",
        "unsigned", "signed", "restrict", "constexpr", "noexcept"};
    return kw;
}

} // namespace clex

// Zero-dependency C/C++ symbol extractor used when no tags stream is
// supplied. Recognizes #define macros, struct/enum/typedef declarations
// (anonymous typedef'd aggregates are named by their alias and produce both
// the aggregate symbol and a typedef symbol), file-scope const initialized
// declarations, enumerators as constants, function definitions with
// brace-matched line ranges, and prototypes flagged as declarations.
inline std::vector<CodeSymbol> extract_symbols_builtin(const std::string& file_path,
                                                       std::string_view text,
                                                       std::vector<LexWarning>* warnings = nullptr) {
    using namespace clex;
    std::vector<CodeSymbol> out;
    auto warn = [&](int line, const std::string& msg) {
        if (warnings) warnings->push_back({file_path, line, msg});
    };

    std::string code = strip_comments_and_strings(text);

    // Preprocessor pass: emit macros, blank all directive lines (including
    // continuations) so the token pass sees balanced code only.
    std::vector<std::string> lines;
    {
        std::size_t start = 0;
        while (start <= code.size()) {
            std::size_t eol = code.find('\n', start);
            if (eol == std::string::npos) eol = code.size();
            lines.push_back(code.substr(start, eol - start));
            if (eol == code.size()) break;
            start = eol + 1;
        }
    }
    int total_lines = int(lines.size());
    for (int ln = 0; ln < total_lines; ++ln) {
        std::string_view l = lines[std::size_t(ln)];
        std::size_t i = 0;
        while (i < l.size() && (l[i] == ' ' || l[i] == '\t')) ++i;
        if (i >= l.size() || l[i] != '#') continue;
        int first = ln;
        // swallow continuations
        int last = ln;
        while (last < total_lines - 1 && !lines[std::size_t(last)].empty() &&
               lines[std::size_t(last)].back() == '\\')
            ++last;
        std::string directive;
        for (int k = first; k <= last; ++k) {
            directive += lines[std::size_t(k)];
            directive += '\n';
            lines[std::size_t(k)].assign(lines[std::size_t(k)].size(), ' ');
        }
        ln = last;
        std::size_t p = directive.find('#') + 1;
        while (p < directive.size() && (directive[p] == ' ' || directive[p] == '\t')) ++p;
        if (directive.compare(p, 6, "define") == 0) {
            p += 6;
            while (p < directive.size() && (directive[p] == ' ' || directive[p] == '\t')) ++p;
            std::size_t q = p;
            while (q < directive.size() && ident_char(directive[q])) ++q;
            if (q > p) {
                CodeSymbol sym;
                sym.name = directive.substr(p, q - p);
                sym.kind = SymbolKind::macro;
                sym.file = file_path;
                sym.line_start = first + 1;
                sym.line_end = last + 1;
                std::string sig = directive.substr(0, directive.find('\n'));
                while (!sig.empty() && (sig.back() == '\\' || sig.back() == ' ')) sig.pop_back();
                sym.signature = sig.substr(0, 160);
                out.push_back(std::move(sym));
            }
        }
    }

    // Token pass over the blanked source.
    std::vector<Tok> toks;
    {
        int line = 1;
        std::string flat;
        for (const auto& l : lines) {
            flat += l;
            flat += '\n';
        }
        for (std::size_t i = 0; i < flat.size();) {
            char c = flat[i];
            if (c == '\n') {
                ++line;
                ++i;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                ++i;
                continue;
            }
            if (ident_start(c)) {
                std::size_t j = i;
                while (j < flat.size() && ident_char(flat[j])) ++j;
                toks.push_back({Tok::Kind::ident, flat.substr(i, j - i), line});
                i = j;
            } else if (c >= '0' && c <= '9') {
                std::size_t j = i;
                while (j < flat.size() && (ident_char(flat[j]) || flat[j] == '.')) ++j;
                toks.push_back({Tok::Kind::number, flat.substr(i, j - i), line});
                i = j;
            } else if (c == '"' || c == '\'') {
                std::size_t j = i + 1;
                while (j < flat.size() && flat[j] != c) ++j;
                toks.push_back({Tok::Kind::str_lit, "\"\"", line});
                i = j < flat.size() ? j + 1 : j;
            } else {
                toks.push_back({Tok::Kind::punct, std::string(1, c), line});
                ++i;
            }
        }
    }

    std::size_t n = toks.size();
    auto is_p = [&](std::size_t i, char c) {
        return i < n && toks[i].kind == Tok::Kind::punct && toks[i].text[0] == c;
    };
    auto is_id = [&](std::size_t i) { return i < n && toks[i].kind == Tok::Kind::ident; };
    auto is_kw = [&](std::size_t i, std::string_view kw) {
        return is_id(i) && toks[i].text == kw;
    };

    // matching '}' for the '{' at index open; returns n when unbalanced
    auto match_brace = [&](std::size_t open) {
        int depth = 0;
        for (std::size_t i = open; i < n; ++i) {
            if (is_p(i, '{')) ++depth;
            else if (is_p(i, '}')) {
                --depth;
                if (depth == 0) return i;
            }
        }
        return n;
    };

    auto slice_text = [&](std::size_t from, std::size_t to) { // token range, 'to' exclusive
        std::string s;
        for (std::size_t i = from; i < to && i < n; ++i) {
            if (!s.empty() && (toks[i].kind != Tok::Kind::punct || toks[i].text[0] == '*'))
                s += ' ';
            s += toks[i].text;
            if (s.size() > 160) break;
        }
        return s.substr(0, 160);
    };

    auto emit = [&](std::string name, SymbolKind kind, int ls, int le, std::string sig,
                    bool decl = false, bool trunc = false) {
        CodeSymbol sym;
        sym.name = std::move(name);
        sym.kind = kind;
        sym.file = file_path;
        sym.line_start = ls;
        sym.line_end = le < ls ? ls : le;
        sym.signature = std::move(sig);
        sym.declaration = decl;
        sym.truncated = trunc;
        out.push_back(std::move(sym));
    };

    // Enumerator names sit right after '{' or ',' at enum-body depth 1.
    auto collect_enumerators = [&](std::size_t open, std::size_t close) {
        bool expect_name = true;
        int depth = 0;
        for (std::size_t i = open; i <= close && i < n; ++i) {
            if (is_p(i, '{')) {
                ++depth;
                expect_name = depth == 1;
                continue;
            }
            if (is_p(i, '}')) {
                --depth;
                continue;
            }
            if (depth != 1) continue;
            if (is_p(i, ',')) {
                expect_name = true;
                continue;
            }
            if (expect_name && is_id(i)) {
                emit(toks[i].text, SymbolKind::constant, toks[i].line, toks[i].line,
                     toks[i].text);
                expect_name = false;
            }
        }
    };

    std::size_t i = 0;
    int scope_depth = 0; // transparent braces (extern "C", namespace) not counted
    std::vector<bool> transparent_stack;

    while (i < n) {
        // scope bookkeeping
        if (is_p(i, '{')) {
            transparent_stack.push_back(false);
            ++scope_depth;
            ++i;
            continue;
        }
        if (is_p(i, '}')) {
            if (!transparent_stack.empty()) {
                if (!transparent_stack.back()) --scope_depth;
                transparent_stack.pop_back();
            }
            ++i;
            continue;
        }
        if (scope_depth > 0) {
            ++i;
            continue;
        }

        // extern "C" { ... }  and  namespace x { ... }  are transparent
        if (is_kw(i, "extern") && i + 1 < n && toks[i + 1].kind == Tok::Kind::str_lit) {
            if (is_p(i + 2, '{')) {
                transparent_stack.push_back(true);
                i += 3;
                continue;
            }
            ++i;
            continue;
        }
        if (is_kw(i, "namespace")) {
            std::size_t j = i + 1;
            while (is_id(j) || is_p(j, ':')) ++j;
            if (is_p(j, '{')) {
                transparent_stack.push_back(true);
                i = j + 1;
                continue;
            }
            i = j;
            continue;
        }

        if (is_kw(i, "typedef")) {
            // consume to the terminating ';' at relative depth 0
            std::size_t stmt_start = i;
            std::size_t j = i + 1;
            int depth = 0;
            std::size_t open = n, close = n;
            while (j < n) {
                if (is_p(j, '{')) {
                    if (depth == 0 && open == n) open = j;
                    ++depth;
                } else if (is_p(j, '}')) {
                    --depth;
                    if (depth == 0 && close == n) close = j;
                } else if (is_p(j, ';') && depth <= 0) {
                    break;
                }
                ++j;
            }
            bool unbalanced = j >= n;
            if (unbalanced) warn(toks[stmt_start].line, "typedef not terminated; closed at EOF");
            std::size_t semi = std::min(j, n - 1);

            // alias: "( * name )" for function pointers, else last identifier
            // before ';' (skipping array suffixes)
            std::string alias;
            int alias_line = toks[semi].line;
            for (std::size_t k = close == n ? stmt_start : close; k < semi; ++k) {
                if (is_p(k, '(') && is_p(k + 1, '*') && is_id(k + 2)) {
                    alias = toks[k + 2].text;
                    alias_line = toks[k + 2].line;
                    break;
                }
            }
            if (alias.empty()) {
                for (std::size_t k = semi; k-- > stmt_start;) {
                    if (is_p(k, ']')) {
                        while (k > stmt_start && !is_p(k, '[')) --k;
                        continue;
                    }
                    if (is_id(k)) {
                        alias = toks[k].text;
                        alias_line = toks[k].line;
                        break;
                    }
                }
            }

            // aggregate inside the typedef
            std::string tag;
            SymbolKind agg_kind = SymbolKind::struct_;
            bool has_agg = false, is_union = false;
            for (std::size_t k = stmt_start + 1; k < (open == n ? semi : open + 1); ++k) {
                if (is_kw(k, "struct") || is_kw(k, "enum") || is_kw(k, "union")) {
                    has_agg = true;
                    is_union = toks[k].text == "union";
                    agg_kind = toks[k].text == "enum" ? SymbolKind::enum_ : SymbolKind::struct_;
                    if (is_id(k + 1)) tag = toks[k + 1].text;
                    break;
                }
            }

            int ls = toks[stmt_start].line;
            int le = toks[semi].line;
            if (has_agg && open != n) { // definition with a body
                std::string agg_name = !tag.empty() ? tag : alias;
                if (!is_union && !agg_name.empty())
                    emit(agg_name, agg_kind, ls, le, slice_text(stmt_start, open), false,
                         unbalanced);
                if (agg_kind == SymbolKind::enum_ && close != n)
                    collect_enumerators(open, close);
            }
            if (!alias.empty())
                emit(alias, SymbolKind::typedef_, alias_line, le,
                     slice_text(stmt_start, std::min(semi + 1, n)), false, unbalanced);
            i = semi + 1;
            continue;
        }

        if (is_kw(i, "struct") || is_kw(i, "enum") || is_kw(i, "union")) {
            bool is_union = toks[i].text == "union";
            SymbolKind kind = toks[i].text == "enum" ? SymbolKind::enum_ : SymbolKind::struct_;
            std::size_t j = i + 1;
            std::string tag;
            if (is_id(j)) {
                tag = toks[j].text;
                ++j;
            }
            if (is_p(j, '{')) {
                std::size_t close = match_brace(j);
                bool unbalanced = close == n;
                if (unbalanced) {
                    warn(toks[i].line, "unbalanced braces; symbol closed at EOF");
                    close = n - 1;
                }
                if (!tag.empty() && !is_union)
                    emit(tag, kind, toks[i].line, toks[close].line, slice_text(i, j), false,
                         unbalanced);
                if (kind == SymbolKind::enum_) collect_enumerators(j, close);
                // skip trailing declarators to ';'
                std::size_t k = close + 1;
                while (k < n && !is_p(k, ';')) ++k;
                i = k + 1;
                continue;
            }
            // forward declaration or use; skip to ';' conservatively
            if (is_p(j, ';')) {
                i = j + 1;
                continue;
            }
            i = j;
            continue;
        }

        // Generic statement: scan forward to ';' or '{' at paren depth 0.
        if (is_id(i) || is_p(i, '*')) {
            std::size_t stmt_start = i;
            std::size_t j = i;
            int paren = 0;
            bool saw_eq = false;
            std::size_t eq_pos = n;
            while (j < n) {
                if (is_p(j, '(')) ++paren;
                else if (is_p(j, ')')) --paren;
                else if (is_p(j, '=') && paren == 0 && !saw_eq) {
                    saw_eq = true;
                    eq_pos = j;
                } else if (is_p(j, ';') && paren == 0) break;
                else if (is_p(j, '{') && paren == 0) break;
                ++j;
            }
            if (j >= n) break;

            if (is_p(j, '{') && !saw_eq) {
                // function definition: ... name ( args ) [quals] {
                std::size_t close_paren = n;
                int pd = 0;
                for (std::size_t k = j; k-- > stmt_start;) {
                    if (is_p(k, ')')) {
                        if (pd == 0) close_paren = k;
                        ++pd;
                    } else if (is_p(k, '(')) {
                        --pd;
                        if (pd == 0) break;
                    }
                }
                std::size_t open_paren = n;
                if (close_paren != n) {
                    int depth2 = 0;
                    for (std::size_t k = close_paren + 1; k-- > stmt_start;) {
                        if (is_p(k, ')')) ++depth2;
                        else if (is_p(k, '(')) {
                            --depth2;
                            if (depth2 == 0) {
                                open_paren = k;
                                break;
                            }
                        }
                    }
                }
                if (open_paren != n && open_paren > stmt_start && is_id(open_paren - 1) &&
                    !control_keywords().count(toks[open_paren - 1].text) &&
                    !type_qualifiers().count(toks[open_paren - 1].text)) {
                    std::size_t name_tok = open_paren - 1;
                    std::size_t body_close = match_brace(j);
                    bool unbalanced = body_close == n;
                    if (unbalanced) {
                        warn(toks[name_tok].line, "unbalanced braces; function closed at EOF");
                        body_close = n - 1;
                    }
                    emit(toks[name_tok].text, SymbolKind::function, toks[name_tok].line,
                         toks[body_close].line, slice_text(stmt_start, j), false, unbalanced);
                    i = body_close + 1;
                    continue;
                }
                // not a function head; skip the brace block
                std::size_t body_close = match_brace(j);
                i = body_close == n ? n : body_close + 1;
                continue;
            }

            if (is_p(j, ';')) {
                bool has_const = false;
                for (std::size_t k = stmt_start; k < (saw_eq ? eq_pos : j); ++k)
                    if (is_kw(k, "const")) has_const = true;

                if (has_const && saw_eq) {
                    // file-scope const initialized declaration
                    std::size_t k = eq_pos;
                    std::string name;
                    int line = toks[stmt_start].line;
                    for (std::size_t m = k; m-- > stmt_start;) {
                        if (is_p(m, ']')) {
                            while (m > stmt_start && !is_p(m, '[')) --m;
                            continue;
                        }
                        if (is_id(m)) {
                            name = toks[m].text;
                            line = toks[m].line;
                            break;
                        }
                    }
                    if (!name.empty())
                        emit(name, SymbolKind::constant, line, toks[j].line,
                             slice_text(stmt_start, eq_pos));
                } else if (!saw_eq) {
                    // prototype: name '(' ... ')' [quals] ';' with a preceding
                    // type token (rules out file-scope macro invocations)
                    std::size_t open_paren = n;
                    for (std::size_t k = stmt_start; k < j; ++k) {
                        if (is_p(k, '(')) {
                            open_paren = k;
                            break;
                        }
                    }
                    if (open_paren != n && open_paren > stmt_start + 1 && is_id(open_paren - 1) &&
                        !control_keywords().count(toks[open_paren - 1].text)) {
                        std::size_t name_tok = open_paren - 1;
                        emit(toks[name_tok].text, SymbolKind::function, toks[name_tok].line,
                             toks[j].line, slice_text(stmt_start, j), true);
                    }
                }
                i = j + 1;
                continue;
            }
            i = j + 1;
            continue;
        }

        ++i;
    }

    return out;
}

// Builtin extraction across every C-like file of the model.
inline std::vector<LexWarning> extract_all_builtin(RepoModel& model) {
    std::vector<LexWarning> warnings;
    for (const auto& f : model.files) {
        if (!is_c_like(f)) continue;
        std::string text = read_text_file(model.root / f);
        for (auto& sym : extract_symbols_builtin(f, text, &warnings)) model.add_symbol(std::move(sym));
    }
    model.sort_symbols();
    return warnings;
}

} // namespace spectrace
