#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "spectrace/errors.hpp"
#include "spectrace/hash.hpp"
#include "spectrace/text.hpp"

namespace spectrace {

enum class Phase {
    structure_gen,
    folder_discovery,
    file_discovery,
    symbol_discovery,
    validation
};

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::structure_gen: return "structure_gen";
        case Phase::folder_discovery: return "folder_discovery";
        case Phase::file_discovery: return "file_discovery";
        case Phase::symbol_discovery: return "symbol_discovery";
        case Phase::validation: return "validation";
    }
    return "structure_gen";
}

struct ProviderRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_output_tokens = 2048;
};

struct ProviderResponse {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    bool estimated = false; // counts derived from ceil(chars/4)
};

inline std::string request_fingerprint(const ProviderRequest& r) {
    std::uint64_t h = fnv1a64(r.system_prompt);
    h = fnv1a64(r.user_prompt, h);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "|t=%.6f|m=%d", r.temperature, r.max_output_tokens);
    h = fnv1a64(buf, h);
    return to_hex(h);
}

/// Per-phase token accounting; totals always equal the sum over phases and
/// over individual calls.
class TokenLedger {
  public:
    struct PhaseTotals {
        long prompt_tokens = 0;
        long completion_tokens = 0;
        long calls = 0;
    };

    void record(Phase phase, long prompt, long completion, bool estimated) {
        std::lock_guard<std::mutex> lock(m_);
        auto& t = phases_[std::size_t(phase)];
        t.prompt_tokens += prompt;
        t.completion_tokens += completion;
        t.calls += 1;
        any_estimated_ = any_estimated_ || estimated;
    }

    PhaseTotals phase(Phase p) const {
        std::lock_guard<std::mutex> lock(m_);
        return phases_[std::size_t(p)];
    }

    long total_tokens() const {
        std::lock_guard<std::mutex> lock(m_);
        long t = 0;
        for (const auto& p : phases_) t += p.prompt_tokens + p.completion_tokens;
        return t;
    }

    long total_calls() const {
        std::lock_guard<std::mutex> lock(m_);
        long c = 0;
        for (const auto& p : phases_) c += p.calls;
        return c;
    }

    bool any_estimated() const {
        std::lock_guard<std::mutex> lock(m_);
        return any_estimated_;
    }

    nlohmann::json to_json() const {
        std::lock_guard<std::mutex> lock(m_);
        nlohmann::json by_phase = nlohmann::json::object();
        long total = 0;
        for (int i = 0; i < 5; ++i) {
            const auto& t = phases_[std::size_t(i)];
            by_phase[to_string(Phase(i))] = {{"prompt_tokens", t.prompt_tokens},
                                             {"completion_tokens", t.completion_tokens},
                                             {"calls", t.calls}};
            total += t.prompt_tokens + t.completion_tokens;
        }
        return {{"by_phase", by_phase}, {"total_tokens", total}, {"estimated", any_estimated_}};
    }

  private:
    mutable std::mutex m_;
    std::array<PhaseTotals, 5> phases_{};
    bool any_estimated_ = false;
};

/// Appends request/response pairs as JSON lines; replays feed from the same
/// file for bit-exact offline reruns.
class TranscriptRecorder {
  public:
    explicit TranscriptRecorder(const std::string& path) : out_(path, std::ios::app) {
        if (!out_) throw Error("cannot open transcript for writing: " + path);
    }

    void append(Phase phase, const ProviderRequest& req, const ProviderResponse& resp) {
        nlohmann::json j = {
            {"phase", to_string(phase)},
            {"fingerprint", request_fingerprint(req)},
            {"request",
             {{"system_prompt", req.system_prompt},
              {"user_prompt", req.user_prompt},
              {"temperature", req.temperature},
              {"max_output_tokens", req.max_output_tokens}}},
            {"response",
             {{"text", resp.text},
              {"prompt_tokens", resp.prompt_tokens},
              {"completion_tokens", resp.completion_tokens},
              {"estimated", resp.estimated}}}};
        std::lock_guard<std::mutex> lock(m_);
        out_ << j.dump() << '\n';
        out_.flush();
    }

  private:
    std::mutex m_;
    std::ofstream out_;
};

namespace detail {

class InflightLimiter {
  public:
    explicit InflightLimiter(int limit) : limit_(limit < 1 ? 1 : limit) {}
    void acquire() {
        std::unique_lock<std::mutex> lock(m_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }
    void release() {
        {
            std::lock_guard<std::mutex> lock(m_);
            --active_;
        }
        cv_.notify_one();
    }

  private:
    std::mutex m_;
    std::condition_variable cv_;
    int limit_;
    int active_ = 0;
};

} // namespace detail

/// Uniform semantic-judgment surface. complete() handles the in-flight
/// limit, the token ledger and optional transcript recording; backends
/// implement do_complete().
class Provider {
  public:
    explicit Provider(TokenLedger& ledger, int max_in_flight = 4)
        : ledger_(ledger), limiter_(max_in_flight) {}
    virtual ~Provider() = default;

    void set_transcript_recorder(TranscriptRecorder* rec) { recorder_ = rec; }
    TokenLedger& ledger() { return ledger_; }

    ProviderResponse complete(const ProviderRequest& req, Phase phase) {
        if (req.system_prompt.empty() || req.user_prompt.empty())
            throw ProviderFailure("provider request prompts must be non-empty");
        if (req.temperature < 0.0 || req.temperature > 2.0)
            throw ProviderFailure("temperature out of range [0,2]");
        limiter_.acquire();
        ProviderResponse resp;
        try {
            resp = do_complete(req);
        } catch (...) {
            limiter_.release();
            throw;
        }
        limiter_.release();
        if (resp.prompt_tokens <= 0 && resp.completion_tokens <= 0) {
            resp.prompt_tokens = estimate_tokens(req.system_prompt) +
                                 estimate_tokens(req.user_prompt);
            resp.completion_tokens = estimate_tokens(resp.text);
            resp.estimated = true;
        }
        ledger_.record(phase, resp.prompt_tokens, resp.completion_tokens, resp.estimated);
        if (recorder_) recorder_->append(phase, req, resp);
        return resp;
    }

  protected:
    virtual ProviderResponse do_complete(const ProviderRequest& req) = 0;

  private:
    TokenLedger& ledger_;
    detail::InflightLimiter limiter_;
    TranscriptRecorder* recorder_ = nullptr;
};

// ---------------------------------------------------------------------------
// Request payload protocol
//
// Requests carry a machine-readable JSON payload after a sentinel line so the
// lexical oracle can answer the same prompts an HTTP model sees. Responses
// follow fixed JSON contracts parsed leniently (surrounding prose and
// markdown fences tolerated).
// ---------------------------------------------------------------------------

inline constexpr const char* kPayloadSentinel = "===PAYLOAD===";

inline std::optional<nlohmann::json> extract_payload(const std::string& user_prompt) {
    auto pos = user_prompt.rfind(kPayloadSentinel);
    if (pos == std::string::npos) return std::nullopt;
    pos = user_prompt.find('\n', pos);
    if (pos == std::string::npos) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(user_prompt.substr(pos + 1), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

// First balanced JSON value starting at any '['/'{' after fences are removed.
inline std::optional<nlohmann::json> parse_json_lenient(const std::string& text, char open) {
    std::string s = text;
    // strip markdown fences
    std::size_t f;
    while ((f = s.find("```")) != std::string::npos) {
        std::size_t eol = s.find('\n', f);
        s.erase(f, eol == std::string::npos ? std::string::npos : eol - f + 1);
    }
    char close = open == '[' ? ']' : '}';
    std::size_t start = s.find(open);
    while (start != std::string::npos) {
        int depth = 0;
        bool in_str = false;
        for (std::size_t i = start; i < s.size(); ++i) {
            char c = s[i];
            if (in_str) {
                if (c == '\\') ++i;
                else if (c == '"') in_str = false;
                continue;
            }
            if (c == '"') in_str = true;
            else if (c == open) ++depth;
            else if (c == close) {
                --depth;
                if (depth == 0) {
                    nlohmann::json j =
                        nlohmann::json::parse(s.substr(start, i - start + 1), nullptr, false);
                    if (!j.is_discarded()) return j;
                    break;
                }
            }
        }
        start = s.find(open, start + 1);
    }
    return std::nullopt;
}

struct SectionView {
    std::string id;
    std::string title;
    std::vector<std::string> terms;
    std::string excerpt;
};

struct CandidateDoc {
    std::string id;
    std::string description;
};

struct RelevanceJudgment {
    std::string candidate_id;
    double score = 0.0;
    double confidence = 0.0;
    std::string rationale;
};

struct SymbolCandidate {
    std::string id;
    std::string name;
    std::string kind;
    std::string file;
    std::string description;
    double score = 0.0;
};

struct ContextEntry {
    std::string section_id;
    std::string status;
    std::vector<std::string> top_symbols;
};

struct ValidationOutcome {
    std::string status; // one of the four implementation statuses
    std::vector<std::pair<std::string, double>> keep; // (symbol id, confidence)
    std::string gap_notes;
};

inline nlohmann::json section_payload(const SectionView& s) {
    return {{"id", s.id}, {"title", s.title}, {"terms", s.terms}, {"excerpt", s.excerpt}};
}

inline ProviderRequest make_describe_request(const std::string& scope,
                                             const std::vector<CandidateDoc>& items) {
    nlohmann::json payload = {{"task", "describe"}, {"scope", scope}};
    payload["items"] = nlohmann::json::array();
    for (const auto& it : items)
        payload["items"].push_back({{"id", it.id}, {"context", it.description}});
    ProviderRequest req;
    req.system_prompt =
        "You document code repositories. For every item respond with exactly one line "
        "in the format '<id>: <one-line description>'. No other output.";
    req.user_prompt = "Describe each " + scope +
                      " listed in the payload, using its context.\n" + kPayloadSentinel + "\n" +
                      payload.dump();
    return req;
}

inline ProviderRequest make_judge_request(const SectionView& section,
                                          const std::vector<CandidateDoc>& candidates,
                                          const std::string& stage) {
    nlohmann::json payload = {{"task", "judge"}, {"stage", stage},
                              {"section", section_payload(section)}};
    payload["candidates"] = nlohmann::json::array();
    for (const auto& c : candidates)
        payload["candidates"].push_back({{"id", c.id}, {"description", c.description}});
    ProviderRequest req;
    req.system_prompt =
        "You judge how relevant repository " + stage +
        " candidates are to a specification section. Respond with a strict JSON array "
        "[{\"id\": string, \"score\": number 0..1, \"confidence\": number 0..1, "
        "\"rationale\": string}] covering the candidates. No other output.";
    req.user_prompt = "Rate each candidate's relevance to the section in the payload.\n" +
                      std::string(kPayloadSentinel) + "\n" + payload.dump();
    return req;
}

inline ProviderRequest make_validate_request(const SectionView& section,
                                             const std::vector<SymbolCandidate>& symbols,
                                             const std::vector<ContextEntry>& context) {
    nlohmann::json payload = {{"task", "validate"}, {"section", section_payload(section)}};
    payload["context"] = nlohmann::json::array();
    for (const auto& c : context)
        payload["context"].push_back(
            {{"section_id", c.section_id}, {"status", c.status}, {"top_symbols", c.top_symbols}});
    payload["symbols"] = nlohmann::json::array();
    for (const auto& s : symbols)
        payload["symbols"].push_back({{"id", s.id},
                                      {"name", s.name},
                                      {"kind", s.kind},
                                      {"file", s.file},
                                      {"description", s.description},
                                      {"score", s.score}});
    ProviderRequest req;
    req.system_prompt =
        "You validate a specification-to-code mapping. Decide which candidate symbols truly "
        "implement the section, assign the implementation status, and name the gaps. Respond "
        "with a strict JSON object {\"status\": \"Implemented\"|\"Partially_Implemented\"|"
        "\"Not_Implemented\"|\"Not_Applicable\", \"keep\": [{\"id\": string, \"confidence\": "
        "number 0..1}], \"gap_notes\": string}. No other output.";
    req.user_prompt = "Validate the mapping described in the payload. Prior sections are given "
                      "as context.\n" +
                      std::string(kPayloadSentinel) + "\n" + payload.dump();
    return req;
}

// ---------------------------------------------------------------------------
// Deterministic lexical oracle
// ---------------------------------------------------------------------------

/// Jaccard relevance of each candidate description against the section's
/// query terms, rescaled so the best candidate scores 1.0. Deterministic
/// across runs and processes.
inline std::vector<RelevanceJudgment> oracle_judge(const SectionView& section,
                                                   const std::vector<CandidateDoc>& candidates) {
    std::string joined;
    for (const auto& t : section.terms) {
        joined += t;
        joined += ' ';
    }
    auto qset = token_set(joined);
    std::vector<RelevanceJudgment> out;
    double max_raw = 0.0;
    std::vector<double> raw(candidates.size(), 0.0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        raw[i] = jaccard(qset, token_set(candidates[i].description));
        max_raw = std::max(max_raw, raw[i]);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double score = max_raw > 0.0 ? raw[i] / max_raw : 0.0;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "jaccard=%.6f", raw[i]);
        out.push_back({candidates[i].id, score, score, buf});
    }
    return out;
}

/// Offline stand-in for an LLM backend: answers the payload protocol with
/// deterministic lexical judgments.
class OracleProvider : public Provider {
  public:
    using Provider::Provider;

    // Validation keep/status thresholds (normalized scores).
    static constexpr double kKeepThreshold = 0.5;
    static constexpr double kImplementedMeanThreshold = 0.7;

  protected:
    ProviderResponse do_complete(const ProviderRequest& req) override {
        auto payload = extract_payload(req.user_prompt);
        ProviderResponse resp;
        if (!payload) {
            resp.text = "OK";
            return resp;
        }
        const std::string task = payload->value("task", "");
        if (task == "describe") resp.text = answer_describe(*payload);
        else if (task == "judge") resp.text = answer_judge(*payload);
        else if (task == "validate") resp.text = answer_validate(*payload);
        else resp.text = "{}";
        return resp;
    }

  private:
    static SectionView section_from(const nlohmann::json& j) {
        SectionView s;
        s.id = j.value("id", "");
        s.title = j.value("title", "");
        s.excerpt = j.value("excerpt", "");
        if (j.contains("terms"))
            for (const auto& t : j["terms"]) s.terms.push_back(t.get<std::string>());
        return s;
    }

    static std::string answer_describe(const nlohmann::json& payload) {
        std::string out;
        for (const auto& item : payload["items"]) {
            std::string id = item.value("id", "");
            out += id + ": " + id + " " + item.value("context", "") + "\n";
        }
        return out;
    }

    static std::string answer_judge(const nlohmann::json& payload) {
        SectionView s = section_from(payload["section"]);
        std::vector<CandidateDoc> cands;
        for (const auto& c : payload["candidates"])
            cands.push_back({c.value("id", ""), c.value("description", "")});
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& j : oracle_judge(s, cands))
            arr.push_back({{"id", j.candidate_id},
                           {"score", j.score},
                           {"confidence", j.confidence},
                           {"rationale", j.rationale}});
        return arr.dump();
    }

    std::string answer_validate(const nlohmann::json& payload) const {
        SectionView s = section_from(payload["section"]);
        std::vector<CandidateDoc> cands;
        for (const auto& c : payload["symbols"])
            cands.push_back({c.value("id", ""), c.value("description", "")});

        nlohmann::json keep = nlohmann::json::array();
        double sum = 0.0;
        std::size_t kept = 0;
        std::vector<RelevanceJudgment> judged =
            cands.empty() ? std::vector<RelevanceJudgment>{} : oracle_judge(s, cands);
        std::set<std::string> covered;
        for (const auto& j : judged) {
            if (j.score > kKeepThreshold) {
                keep.push_back({{"id", j.candidate_id}, {"confidence", j.confidence}});
                sum += j.confidence;
                ++kept;
                for (const auto& c : cands)
                    if (c.id == j.candidate_id)
                        for (const auto& t : token_set(c.description)) covered.insert(t);
            }
        }

        std::string status;
        if (kept == 0) {
            status = has_normative_language(s.excerpt) ? "Not_Implemented" : "Not_Applicable";
        } else {
            status = (sum / double(kept)) >= kImplementedMeanThreshold ? "Implemented"
                                                                       : "Partially_Implemented";
        }

        std::string gaps;
        if (kept == 0) {
            gaps = status == "Not_Implemented" ? "no matching symbols found for the stated requirements"
                                               : "";
        } else {
            std::string missing;
            for (const auto& t : s.terms) {
                bool hit = false;
                for (const auto& tok : token_set(t))
                    if (covered.count(tok)) hit = true;
                if (!hit) missing += (missing.empty() ? "" : ", ") + t;
            }
            if (!missing.empty()) gaps = "uncovered terms: " + missing;
        }
        nlohmann::json obj = {{"status", status}, {"keep", keep}, {"gap_notes", gaps}};
        return obj.dump();
    }
};

// ---------------------------------------------------------------------------
// Transcript replay
// ---------------------------------------------------------------------------

/// Serves recorded responses keyed by request fingerprint; identical repeated
/// requests are replayed FIFO and the last response is reused if a run issues
/// more repeats than were recorded.
class ReplayProvider : public Provider {
  public:
    ReplayProvider(TokenLedger& ledger, const std::string& transcript_path, int max_in_flight = 4)
        : Provider(ledger, max_in_flight) {
        std::ifstream in(transcript_path);
        if (!in) throw ProviderFailure("cannot open transcript: " + transcript_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;
            ProviderResponse r;
            r.text = j["response"].value("text", "");
            r.prompt_tokens = j["response"].value("prompt_tokens", 0l);
            r.completion_tokens = j["response"].value("completion_tokens", 0l);
            r.estimated = j["response"].value("estimated", false);
            by_fingerprint_[j.value("fingerprint", "")].push_back(std::move(r));
        }
    }

  protected:
    ProviderResponse do_complete(const ProviderRequest& req) override {
        std::string fp = request_fingerprint(req);
        std::lock_guard<std::mutex> lock(m_);
        auto it = by_fingerprint_.find(fp);
        if (it == by_fingerprint_.end() || it->second.empty())
            throw ProviderFailure("no recorded response for request " + fp);
        auto& q = it->second;
        std::size_t idx = next_[fp];
        if (idx >= q.size()) idx = q.size() - 1; // reuse last for extra repeats
        else next_[fp] = idx + 1;
        return q[idx];
    }

  private:
    std::mutex m_;
    std::map<std::string, std::vector<ProviderResponse>> by_fingerprint_;
    std::map<std::string, std::size_t> next_;
};

// ---------------------------------------------------------------------------
// Module-level judgment operations
// ---------------------------------------------------------------------------

struct JudgeWarnings {
    std::size_t unknown_ids = 0;
    std::size_t missing_candidates = 0;
    std::size_t reprompts = 0;
};

/// One relevance call: strict-JSON contract with a single reprompt, unknown
/// ids dropped, missing candidates scored 0. Judgments come back in input
/// candidate order.
inline std::vector<RelevanceJudgment> judge_relevance(const SectionView& section,
                                                      const std::vector<CandidateDoc>& candidates,
                                                      Phase phase, Provider& provider,
                                                      const std::string& stage,
                                                      JudgeWarnings* warnings = nullptr) {
    if (candidates.empty()) throw std::invalid_argument("judge_relevance: empty candidate list");
    {
        std::set<std::string> ids;
        for (const auto& c : candidates)
            if (!ids.insert(c.id).second)
                throw std::invalid_argument("judge_relevance: duplicate candidate id " + c.id);
    }
    ProviderRequest req = make_judge_request(section, candidates, stage);
    ProviderResponse resp = provider.complete(req, phase);
    auto parsed = parse_json_lenient(resp.text, '[');
    if (!parsed) {
        if (warnings) warnings->reprompts += 1;
        ProviderRequest retry = req;
        retry.user_prompt += "\nRespond with JSON only.";
        resp = provider.complete(retry, phase);
        parsed = parse_json_lenient(resp.text, '[');
        if (!parsed)
            throw ProviderFailure("unparseable relevance response after reprompt (section " +
                                  section.id + ")");
    }

    std::map<std::string, RelevanceJudgment> by_id;
    for (const auto& item : *parsed) {
        if (!item.is_object() || !item.contains("id")) continue;
        RelevanceJudgment j;
        j.candidate_id = item["id"].is_string() ? item["id"].get<std::string>() : "";
        j.score = std::clamp(item.value("score", 0.0), 0.0, 1.0);
        j.confidence = std::clamp(item.value("confidence", j.score), 0.0, 1.0);
        j.rationale = item.value("rationale", "");
        bool known = false;
        for (const auto& c : candidates)
            if (c.id == j.candidate_id) known = true;
        if (!known) {
            if (warnings) warnings->unknown_ids += 1;
            continue;
        }
        by_id[j.candidate_id] = std::move(j);
    }

    std::vector<RelevanceJudgment> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        auto it = by_id.find(c.id);
        if (it != by_id.end()) {
            out.push_back(it->second);
        } else {
            if (warnings) warnings->missing_candidates += 1;
            out.push_back({c.id, 0.0, 0.0, "missing from response"});
        }
    }
    return out;
}

/// One validation call per section; the kept set is forced to be a subset of
/// the input symbols and the status must land in the four-value enum.
inline ValidationOutcome validate_with_provider(const SectionView& section,
                                                const std::vector<SymbolCandidate>& symbols,
                                                const std::vector<ContextEntry>& context,
                                                Provider& provider) {
    ProviderRequest req = make_validate_request(section, symbols, context);
    ProviderResponse resp = provider.complete(req, Phase::validation);
    auto parsed = parse_json_lenient(resp.text, '{');
    auto usable = [&](const std::optional<nlohmann::json>& p) {
        return p && p->is_object() && p->contains("status");
    };
    if (!usable(parsed)) {
        ProviderRequest retry = req;
        retry.user_prompt += "\nRespond with JSON only.";
        resp = provider.complete(retry, Phase::validation);
        parsed = parse_json_lenient(resp.text, '{');
        if (!usable(parsed))
            throw ProviderFailure("unparseable validation response after reprompt (section " +
                                  section.id + ")");
    }

    ValidationOutcome out;
    std::string raw_status = parsed->value("status", "");
    std::string norm;
    for (char c : raw_status) norm += c == ' ' ? '_' : char(std::tolower(unsigned char(c)));
    if (norm == "implemented") out.status = "Implemented";
    else if (norm == "partially_implemented") out.status = "Partially_Implemented";
    else if (norm == "not_implemented") out.status = "Not_Implemented";
    else if (norm == "not_applicable") out.status = "Not_Applicable";
    else
        throw ProviderFailure("validation returned unknown status '" + raw_status +
                              "' (section " + section.id + ")");

    if (parsed->contains("keep") && (*parsed)["keep"].is_array()) {
        for (const auto& k : (*parsed)["keep"]) {
            std::string id = k.value("id", "");
            bool known = false;
            for (const auto& s : symbols)
                if (s.id == id) known = true;
            if (!known) continue; // refinement may only shrink the set
            out.keep.emplace_back(id, std::clamp(k.value("confidence", 0.0), 0.0, 1.0));
        }
    }
    out.gap_notes = parsed->value("gap_notes", "");
    return out;
}

} // namespace spectrace
