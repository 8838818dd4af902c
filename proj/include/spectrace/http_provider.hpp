#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "spectrace/provider.hpp"

namespace spectrace {

struct HttpProviderConfig {
    std::string endpoint; // base URL, e.g. "http://localhost:8080/v1"
    std::string model;
    std::string api_key_env = "SPECTRACE_API_KEY";
    int retry_attempts = 3;
    int retry_base_ms = 1000;
    int timeout_seconds = 120;
};

/// OpenAI-compatible chat-completions backend. Transport errors and 5xx
/// responses retry with exponential backoff; 401/403 fail immediately.
class HttpProvider : public Provider {
  public:
    HttpProvider(TokenLedger& ledger, HttpProviderConfig cfg, int max_in_flight = 4)
        : Provider(ledger, max_in_flight), cfg_(std::move(cfg)) {
        parse_endpoint();
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
    }

  protected:
    ProviderResponse do_complete(const ProviderRequest& req) override {
        nlohmann::json body = {
            {"model", cfg_.model},
            {"temperature", req.temperature},
            {"max_tokens", req.max_output_tokens},
            {"messages",
             {{{"role", "system"}, {"content", req.system_prompt}},
              {{"role", "user"}, {"content", req.user_prompt}}}}};
        std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 1; attempt <= cfg_.retry_attempts; ++attempt) {
            if (attempt > 1) {
                auto delay = std::chrono::milliseconds(
                    cfg_.retry_base_ms * (1l << (attempt - 2)));
                std::this_thread::sleep_for(delay);
            }
            httplib::Client client(host_, port_);
            client.set_read_timeout(cfg_.timeout_seconds, 0);
            client.set_connection_timeout(10, 0);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            auto res = client.Post(path_prefix_ + "/chat/completions", headers, payload,
                                   "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 401 || res->status == 403)
                throw AuthError("authentication rejected (HTTP " + std::to_string(res->status) +
                                ")");
            if (res->status >= 500) {
                last_error = "server error HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw ProviderFailure("backend returned HTTP " + std::to_string(res->status) +
                                      ": " + res->body.substr(0, 200));
            return parse_response(res->body);
        }
        throw ProviderFailure("provider unreachable after " +
                              std::to_string(cfg_.retry_attempts) + " attempts: " + last_error);
    }

  private:
    static ProviderResponse parse_response(const std::string& body) {
        nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
            throw ProviderFailure("malformed chat-completions response");
        ProviderResponse resp;
        resp.text = j["choices"][0]["message"].value("content", "");
        if (j.contains("usage")) {
            resp.prompt_tokens = j["usage"].value("prompt_tokens", 0l);
            resp.completion_tokens = j["usage"].value("completion_tokens", 0l);
        }
        return resp; // zero usage falls back to the chars/4 estimate upstream
    }

    void parse_endpoint() {
        std::string url = cfg_.endpoint;
        const std::string scheme = "http://";
        if (url.rfind(scheme, 0) != 0)
            throw ConfigError("http provider endpoint must start with http:// (got '" + url +
                              "')");
        url = url.substr(scheme.size());
        auto slash = url.find('/');
        std::string hostport = slash == std::string::npos ? url : url.substr(0, slash);
        path_prefix_ = slash == std::string::npos ? "" : url.substr(slash);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
        auto colon = hostport.find(':');
        host_ = colon == std::string::npos ? hostport : hostport.substr(0, colon);
        port_ = colon == std::string::npos ? 80 : std::atoi(hostport.substr(colon + 1).c_str());
        if (host_.empty() || port_ <= 0) throw ConfigError("invalid endpoint: " + cfg_.endpoint);
    }

    HttpProviderConfig cfg_;
    std::string api_key_;
    std::string host_;
    int port_ = 80;
    std::string path_prefix_;
};

} // namespace spectrace
