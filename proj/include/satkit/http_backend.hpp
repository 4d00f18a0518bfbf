#pragma once

// Chat-completion HTTP backend. Request body: {model, temperature: 0,
// messages: [{role: system, content}, {role: user, content}]}; the assistant
// text is read from choices[0].message.content (with a fallback to a bare
// top-level "content" for minimal servers). Transient transport failures
// (connect errors, 5xx, 429) are retried with exponential backoff; responses
// that merely fail downstream format validation are never retried.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "satkit/errors.hpp"
#include "satkit/orchestrator.hpp"

namespace satkit {

struct HttpBackendConfig {
    std::string endpoint_url;  // e.g. http://host:8000/v1/chat/completions
    std::string model;
    std::string auth_token;          // explicit token, or
    std::string auth_env;            // name of the env var carrying it
    int max_attempts = 3;
    double backoff_initial_s = 0.5;  // doubles per retry
    double timeout_s = 120.0;
};

namespace detail {

struct SplitUrl {
    std::string host_base;  // scheme://host[:port]
    std::string path;
};

inline SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint URL must carry a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
        if (config_.auth_token.empty() && !config_.auth_env.empty()) {
            if (const char* token = std::getenv(config_.auth_env.c_str())) {
                config_.auth_token = token;
            }
        }
        (void)detail::split_url(config_.endpoint_url);  // validate eagerly
    }

    BackendResponse complete(const BackendRequest& request) override {
        const auto started = std::chrono::steady_clock::now();
        const auto url = detail::split_url(config_.endpoint_url);

        nlohmann::json body = {
            {"model", request.model.empty() ? config_.model : request.model},
            {"temperature", request.temperature},
            {"messages",
             {{{"role", "system"}, {"content", request.system_prompt}},
              {{"role", "user"}, {"content", request.user_content}}}},
        };
        const std::string payload = body.dump();

        httplib::Headers headers;
        if (!config_.auth_token.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.auth_token);
        }

        int last_status = 0;
        std::string last_detail;
        double backoff = config_.backoff_initial_s;
        for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
            // one client per call: httplib clients are not safe to share
            // across threads, and chunks run concurrently
            httplib::Client client(url.host_base);
            client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
            client.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));

            auto result = client.Post(url.path, headers, payload, "application/json");
            if (!result) {
                last_status = 0;
                last_detail = "transport: " + httplib::to_string(result.error());
            } else if (result->status >= 200 && result->status < 300) {
                const auto dt = std::chrono::steady_clock::now() - started;
                return {extract_text(result->body),
                        std::chrono::duration<double>(dt).count()};
            } else {
                last_status = result->status;
                last_detail = "HTTP " + std::to_string(result->status);
                const bool retryable = result->status == 429 || result->status >= 500;
                if (!retryable) {
                    throw BackendError("backend request failed (" + last_detail +
                                           ", not retryable)",
                                       last_status, attempt);
                }
            }
            if (attempt < config_.max_attempts) {
                std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
                backoff *= 2.0;
            }
        }
        throw BackendError("backend retries exhausted (" + last_detail + ")",
                           last_status, config_.max_attempts);
    }

private:
    static std::string extract_text(const std::string& body) {
        try {
            const auto j = nlohmann::json::parse(body);
            if (j.contains("choices") && j["choices"].is_array() &&
                !j["choices"].empty()) {
                const auto& message = j["choices"][0]["message"];
                if (message.contains("content") && message["content"].is_string()) {
                    return message["content"].get<std::string>();
                }
            }
            if (j.contains("content") && j["content"].is_string()) {
                return j["content"].get<std::string>();
            }
        } catch (const nlohmann::json::exception&) {
            // fall through: non-JSON bodies surface as unparseable output
        }
        return body;
    }

    HttpBackendConfig config_;
};

}  // namespace satkit
