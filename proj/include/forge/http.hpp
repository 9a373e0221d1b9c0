#pragma once
// Chat-completion endpoint client used as a bench ResponseSource.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "forge/bench.hpp"

namespace forge {

struct ClientConfig {
    std::string base_url;       // e.g. http://localhost:8000/v1
    std::string model_name;
    std::string api_key;        // resolved from FORGE_API_KEY when empty
    double timeout_seconds = 600;
    int retry_budget = 2;
    double backoff_seconds = 1;  // doubles per retry
    std::optional<double> temperature;

    // FORGE_API_BASE / FORGE_API_KEY fill unset fields.
    void apply_env() {
        if (base_url.empty())
            if (const char* b = std::getenv("FORGE_API_BASE")) base_url = b;
        if (api_key.empty())
            if (const char* k = std::getenv("FORGE_API_KEY")) api_key = k;
    }

    void check() const {
        if (base_url.empty()) throw Error(ErrorKind::missing_resource, "no endpoint: set FORGE_API_BASE or --api-base");
        if (timeout_seconds <= 0) throw Error(ErrorKind::contract_violation, "timeout must be positive");
        if (retry_budget < 0) throw Error(ErrorKind::contract_violation, "retry budget must be >= 0");
    }
};

class HttpSource : public ResponseSource {
public:
    explicit HttpSource(ClientConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.check();
        auto scheme_end = cfg_.base_url.find("://");
        auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        auto path_start = cfg_.base_url.find('/', host_start);
        if (path_start == std::string::npos) {
            origin_ = cfg_.base_url;
        } else {
            origin_ = cfg_.base_url.substr(0, path_start);
            path_ = cfg_.base_url.substr(path_start);
        }
        while (!path_.empty() && path_.back() == '/') path_.pop_back();
        path_ += "/chat/completions";
    }

    std::string respond(const TaskInstance& task, const std::string& prompt) override {
        nlohmann::json body = {{"model", cfg_.model_name},
                               {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
        if (cfg_.temperature) body["temperature"] = *cfg_.temperature;
        std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.retry_budget; ++attempt) {
            if (attempt > 0 && cfg_.backoff_seconds > 0)
                std::this_thread::sleep_for(std::chrono::duration<double>(cfg_.backoff_seconds * (1 << (attempt - 1))));
            try {
                httplib::Client cli(origin_);
                auto limit = std::chrono::microseconds(static_cast<long long>(cfg_.timeout_seconds * 1e6));
                cli.set_connection_timeout(limit);
                cli.set_read_timeout(limit);
                cli.set_write_timeout(limit);
                httplib::Headers headers;
                if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
                auto res = cli.Post(path_, headers, payload, "application/json");
                if (!res) {
                    last_error = "request failed: " + httplib::to_string(res.error());
                    continue;
                }
                if (res->status != 200) {
                    last_error = "HTTP " + std::to_string(res->status);
                    continue;
                }
                auto j = nlohmann::json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                last_error = std::string("malformed response: ") + e.what();
            } catch (const std::exception& e) {
                last_error = e.what();
            }
        }
        throw TransportError(task.id + ": " + last_error + " after " + std::to_string(cfg_.retry_budget + 1) +
                             " attempt(s)");
    }

private:
    ClientConfig cfg_;
    std::string origin_;
    std::string path_;
};

}  // namespace forge
