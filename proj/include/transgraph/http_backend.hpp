#pragma once

// Live chat-completions backend. Kept out of the umbrella header because
// cpp-httplib is heavy to compile; include this only where the live wire
// is actually used.

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "transgraph/errors.hpp"
#include "transgraph/gateway.hpp"
#include "transgraph/runner.hpp"

namespace transgraph {

// POSTs a chat-completions style request: system/user messages plus the
// decoding parameters. The credential comes from the configured
// environment variable; endpoint and model come from configuration.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(BackendSpec spec) : spec_(std::move(spec)) {
        if (spec_.endpoint.empty()) throw ConfigError("http backend needs an endpoint");
        const std::size_t scheme = spec_.endpoint.find("://");
        const std::size_t path_start =
            spec_.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (path_start == std::string::npos) {
            base_ = spec_.endpoint;
            path_ = "/v1/chat/completions";
        } else {
            base_ = spec_.endpoint.substr(0, path_start);
            path_ = spec_.endpoint.substr(path_start);
        }
        if (!spec_.api_key_env.empty()) {
            if (const char* key = std::getenv(spec_.api_key_env.c_str())) api_key_ = key;
        }
    }

    ChatResponse send(const ChatRequest& request) override {
        json messages = json::array();
        if (!request.system_text.empty()) {
            messages.push_back({{"role", "system"}, {"content", request.system_text}});
        }
        messages.push_back({{"role", "user"}, {"content", request.user_text}});
        const DecodingParams decoding = request.decoding.value_or(DecodingParams{});
        const json body = {{"model", spec_.model},
                           {"messages", messages},
                           {"temperature", decoding.temperature},
                           {"top_p", decoding.top_p},
                           {"max_tokens", decoding.max_output_tokens}};

        httplib::Client client(base_);
        client.set_read_timeout(timeout_seconds_, 0);
        client.set_connection_timeout(timeout_seconds_, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        const httplib::Result res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) {
            throw TransportError("request to " + base_ + " failed: " +
                                 httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
            throw TransportError("HTTP " + std::to_string(res->status) + " from " + base_ +
                                 ": " + res->body.substr(0, 200));
        }
        const json payload = json::parse(res->body, nullptr, false);
        if (payload.is_discarded()) {
            throw TransportError("non-JSON response from " + base_);
        }
        ChatResponse response;
        response.backend_id = id();
        try {
            response.text = payload.at("choices").at(0).at("message").at("content")
                                .get<std::string>();
        } catch (const json::exception&) {
            throw TransportError("unexpected response shape from " + base_);
        }
        if (payload.contains("usage")) {
            const json& usage = payload.at("usage");
            response.input_tokens = usage.value("prompt_tokens", 0);
            response.output_tokens = usage.value("completion_tokens", 0);
        }
        return response;
    }

    std::string id() const override { return "http:" + base_; }

    void set_timeout_seconds(int seconds) { timeout_seconds_ = seconds; }

  private:
    BackendSpec spec_;
    std::string base_;
    std::string path_;
    std::string api_key_;
    int timeout_seconds_ = 120;
};

// Factory covering both backend kinds; pass to run_pipeline when live runs
// should be possible.
inline std::shared_ptr<Backend> make_any_backend(const BackendSpec& spec) {
    if (spec.kind == "http") return std::make_shared<HttpBackend>(spec);
    return make_mock_backend(spec);
}

}  // namespace transgraph
