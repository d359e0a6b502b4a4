#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "sarcbench/io.hpp"

namespace sarc {

struct GenerationResult {
    bool ok = false;
    std::string text;   // generated text when ok
    std::string error;  // transport/protocol failure description otherwise
    std::int64_t latency_ms = 0;
};

// A text-generation service: the translation LLM or the local inference server.
// Implementations must be safe to call from several threads.
class TextGenerationClient {
public:
    virtual ~TextGenerationClient() = default;
    virtual GenerationResult generate(const std::string& model, const std::string& prompt) = 0;
};

struct HttpClientConfig {
    std::string endpoint;                  // e.g. http://127.0.0.1:11434/api/generate
    std::string response_key = "response"; // JSON field carrying the generated text
    json extra_body = json::object();      // merged into {"model", "prompt"}
    std::string credential_env;            // env var holding a token; empty = no auth
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    int timeout_seconds = 120;
};

// POSTs JSON {"model": ..., "prompt": ..., <extra_body>} and reads response_key.
class HttpGenerationClient final : public TextGenerationClient {
public:
    explicit HttpGenerationClient(HttpClientConfig config);
    GenerationResult generate(const std::string& model, const std::string& prompt) override;

private:
    HttpClientConfig config_;
    std::string base_;
    std::string path_;
    std::string credential_;
};

// Splits "scheme://host[:port]/path" into base and path; throws UsageError.
std::pair<std::string, std::string> split_endpoint(const std::string& url);

// Counts calls; wraps another client. Used for cache-idempotence checks and run reports.
class CountingClient final : public TextGenerationClient {
public:
    explicit CountingClient(TextGenerationClient& inner) : inner_(inner) {}
    GenerationResult generate(const std::string& model, const std::string& prompt) override {
        ++calls_;
        return inner_.generate(model, prompt);
    }
    std::size_t calls() const { return calls_.load(); }

private:
    TextGenerationClient& inner_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace sarc
