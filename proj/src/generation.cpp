#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "sarcbench/generation.hpp"

#include <chrono>
#include <cstdlib>

#include "sarcbench/errors.hpp"

namespace sarc {

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw UsageError("endpoint '" + url + "' lacks a scheme (http:// or https://)");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw UsageError("endpoint '" + url + "' has unsupported scheme '" + scheme + "'");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

HttpGenerationClient::HttpGenerationClient(HttpClientConfig config) : config_(std::move(config)) {
    std::tie(base_, path_) = split_endpoint(config_.endpoint);
    if (!config_.credential_env.empty()) {
        const char* value = std::getenv(config_.credential_env.c_str());
        if (value == nullptr || *value == '\0') {
            throw UsageError("credential environment variable '" + config_.credential_env + "' is not set");
        }
        credential_ = value;
    }
}

GenerationResult HttpGenerationClient::generate(const std::string& model, const std::string& prompt) {
    GenerationResult result;
    json body = config_.extra_body.is_object() ? config_.extra_body : json::object();
    body["model"] = model;
    body["prompt"] = prompt;

    httplib::Headers headers;
    if (!credential_.empty()) {
        headers.emplace(config_.auth_header, config_.auth_prefix + credential_);
    }

    const auto start = std::chrono::steady_clock::now();
    httplib::Client cli(base_);
    cli.set_connection_timeout(config_.timeout_seconds, 0);
    cli.set_read_timeout(config_.timeout_seconds, 0);
    cli.set_write_timeout(config_.timeout_seconds, 0);
    const auto res = cli.Post(path_, headers, body.dump(), "application/json");
    result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (!res) {
        result.error = "transport error: " + httplib::to_string(res.error());
        return result;
    }
    if (res->status < 200 || res->status >= 300) {
        result.error = "HTTP " + std::to_string(res->status);
        return result;
    }
    try {
        const json reply = json::parse(res->body);
        const auto it = reply.find(config_.response_key);
        if (it == reply.end() || !it->is_string()) {
            result.error = "response lacks string field '" + config_.response_key + "'";
            return result;
        }
        result.text = it->get<std::string>();
        result.ok = true;
    } catch (const json::parse_error& e) {
        result.error = std::string("response is not JSON: ") + e.what();
    }
    return result;
}

}  // namespace sarc
