// Eigen has to come before httplib: <resolv.h> defines a `_res` macro.
#include "vulnreach/http_providers.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "vulnreach/errors.hpp"

namespace vulnreach {

namespace {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string prefix; // path without trailing slash
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl s;
    s.origin = url.substr(0, path_start);
    if (path_start != std::string::npos)
        s.prefix = url.substr(path_start);
    while (!s.prefix.empty() && s.prefix.back() == '/')
        s.prefix.pop_back();
    return s;
}

std::string snippet(const std::string& body) { return body.size() > 300 ? body.substr(0, 300) + "..." : body; }

} // namespace

Json post_json(const HttpEndpoint& endpoint, const std::string& path, const Json& body) {
    const SplitUrl url = split_url(endpoint.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);

    httplib::Headers headers;
    if (!endpoint.api_key_env.empty())
        if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
    if (!res)
        throw ProviderError(0, "request to " + endpoint.base_url + path + " failed: " + httplib::to_string(res.error()),
                            true);
    if (res->status < 200 || res->status >= 300) {
        const bool retryable = res->status == 429 || res->status >= 500;
        throw ProviderError(res->status, snippet(res->body), retryable);
    }
    try {
        return Json::parse(res->body);
    } catch (const Json::parse_error& e) {
        throw ProviderError(res->status, std::string("response body is not JSON: ") + e.what());
    }
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEndpoint endpoint, Eigen::Index dims, std::size_t batch_limit)
    : endpoint_(std::move(endpoint)), dims_(dims), batch_limit_(batch_limit) {
    if (dims_ <= 0)
        throw ConfigError("embedding dims must be positive");
    if (batch_limit_ == 0)
        throw ConfigError("batch limit must be positive");
}

std::string HttpEmbeddingProvider::name() const { return "http:" + endpoint_.model + "/" + std::to_string(dims_); }

std::vector<Eigen::VectorXd> HttpEmbeddingProvider::encode_batch(std::span<const std::string> texts) {
    Json body{{"model", endpoint_.model}, {"input", Json::array()}};
    for (const auto& t : texts)
        body["input"].push_back(t);
    const Json reply = post_json(endpoint_, "/v1/embeddings", body);

    std::vector<Eigen::VectorXd> out(texts.size());
    try {
        const Json& data = reply.at("data");
        if (data.size() != texts.size())
            throw ProviderError(-1, "expected " + std::to_string(texts.size()) + " embeddings, got " +
                                        std::to_string(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i) {
            const std::size_t slot = data[i].value("index", i);
            if (slot >= out.size() || out[slot].size() != 0)
                throw ProviderError(-1, "bad embedding index " + std::to_string(slot));
            const auto values = data[i].at("embedding").get<std::vector<double>>();
            out[slot] = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        }
    } catch (const Json::exception& e) {
        throw ProviderError(-1, std::string("malformed embeddings response: ") + e.what());
    }
    return out;
}

HttpChatProvider::HttpChatProvider(HttpEndpoint endpoint, unsigned max_output_tokens)
    : endpoint_(std::move(endpoint)), max_output_tokens_(max_output_tokens) {}

std::string HttpChatProvider::complete(const ChatRequest& request) {
    Json body{{"model", endpoint_.model},
              {"temperature", request.temperature},
              {"max_tokens", request.max_output_tokens},
              {"messages",
               Json::array({Json{{"role", "system"}, {"content", request.system_prompt}},
                            Json{{"role", "user"}, {"content", request.user_prompt}}})}};
    const Json reply = post_json(endpoint_, "/v1/chat/completions", body);
    try {
        const Json& content = reply.at("choices").at(0).at("message").at("content");
        if (!content.is_string())
            throw ProviderError(-1, "chat response has no text content");
        return content.get<std::string>();
    } catch (const Json::exception& e) {
        throw ProviderError(-1, std::string("malformed chat response: ") + e.what());
    }
}

} // namespace vulnreach
