#pragma once

#include <chrono>
#include <string>

#include "vulnreach/chat.hpp"
#include "vulnreach/embedding.hpp"
#include "vulnreach/json_io.hpp"

namespace vulnreach {

/// Connection settings for an OpenAI-compatible HTTP endpoint.
struct HttpEndpoint {
    std::string base_url; // scheme://host[:port][/prefix]
    std::string model;
    /// Name of the environment variable that holds the bearer token. An unset
    /// or empty variable sends no Authorization header.
    std::string api_key_env;
    std::chrono::seconds timeout{120};
};

/// POSTs `{model, input}` to <base_url>/v1/embeddings.
class HttpEmbeddingProvider final : public EncoderProvider {
public:
    HttpEmbeddingProvider(HttpEndpoint endpoint, Eigen::Index dims, std::size_t batch_limit = 64);

    std::string name() const override;
    Eigen::Index dims() const override { return dims_; }
    std::size_t batch_limit() const override { return batch_limit_; }
    std::vector<Eigen::VectorXd> encode_batch(std::span<const std::string> texts) override;

private:
    HttpEndpoint endpoint_;
    Eigen::Index dims_;
    std::size_t batch_limit_;
};

/// POSTs a two-message conversation to <base_url>/v1/chat/completions.
class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(HttpEndpoint endpoint, unsigned max_output_tokens = 1024);

    std::string name() const override { return "openai-compatible"; }
    std::string model_id() const override { return endpoint_.model; }
    unsigned max_output_tokens() const override { return max_output_tokens_; }
    std::string complete(const ChatRequest& request) override;

private:
    HttpEndpoint endpoint_;
    unsigned max_output_tokens_;
};

/// Sends `body` as JSON and returns the parsed JSON reply. Transport errors,
/// 429 and 5xx are retryable ProviderErrors; other non-2xx are not.
Json post_json(const HttpEndpoint& endpoint, const std::string& path, const Json& body);

} // namespace vulnreach
