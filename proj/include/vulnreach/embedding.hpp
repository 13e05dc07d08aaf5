#pragma once

#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnreach/core.hpp"

namespace vulnreach {

/// Source of raw embedding vectors. Implementations must return the same
/// vector for the same text and be safe to call from several threads.
class EncoderProvider {
public:
    virtual ~EncoderProvider() = default;

    /// Identifier including a version, e.g. "reference-ngram-v1/256".
    virtual std::string name() const = 0;
    virtual Eigen::Index dims() const = 0;
    virtual std::size_t batch_limit() const = 0;

    /// One raw (not necessarily normalized) vector per text, in order.
    virtual std::vector<Eigen::VectorXd> encode_batch(std::span<const std::string> texts) = 0;
};

struct RetryPolicy {
    unsigned max_retries = 3;
    std::chrono::milliseconds initial_backoff{250};
    double multiplier = 2.0;
};

/// Embeds `texts` in batches of provider.batch_limit(), retrying retryable
/// ProviderErrors per `retry`, and L2-normalizes every vector.
/// Throws EmptyText for blank input, ProviderError on malformed provider output.
std::vector<EmbeddingVector> embed(EncoderProvider& provider, std::span<const std::string> texts,
                                   const RetryPolicy& retry = {});

EmbeddingVector embed_one(EncoderProvider& provider, const std::string& text, const RetryPolicy& retry = {});

/// Lower-cases ASCII letters, collapses whitespace runs to one space, trims.
std::string normalize_for_encoding(std::string_view text);

/// Deterministic offline encoder: signed feature hashing of the character
/// 3-, 4- and 5-grams of the normalized text (bounded by '^' and '$') into
/// `dims` buckets, then L2 normalization. Requires dims >= 8.
EmbeddingVector reference_encode(std::string_view text, Eigen::Index dims);

/// Unnormalized reference vector; exposed for the provider adapter.
Eigen::VectorXd reference_features(std::string_view text, Eigen::Index dims);

class ReferenceEncoder final : public EncoderProvider {
public:
    static constexpr Eigen::Index kDefaultDims = 256;

    explicit ReferenceEncoder(Eigen::Index dims = kDefaultDims, std::size_t batch_limit = 64);

    std::string name() const override;
    Eigen::Index dims() const override { return dims_; }
    std::size_t batch_limit() const override { return batch_limit_; }
    std::vector<Eigen::VectorXd> encode_batch(std::span<const std::string> texts) override;

private:
    Eigen::Index dims_;
    std::size_t batch_limit_;
};

} // namespace vulnreach
