#include "vulnreach/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "vulnreach/errors.hpp"
#include "vulnreach/hash.hpp"

namespace vulnreach {

namespace {

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos; }

std::vector<Eigen::VectorXd> encode_with_retry(EncoderProvider& provider, std::span<const std::string> batch,
                                               const RetryPolicy& retry) {
    auto delay = retry.initial_backoff;
    for (unsigned attempt = 0;; ++attempt) {
        try {
            return provider.encode_batch(batch);
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= retry.max_retries)
                throw;
        }
        if (delay.count() > 0)
            std::this_thread::sleep_for(delay);
        delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * retry.multiplier));
    }
}

} // namespace

std::vector<EmbeddingVector> embed(EncoderProvider& provider, std::span<const std::string> texts,
                                   const RetryPolicy& retry) {
    for (const auto& t : texts)
        if (is_blank(t))
            throw EmptyText();

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    const std::size_t batch = std::max<std::size_t>(1, provider.batch_limit());
    for (std::size_t first = 0; first < texts.size(); first += batch) {
        const auto chunk = texts.subspan(first, std::min(batch, texts.size() - first));
        const std::vector<Eigen::VectorXd> raw = encode_with_retry(provider, chunk, retry);
        if (raw.size() != chunk.size())
            throw ProviderError(-1, provider.name() + " returned " + std::to_string(raw.size()) + " vectors for " +
                                        std::to_string(chunk.size()) + " inputs");
        for (const auto& v : raw) {
            if (v.size() != provider.dims())
                throw ProviderError(-1, provider.name() + " returned a vector of " + std::to_string(v.size()) +
                                            " dims, expected " + std::to_string(provider.dims()));
            try {
                out.push_back(EmbeddingVector::normalized(v));
            } catch (const std::invalid_argument& e) {
                throw ProviderError(-1, provider.name() + ": " + e.what());
            }
        }
    }
    return out;
}

EmbeddingVector embed_one(EncoderProvider& provider, const std::string& text, const RetryPolicy& retry) {
    return embed(provider, std::span<const std::string>(&text, 1), retry).front();
}

std::string normalize_for_encoding(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    }
    return out;
}

Eigen::VectorXd reference_features(std::string_view text, Eigen::Index dims) {
    if (dims < 8)
        throw std::invalid_argument("reference encoder needs at least 8 dimensions");
    const std::string norm = normalize_for_encoding(text);
    if (norm.empty())
        throw EmptyText();
    const std::string padded = "^" + norm + "$";
    const auto buckets = static_cast<std::uint64_t>(dims);

    Eigen::VectorXd v = Eigen::VectorXd::Zero(dims);
    const std::string_view view(padded);
    for (std::size_t n = 3; n <= 5; ++n) {
        if (view.size() < n)
            break;
        for (std::size_t i = 0; i + n <= view.size(); ++i) {
            const std::uint64_t h = fnv1a64(view.substr(i, n));
            v[static_cast<Eigen::Index>(h % buckets)] += (h >> 63) ? -1.0 : 1.0;
        }
    }
    if (v.squaredNorm() == 0.0)
        v[static_cast<Eigen::Index>(fnv1a64(padded) % buckets)] = 1.0;
    return v;
}

EmbeddingVector reference_encode(std::string_view text, Eigen::Index dims) {
    return EmbeddingVector::normalized(reference_features(text, dims));
}

ReferenceEncoder::ReferenceEncoder(Eigen::Index dims, std::size_t batch_limit)
    : dims_(dims), batch_limit_(batch_limit) {
    if (dims_ < 8)
        throw std::invalid_argument("reference encoder needs at least 8 dimensions");
    if (batch_limit_ == 0)
        throw std::invalid_argument("batch_limit must be positive");
}

std::string ReferenceEncoder::name() const { return "reference-ngram-v1/" + std::to_string(dims_); }

std::vector<Eigen::VectorXd> ReferenceEncoder::encode_batch(std::span<const std::string> texts) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(texts.size());
    for (const auto& t : texts)
        out.push_back(reference_features(t, dims_));
    return out;
}

} // namespace vulnreach
