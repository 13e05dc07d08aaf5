#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vulnreach/chat.hpp"
#include "vulnreach/detector.hpp"
#include "vulnreach/embedding.hpp"
#include "vulnreach/json_io.hpp"
#include "vulnreach/prompts.hpp"
#include "vulnreach/segmenter.hpp"

namespace vulnreach {

struct EncoderSpec {
    std::string provider = "reference"; // reference | openai
    long dims = ReferenceEncoder::kDefaultDims;
    std::string model;
    std::string endpoint;
    std::string api_key_env;
    std::size_t batch_limit = 64;
    unsigned max_retries = 3;
};

struct ChatSpec {
    std::string provider; // scripted | replay | openai; empty means not configured
    std::string script;     // scripted: rule file
    std::string transcript; // replay: recorded JSONL
    std::string model;
    std::string endpoint;
    std::string api_key_env;
    unsigned max_output_tokens = 1024;
};

/// Settings shared by all subcommands. Relative paths are kept as written and
/// resolved against `base_dir` (the config file's directory) when used.
struct ToolConfig {
    unsigned theta = SegmenterConfig::kDefaultTheta;
    double tau = 0.35;
    std::size_t top_k = 10;
    unsigned max_iterations = 5;
    unsigned parallelism = 1;
    std::size_t max_context_tokens = 60000;
    EncoderSpec encoder;
    ChatSpec chat;
    std::vector<std::string> ignore_globs{".git/*", "target/*"};
    std::string prompts_dir;

    std::filesystem::path base_dir = ".";

    /// Rejects unknown keys and out-of-range values with ConfigError.
    static ToolConfig from_json(const Json& j, const std::filesystem::path& base_dir);
    static ToolConfig load(const std::filesystem::path& path);

    void validate() const;
    /// The effective settings, for report headers. Holds no credentials.
    Json to_json() const;

    std::filesystem::path resolve(const std::string& path) const;

    SegmenterConfig segmenter() const;
    DetectorConfig detector() const;
    RetryPolicy retry() const;
    PromptLibrary prompts() const;

    std::unique_ptr<EncoderProvider> make_encoder() const;
    std::unique_ptr<ChatProvider> make_chat() const;
};

} // namespace vulnreach
