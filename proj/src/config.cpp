#include "vulnreach/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "vulnreach/errors.hpp"
#include "vulnreach/http_providers.hpp"
#include "vulnreach/scripted_provider.hpp"

namespace vulnreach {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object())
        throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown config key " + where + "." + key);
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        return;
    try {
        it->get_to(out);
    } catch (const Json::exception& e) {
        throw ConfigError("config key " + where + "." + key + ": " + e.what());
    }
}

std::string default_key_env(const std::string& provider) {
    std::string s = provider;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s + "_API_KEY";
}

} // namespace

ToolConfig ToolConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
    reject_unknown(j,
                   {"theta", "tau", "top_k", "max_iterations", "parallelism", "max_context_tokens", "encoder", "chat",
                    "ignore_globs", "prompts_dir"},
                   "config");
    ToolConfig c;
    c.base_dir = base_dir;
    read(j, "theta", c.theta, "config");
    read(j, "tau", c.tau, "config");
    read(j, "top_k", c.top_k, "config");
    read(j, "max_iterations", c.max_iterations, "config");
    read(j, "parallelism", c.parallelism, "config");
    read(j, "max_context_tokens", c.max_context_tokens, "config");
    read(j, "ignore_globs", c.ignore_globs, "config");
    read(j, "prompts_dir", c.prompts_dir, "config");
    if (auto it = j.find("encoder"); it != j.end()) {
        reject_unknown(*it, {"provider", "dims", "model", "endpoint", "api_key_env", "batch_limit", "max_retries"},
                       "encoder");
        read(*it, "provider", c.encoder.provider, "encoder");
        read(*it, "dims", c.encoder.dims, "encoder");
        read(*it, "model", c.encoder.model, "encoder");
        read(*it, "endpoint", c.encoder.endpoint, "encoder");
        read(*it, "api_key_env", c.encoder.api_key_env, "encoder");
        read(*it, "batch_limit", c.encoder.batch_limit, "encoder");
        read(*it, "max_retries", c.encoder.max_retries, "encoder");
    }
    if (auto it = j.find("chat"); it != j.end()) {
        reject_unknown(*it,
                       {"provider", "script", "transcript", "model", "endpoint", "api_key_env", "max_output_tokens"},
                       "chat");
        read(*it, "provider", c.chat.provider, "chat");
        read(*it, "script", c.chat.script, "chat");
        read(*it, "transcript", c.chat.transcript, "chat");
        read(*it, "model", c.chat.model, "chat");
        read(*it, "endpoint", c.chat.endpoint, "chat");
        read(*it, "api_key_env", c.chat.api_key_env, "chat");
        read(*it, "max_output_tokens", c.chat.max_output_tokens, "chat");
    }
    c.validate();
    return c;
}

ToolConfig ToolConfig::load(const std::filesystem::path& path) {
    Json j;
    try {
        j = read_json_file(path.string());
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return from_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void ToolConfig::validate() const {
    segmenter().validate();
    detector().validate();
    if (max_context_tokens == 0)
        throw ConfigError("max_context_tokens must be positive");
    static const std::set<std::string> encoders{"reference", "openai"};
    if (!encoders.count(encoder.provider))
        throw ConfigError("unknown encoder provider '" + encoder.provider + "'");
    if (encoder.dims < (encoder.provider == "reference" ? 8 : 1))
        throw ConfigError("encoder dims too small");
    if (encoder.batch_limit == 0)
        throw ConfigError("encoder batch_limit must be positive");
    static const std::set<std::string> chats{"", "scripted", "replay", "openai"};
    if (!chats.count(chat.provider))
        throw ConfigError("unknown chat provider '" + chat.provider + "'");
    if (encoder.provider == "openai" && (encoder.endpoint.empty() || encoder.model.empty()))
        throw ConfigError("openai encoder needs endpoint and model");
    if (chat.provider == "openai" && (chat.endpoint.empty() || chat.model.empty()))
        throw ConfigError("openai chat needs endpoint and model");
}

Json ToolConfig::to_json() const {
    Json enc{{"provider", encoder.provider}, {"dims", encoder.dims}, {"batch_limit", encoder.batch_limit},
             {"max_retries", encoder.max_retries}};
    if (encoder.provider == "openai") {
        enc["model"] = encoder.model;
        enc["endpoint"] = encoder.endpoint;
    }
    Json ch{{"provider", chat.provider}, {"max_output_tokens", chat.max_output_tokens}};
    if (chat.provider == "scripted")
        ch["script"] = chat.script;
    if (chat.provider == "replay")
        ch["transcript"] = chat.transcript;
    if (chat.provider == "openai") {
        ch["model"] = chat.model;
        ch["endpoint"] = chat.endpoint;
    }
    return Json{{"theta", theta},
                {"tau", tau},
                {"top_k", top_k},
                {"max_iterations", max_iterations},
                {"parallelism", parallelism},
                {"max_context_tokens", max_context_tokens},
                {"encoder", enc},
                {"chat", ch},
                {"ignore_globs", ignore_globs},
                {"prompts_dir", prompts_dir}};
}

std::filesystem::path ToolConfig::resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    return p.is_absolute() ? p : (base_dir / p).lexically_normal();
}

SegmenterConfig ToolConfig::segmenter() const {
    SegmenterConfig s;
    s.theta = theta;
    s.ignore_globs = ignore_globs;
    return s;
}

DetectorConfig ToolConfig::detector() const {
    DetectorConfig d;
    d.tau = tau;
    d.top_k = top_k;
    d.max_iterations = max_iterations;
    d.parallelism = parallelism;
    d.retry = retry();
    return d;
}

RetryPolicy ToolConfig::retry() const {
    RetryPolicy r;
    r.max_retries = encoder.max_retries;
    return r;
}

PromptLibrary ToolConfig::prompts() const {
    return prompts_dir.empty() ? PromptLibrary::builtin() : PromptLibrary::from_directory(resolve(prompts_dir).string());
}

std::unique_ptr<EncoderProvider> ToolConfig::make_encoder() const {
    if (encoder.provider == "reference")
        return std::make_unique<ReferenceEncoder>(encoder.dims, encoder.batch_limit);
    HttpEndpoint ep{encoder.endpoint, encoder.model,
                    encoder.api_key_env.empty() ? default_key_env(encoder.provider) : encoder.api_key_env};
    return std::make_unique<HttpEmbeddingProvider>(ep, encoder.dims, encoder.batch_limit);
}

std::unique_ptr<ChatProvider> ToolConfig::make_chat() const {
    if (chat.provider == "scripted") {
        if (chat.script.empty())
            throw ConfigError("scripted chat provider needs chat.script");
        return std::make_unique<ScriptedProvider>(ScriptedProvider::from_file(resolve(chat.script).string()));
    }
    if (chat.provider == "replay") {
        if (chat.transcript.empty())
            throw ConfigError("replay chat provider needs chat.transcript");
        return std::make_unique<ReplayProvider>(ReplayProvider::from_file(resolve(chat.transcript).string()));
    }
    if (chat.provider == "openai") {
        HttpEndpoint ep{chat.endpoint, chat.model,
                        chat.api_key_env.empty() ? default_key_env(chat.provider) : chat.api_key_env};
        return std::make_unique<HttpChatProvider>(ep, chat.max_output_tokens);
    }
    throw ConfigError("no chat provider configured (set chat.provider)");
}

} // namespace vulnreach
