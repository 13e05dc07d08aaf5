#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "vulnreach/chat.hpp"
#include "vulnreach/json_io.hpp"
#include "vulnreach/transcript.hpp"

namespace vulnreach {

/// One scripted behaviour. A rule applies to requests of its role whose
/// system + user prompt contains every `contains` string and none of the
/// `excludes` strings. The first applicable rule answers.
struct ScriptRule {
    std::optional<RoleKind> role; // absent: any role
    std::vector<std::string> contains;
    std::vector<std::string> excludes;
    /// Replies in order, per conversation; the last one repeats.
    std::vector<std::string> responses;
    /// When set, the rule fails the call with this ProviderError message.
    std::optional<std::string> error;
};

/// Deterministic chat provider driven by a rule script.
///
/// Script JSON: {"name": ..., "model": ..., "rules": [{"role": "grader",
/// "contains": [...], "excludes": [...], "response": <text or object>,
/// "responses": [<text or object>, ...], "error": "..."}]}.
/// Object-valued responses are serialized to compact JSON.
class ScriptedProvider final : public ChatProvider {
public:
    explicit ScriptedProvider(std::vector<ScriptRule> rules, std::string name = "scripted",
                              std::string model = "script");
    ScriptedProvider(ScriptedProvider&& other) noexcept
        : rules_(std::move(other.rules_)), name_(std::move(other.name_)), model_(std::move(other.model_)),
          cursor_(std::move(other.cursor_)), calls_(other.calls_) {}

    static ScriptedProvider from_json(const Json& script);
    static ScriptedProvider from_file(const std::string& path);

    std::string name() const override { return name_; }
    std::string model_id() const override { return model_; }
    std::string complete(const ChatRequest& request) override;

    /// Number of complete() calls served so far.
    std::size_t calls() const;

private:
    std::vector<ScriptRule> rules_;
    std::string name_;
    std::string model_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::size_t, std::string>, std::size_t> cursor_;
    std::size_t calls_ = 0;
};

/// Answers each request with the response recorded for the identical request
/// in a transcript. Identical requests are answered in recorded order.
class ReplayProvider final : public ChatProvider {
public:
    explicit ReplayProvider(const std::vector<TranscriptEntry>& entries);
    ReplayProvider(ReplayProvider&& other) noexcept
        : name_(std::move(other.name_)), model_(std::move(other.model_)), recorded_(std::move(other.recorded_)) {}
    static ReplayProvider from_file(const std::string& path);

    std::string name() const override { return name_; }
    std::string model_id() const override { return model_; }
    std::string complete(const ChatRequest& request) override;

private:
    struct Recorded {
        std::string raw;
        std::optional<std::string> error;
    };
    using Key = std::tuple<RoleKind, std::string, std::string, std::string>;

    std::string name_ = "replay";
    std::string model_ = "replay";
    std::mutex mutex_;
    std::map<Key, std::deque<Recorded>> recorded_;
};

} // namespace vulnreach
