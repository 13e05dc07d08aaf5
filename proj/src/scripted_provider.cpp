#include "vulnreach/scripted_provider.hpp"

#include "vulnreach/errors.hpp"

namespace vulnreach {

namespace {

std::string response_text(const Json& value) { return value.is_string() ? value.get<std::string>() : value.dump(); }

std::vector<std::string> string_list(const Json& rule, const char* key) {
    auto it = rule.find(key);
    if (it == rule.end())
        return {};
    if (it->is_string())
        return {it->get<std::string>()};
    return it->get<std::vector<std::string>>();
}

} // namespace

ScriptedProvider::ScriptedProvider(std::vector<ScriptRule> rules, std::string name, std::string model)
    : rules_(std::move(rules)), name_(std::move(name)), model_(std::move(model)) {
    for (const auto& r : rules_)
        if (r.responses.empty() && !r.error)
            throw ConfigError("script rule has neither responses nor error");
}

ScriptedProvider ScriptedProvider::from_json(const Json& script) {
    try {
        std::vector<ScriptRule> rules;
        for (const Json& r : script.at("rules")) {
            ScriptRule rule;
            if (auto it = r.find("role"); it != r.end() && !it->is_null())
                rule.role = role_kind_from_string(it->get<std::string>());
            rule.contains = string_list(r, "contains");
            rule.excludes = string_list(r, "excludes");
            if (auto it = r.find("response"); it != r.end())
                rule.responses.push_back(response_text(*it));
            if (auto it = r.find("responses"); it != r.end())
                for (const Json& v : *it)
                    rule.responses.push_back(response_text(v));
            if (auto it = r.find("error"); it != r.end())
                rule.error = it->get<std::string>();
            rules.push_back(std::move(rule));
        }
        return ScriptedProvider(std::move(rules), script.value("name", std::string("scripted")),
                                script.value("model", std::string("script")));
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("invalid chat script: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid chat script: ") + e.what());
    }
}

ScriptedProvider ScriptedProvider::from_file(const std::string& path) { return from_json(read_json_file(path)); }

std::string ScriptedProvider::complete(const ChatRequest& request) {
    const std::string haystack = request.system_prompt + "\n" + request.user_prompt;
    std::lock_guard lock(mutex_);
    ++calls_;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        const ScriptRule& rule = rules_[i];
        if (rule.role && *rule.role != request.role)
            continue;
        bool ok = true;
        for (const auto& needle : rule.contains)
            ok = ok && haystack.find(needle) != std::string::npos;
        for (const auto& needle : rule.excludes)
            ok = ok && haystack.find(needle) == std::string::npos;
        if (!ok)
            continue;
        if (rule.error)
            throw ProviderError(-1, *rule.error);
        std::size_t& cursor = cursor_[{i, request.conversation_key}];
        const std::string& reply = rule.responses[std::min(cursor, rule.responses.size() - 1)];
        ++cursor;
        return reply;
    }
    throw ProviderError(-1, "no scripted rule matches this " + std::string(to_string(request.role)) + " request");
}

std::size_t ScriptedProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

ReplayProvider::ReplayProvider(const std::vector<TranscriptEntry>& entries) {
    for (const auto& e : entries) {
        if (name_ == "replay" && !e.provider_name.empty()) {
            name_ = e.provider_name;
            model_ = e.model_id;
        }
        recorded_[Key{e.role_kind, e.conversation_key, e.system_prompt, e.rendered_prompt}].push_back(
            Recorded{e.raw_response, e.error});
    }
}

ReplayProvider ReplayProvider::from_file(const std::string& path) {
    return ReplayProvider(Transcript::load_jsonl(path));
}

std::string ReplayProvider::complete(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    auto it = recorded_.find(Key{request.role, request.conversation_key, request.system_prompt, request.user_prompt});
    if (it == recorded_.end() || it->second.empty())
        throw ProviderError(-1, "transcript has no recorded response for this " +
                                    std::string(to_string(request.role)) + " request");
    Recorded r = std::move(it->second.front());
    it->second.pop_front();
    if (r.error)
        throw ProviderError(-1, *r.error);
    return r.raw;
}

} // namespace vulnreach
