#include "vulnreach/prompts.hpp"

#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "vulnreach/errors.hpp"
#include "vulnreach/hash.hpp"
#include "vulnreach/json_io.hpp"

namespace vulnreach {

// Generated from prompts/*.txt at configure time.
std::string_view builtin_prompt_text(RoleKind role) noexcept;

std::string_view to_string(RoleKind r) noexcept {
    switch (r) {
    case RoleKind::Grader: return "grader";
    case RoleKind::Reflection: return "reflection";
    case RoleKind::Inference: return "inference";
    case RoleKind::Judge: return "judge";
    }
    return "?";
}

RoleKind role_kind_from_string(std::string_view name) {
    for (RoleKind r : {RoleKind::Grader, RoleKind::Reflection, RoleKind::Inference, RoleKind::Judge})
        if (to_string(r) == name)
            return r;
    throw std::invalid_argument("unknown role kind: " + std::string(name));
}

std::string_view prompt_file_name(RoleKind role) noexcept {
    switch (role) {
    case RoleKind::Grader: return "grader.txt";
    case RoleKind::Reflection: return "reflection.txt";
    case RoleKind::Inference: return "inference.txt";
    case RoleKind::Judge: return "judge.txt";
    }
    return "";
}

namespace {

std::string trim_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r'))
        s.pop_back();
    return s;
}

template <typename Fn>
void scan_placeholders(const std::string& text, Fn&& on_match) {
    std::size_t pos = 0;
    while (true) {
        const std::size_t open = text.find("{{", pos);
        if (open == std::string::npos)
            return;
        const std::size_t close = text.find("}}", open + 2);
        if (close == std::string::npos)
            return;
        const std::string name = text.substr(open + 2, close - open - 2);
        const bool valid = !name.empty() && name.find_first_not_of("abcdefghijklmnopqrstuvwxyz_0123456789") ==
                                                std::string::npos;
        if (valid)
            on_match(open, close + 2, name);
        pos = valid ? close + 2 : open + 2;
    }
}

std::string substitute(const std::string& text, const PromptVars& vars) {
    std::string out;
    std::size_t copied = 0;
    scan_placeholders(text, [&](std::size_t begin, std::size_t end, const std::string& name) {
        auto it = vars.find(name);
        if (it == vars.end())
            throw ConfigError("prompt placeholder {{" + name + "}} is not bound");
        out.append(text, copied, begin - copied);
        out += it->second;
        copied = end;
    });
    out.append(text, copied, std::string::npos);
    return out;
}

} // namespace

PromptTemplate::PromptTemplate(RoleKind role, const std::string& file_text)
    : role_(role), hash_(to_hex(fnv1a64(file_text))) {
    std::istringstream in(file_text);
    std::string line;
    std::string* section = nullptr;
    bool saw_system = false;
    bool saw_user = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (section == nullptr && line.rfind('#', 0) == 0) {
            const auto colon = line.find("version:");
            if (colon != std::string::npos) {
                version_ = line.substr(colon + 8);
                version_.erase(0, version_.find_first_not_of(' '));
            }
            continue;
        }
        if (line == "[system]") {
            section = &system_;
            saw_system = true;
            continue;
        }
        if (line == "[user]") {
            section = &user_;
            saw_user = true;
            continue;
        }
        if (section == nullptr) {
            if (line.find_first_not_of(" \t") == std::string::npos)
                continue;
            throw ConfigError(std::string(prompt_file_name(role)) + ": text before the [system] section");
        }
        *section += line;
        *section += '\n';
    }
    if (!saw_system || !saw_user)
        throw ConfigError(std::string(prompt_file_name(role)) + ": needs both [system] and [user] sections");
    system_ = trim_trailing_newlines(system_);
    user_ = trim_trailing_newlines(user_);
}

std::set<std::string> PromptTemplate::placeholders() const {
    std::set<std::string> names;
    auto add = [&](std::size_t, std::size_t, const std::string& name) { names.insert(name); };
    scan_placeholders(system_, add);
    scan_placeholders(user_, add);
    return names;
}

PromptTemplate::Rendered PromptTemplate::render(const PromptVars& vars) const {
    return Rendered{substitute(system_, vars), substitute(user_, vars)};
}

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    for (RoleKind r : {RoleKind::Grader, RoleKind::Reflection, RoleKind::Inference, RoleKind::Judge})
        lib.templates_[static_cast<std::size_t>(r)] = PromptTemplate(r, std::string(builtin_prompt_text(r)));
    return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::string& dir) {
    PromptLibrary lib;
    for (RoleKind r : {RoleKind::Grader, RoleKind::Reflection, RoleKind::Inference, RoleKind::Judge}) {
        const auto path = std::filesystem::path(dir) / prompt_file_name(r);
        lib.templates_[static_cast<std::size_t>(r)] = PromptTemplate(r, read_file(path.string()));
    }
    return lib;
}

} // namespace vulnreach
