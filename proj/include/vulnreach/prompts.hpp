#pragma once

#include <array>
#include <map>
#include <set>
#include <string>

#include "vulnreach/chat.hpp"

namespace vulnreach {

using PromptVars = std::map<std::string, std::string>;

/// A fixed prompt with `{{name}}` placeholders.
///
/// Template files start with optional `#` header lines (`# version: N`),
/// followed by a `[system]` section and a `[user]` section.
class PromptTemplate {
public:
    PromptTemplate() = default;
    PromptTemplate(RoleKind role, const std::string& file_text);

    RoleKind role() const noexcept { return role_; }
    const std::string& version() const noexcept { return version_; }
    /// Hex FNV-1a of the full template text.
    const std::string& hash() const noexcept { return hash_; }
    const std::string& system_text() const noexcept { return system_; }
    const std::string& user_text() const noexcept { return user_; }
    std::set<std::string> placeholders() const;

    struct Rendered {
        std::string system;
        std::string user;
    };

    /// Substitutes every placeholder in one pass; substituted values are not
    /// rescanned. Throws ConfigError if a placeholder has no binding.
    Rendered render(const PromptVars& vars) const;

private:
    RoleKind role_ = RoleKind::Grader;
    std::string version_;
    std::string hash_;
    std::string system_;
    std::string user_;
};

class PromptLibrary {
public:
    /// The templates that ship with the tool (compiled in from prompts/).
    static PromptLibrary builtin();
    /// Loads grader.txt, reflection.txt, inference.txt and judge.txt from `dir`.
    static PromptLibrary from_directory(const std::string& dir);

    const PromptTemplate& get(RoleKind role) const { return templates_[static_cast<std::size_t>(role)]; }

private:
    std::array<PromptTemplate, 4> templates_;
};

std::string_view prompt_file_name(RoleKind role) noexcept;

} // namespace vulnreach
