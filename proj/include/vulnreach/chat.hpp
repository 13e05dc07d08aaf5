#pragma once

#include <string>
#include <string_view>

namespace vulnreach {

enum class RoleKind { Grader, Reflection, Inference, Judge };

std::string_view to_string(RoleKind r) noexcept;
RoleKind role_kind_from_string(std::string_view name);

struct ChatRequest {
    RoleKind role = RoleKind::Grader;
    std::string system_prompt;
    std::string user_prompt;
    /// Groups the calls that belong to one candidate (its anchor block id).
    std::string conversation_key;
    double temperature = 0.0;
    unsigned max_output_tokens = 1024;
};

/// A chat-completion backend. Pipeline calls always run at temperature 0.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;

    virtual std::string name() const = 0;
    virtual std::string model_id() const = 0;
    virtual unsigned max_output_tokens() const { return 1024; }
    double temperature() const noexcept { return 0.0; }

    /// Returns the raw assistant text. Throws ProviderError on failure.
    virtual std::string complete(const ChatRequest& request) = 0;
};

} // namespace vulnreach
