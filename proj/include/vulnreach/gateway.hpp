#pragma once

#include <span>
#include <string>

#include "vulnreach/chat.hpp"
#include "vulnreach/core.hpp"
#include "vulnreach/prompts.hpp"
#include "vulnreach/tokenizer.hpp"
#include "vulnreach/transcript.hpp"
#include "vulnreach/vector_store.hpp"

namespace vulnreach {

enum class GradeAnswer { Yes, No };

struct ReflectionResult {
    bool complete = false;
    std::string reason;
};

struct InferenceResult {
    std::string missing_snippet;
    ScopeFilter scope;
};

struct JudgeResult {
    Judgment judgment = Judgment::Secure;
    std::string rationale;
};

struct GatewayOptions {
    /// Token budget for the rendered context of one prompt.
    std::size_t max_context_tokens = 60000;
};

/// Renders the context blocks into prompt text, anchor first. Blocks that do
/// not fit the budget are dropped (or, for the first block, cut at a line
/// boundary) and an explicit truncation marker is appended.
std::string pack_context(std::span<const CodeBlock> blocks, std::size_t max_tokens,
                         const Tokenizer& tokenizer = default_tokenizer());

/// Typed front end over a ChatProvider for the four pipeline prompts.
///
/// Each call renders its template, asks the provider, and parses the reply
/// against the role's JSON schema. An unparseable reply is re-asked once with
/// the parse error attached; a second failure raises MalformedResponse. Every
/// provider call, failed or not, is appended to the transcript.
class LlmGateway {
public:
    LlmGateway(ChatProvider& provider, const PromptLibrary& prompts, Transcript& transcript,
               GatewayOptions options = {});

    GradeAnswer grade_invocation(const CodeBlock& block, const std::string& api_signature);

    ReflectionResult reflection_query(std::span<const CodeBlock> context, const VulnSpec& vuln);

    InferenceResult code_inference(std::span<const CodeBlock> context, const VulnSpec& vuln,
                                   const std::string& reason);

    JudgeResult judge_reachability(const Candidate& candidate, const VulnSpec& vuln);

    ChatProvider& provider() noexcept { return provider_; }
    Transcript& transcript() noexcept { return transcript_; }

private:
    template <typename Result, typename Parse>
    Result ask(RoleKind role, const PromptVars& vars, const std::string& conversation_key, Parse&& parse);

    PromptVars vuln_vars(std::span<const CodeBlock> context, const VulnSpec& vuln) const;

    ChatProvider& provider_;
    const PromptLibrary& prompts_;
    Transcript& transcript_;
    GatewayOptions options_;
};

/// Strips an optional ``` fence and parses a JSON object; throws MalformedResponse.
Json parse_response_object(const std::string& raw);

GradeAnswer parse_grade(const Json& j);
ReflectionResult parse_reflection(const Json& j);
InferenceResult parse_inference(const Json& j);
JudgeResult parse_judge(const Json& j);

} // namespace vulnreach
