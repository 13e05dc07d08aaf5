#include "vulnreach/gateway.hpp"

#include <algorithm>
#include <cctype>

#include "vulnreach/errors.hpp"

namespace vulnreach {

namespace {

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string block_header(const CodeBlock& b) {
    std::string h = "--- block " + b.id + " | " + b.file_path + ":" + std::to_string(b.line_start) + "-" +
                    std::to_string(b.line_end) + " | " + std::string(to_string(b.node_kind));
    if (b.enclosing_class)
        h += " | class " + *b.enclosing_class;
    if (b.enclosing_method)
        h += " | method " + *b.enclosing_method;
    return h + "\n";
}

std::string with_newline(std::string s) {
    if (s.empty() || s.back() != '\n')
        s.push_back('\n');
    return s;
}

const std::string& string_field(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw MalformedResponse(std::string("field '") + key + "' must be a string");
    return it->get_ref<const std::string&>();
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    if (!it->is_string())
        throw MalformedResponse(std::string("scope field '") + key + "' must be a string or null");
    const auto& s = it->get_ref<const std::string&>();
    if (blank(s))
        return std::nullopt;
    return s;
}

} // namespace

std::string pack_context(std::span<const CodeBlock> blocks, std::size_t max_tokens, const Tokenizer& tokenizer) {
    std::string out;
    std::size_t used = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string piece = block_header(blocks[i]) + with_newline(blocks[i].source);
        const std::size_t cost = tokenizer.count(piece);
        if (used + cost <= max_tokens) {
            out += piece;
            used += cost;
            continue;
        }
        if (i == 0) {
            // Keep as many whole lines of the anchor as fit.
            std::string partial = block_header(blocks[i]);
            std::size_t partial_cost = tokenizer.count(partial);
            std::size_t pos = 0;
            const std::string& src = blocks[i].source;
            while (pos < src.size()) {
                std::size_t nl = src.find('\n', pos);
                nl = nl == std::string::npos ? src.size() : nl + 1;
                const std::string_view line(src.data() + pos, nl - pos);
                const std::size_t c = tokenizer.count(line);
                if (partial_cost + c > max_tokens)
                    break;
                partial.append(line);
                partial_cost += c;
                pos = nl;
            }
            out += with_newline(partial);
            out += "[... block " + blocks[i].id + " truncated after " + std::to_string(pos) + " of " +
                   std::to_string(src.size()) + " bytes: context window limit]\n";
        }
        const std::size_t omitted = blocks.size() - i - 1 + (i == 0 ? 0 : 1);
        if (omitted > 0)
            out += "[... " + std::to_string(omitted) + " more context block(s) omitted: context window limit]\n";
        break;
    }
    return out;
}

Json parse_response_object(const std::string& raw) {
    std::string text = raw;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        throw MalformedResponse("empty response");
    text.erase(0, first);
    text.erase(text.find_last_not_of(" \t\r\n") + 1);
    if (text.rfind("```", 0) == 0) {
        const auto nl = text.find('\n');
        const auto close = text.rfind("```");
        if (nl == std::string::npos || close == std::string::npos || close <= nl)
            throw MalformedResponse("unterminated code fence");
        text = text.substr(nl + 1, close - nl - 1);
    }
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw MalformedResponse(std::string("response is not JSON: ") + e.what());
    }
    if (!j.is_object())
        throw MalformedResponse("response is not a JSON object");
    return j;
}

GradeAnswer parse_grade(const Json& j) {
    const std::string answer = lower(string_field(j, "answer"));
    if (answer == "yes")
        return GradeAnswer::Yes;
    if (answer == "no")
        return GradeAnswer::No;
    throw MalformedResponse("answer must be \"yes\" or \"no\", got \"" + answer + "\"");
}

ReflectionResult parse_reflection(const Json& j) {
    auto it = j.find("complete");
    if (it == j.end() || !it->is_boolean())
        throw MalformedResponse("field 'complete' must be a boolean");
    ReflectionResult r;
    r.complete = it->get<bool>();
    if (auto reason = j.find("reason"); reason != j.end() && !reason->is_null()) {
        if (!reason->is_string())
            throw MalformedResponse("field 'reason' must be a string");
        r.reason = reason->get<std::string>();
    }
    if (!r.complete && blank(r.reason))
        throw MalformedResponse("an incomplete verdict needs a non-empty reason");
    return r;
}

InferenceResult parse_inference(const Json& j) {
    InferenceResult r;
    r.missing_snippet = string_field(j, "missing_code");
    if (blank(r.missing_snippet))
        throw MalformedResponse("field 'missing_code' is empty");
    if (auto scope = j.find("scope"); scope != j.end() && !scope->is_null()) {
        if (!scope->is_object())
            throw MalformedResponse("field 'scope' must be an object or null");
        r.scope.class_name = optional_string(*scope, "class");
        r.scope.method_name = optional_string(*scope, "method");
        r.scope.file_glob = optional_string(*scope, "file");
    }
    return r;
}

JudgeResult parse_judge(const Json& j) {
    JudgeResult r;
    const std::string judgment = lower(string_field(j, "judgment"));
    if (judgment == "vulnerable")
        r.judgment = Judgment::Vulnerable;
    else if (judgment == "secure")
        r.judgment = Judgment::Secure;
    else
        throw MalformedResponse("judgment must be \"vulnerable\" or \"secure\", got \"" + judgment + "\"");
    r.rationale = string_field(j, "rationale");
    if (blank(r.rationale))
        throw MalformedResponse("field 'rationale' is empty");
    return r;
}

LlmGateway::LlmGateway(ChatProvider& provider, const PromptLibrary& prompts, Transcript& transcript,
                       GatewayOptions options)
    : provider_(provider), prompts_(prompts), transcript_(transcript), options_(options) {}

template <typename Result, typename Parse>
Result LlmGateway::ask(RoleKind role, const PromptVars& vars, const std::string& conversation_key, Parse&& parse) {
    const PromptTemplate& tmpl = prompts_.get(role);
    const PromptTemplate::Rendered rendered = tmpl.render(vars);

    ChatRequest request;
    request.role = role;
    request.system_prompt = rendered.system;
    request.user_prompt = rendered.user;
    request.conversation_key = conversation_key;
    request.temperature = provider_.temperature();
    request.max_output_tokens = provider_.max_output_tokens();

    std::string last_error;
    for (unsigned attempt = 1; attempt <= 2; ++attempt) {
        if (attempt == 2)
            request.user_prompt = rendered.user + "\n\nYour previous reply could not be used (" + last_error +
                                  "). Reply again with only the JSON object described above.";

        TranscriptEntry entry;
        entry.role_kind = role;
        entry.template_version = tmpl.version();
        entry.template_hash = tmpl.hash();
        entry.provider_name = provider_.name();
        entry.model_id = provider_.model_id();
        entry.conversation_key = conversation_key;
        entry.attempt = attempt;
        entry.system_prompt = request.system_prompt;
        entry.rendered_prompt = request.user_prompt;

        try {
            entry.raw_response = provider_.complete(request);
        } catch (const ProviderError& e) {
            entry.error = e.what();
            transcript_.append(std::move(entry));
            throw;
        }

        try {
            Json parsed = parse_response_object(entry.raw_response);
            Result result = parse(parsed);
            entry.parsed_response = std::move(parsed);
            transcript_.append(std::move(entry));
            return result;
        } catch (const MalformedResponse& e) {
            last_error = e.what();
            entry.parse_error = last_error;
            transcript_.append(std::move(entry));
        }
    }
    throw MalformedResponse(std::string(to_string(role)) + " response rejected twice: " + last_error);
}

PromptVars LlmGateway::vuln_vars(std::span<const CodeBlock> context, const VulnSpec& vuln) const {
    std::string sigs;
    for (const auto& s : vuln.api_signatures)
        sigs += "- " + s + "\n";
    if (!sigs.empty())
        sigs.pop_back();
    return PromptVars{
        {"vuln_id", vuln.vuln_id},
        {"library", vuln.library.empty() ? std::string("(unspecified library)") : vuln.library},
        {"description", vuln.description.value_or("(none)")},
        {"api_signatures", sigs},
        {"pov_test", vuln.pov_test_source},
        {"context", pack_context(context, options_.max_context_tokens)},
    };
}

GradeAnswer LlmGateway::grade_invocation(const CodeBlock& block, const std::string& api_signature) {
    if (blank(block.source))
        throw std::invalid_argument("cannot grade an empty block");
    PromptVars vars{
        {"api_signature", api_signature},
        {"block_id", block.id},
        {"file_path", block.file_path},
        {"line_start", std::to_string(block.line_start)},
        {"line_end", std::to_string(block.line_end)},
        {"code", block.source},
    };
    return ask<GradeAnswer>(RoleKind::Grader, vars, block.id, parse_grade);
}

ReflectionResult LlmGateway::reflection_query(std::span<const CodeBlock> context, const VulnSpec& vuln) {
    if (context.empty())
        throw std::invalid_argument("reflection needs a non-empty context");
    return ask<ReflectionResult>(RoleKind::Reflection, vuln_vars(context, vuln), context.front().id,
                                 parse_reflection);
}

InferenceResult LlmGateway::code_inference(std::span<const CodeBlock> context, const VulnSpec& vuln,
                                           const std::string& reason) {
    if (context.empty())
        throw std::invalid_argument("inference needs a non-empty context");
    if (blank(reason))
        throw std::invalid_argument("inference needs a non-empty reason");
    PromptVars vars = vuln_vars(context, vuln);
    vars["reason"] = reason;
    return ask<InferenceResult>(RoleKind::Inference, vars, context.front().id, parse_inference);
}

JudgeResult LlmGateway::judge_reachability(const Candidate& candidate, const VulnSpec& vuln) {
    if (candidate.context().empty())
        throw std::invalid_argument("judge needs a non-empty context");
    return ask<JudgeResult>(RoleKind::Judge, vuln_vars(candidate.context(), vuln), candidate.anchor().id,
                            parse_judge);
}

} // namespace vulnreach
