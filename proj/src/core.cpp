#include "vulnreach/core.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>
#include <tuple>

#include "vulnreach/hash.hpp"

namespace vulnreach {

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

namespace {

constexpr std::array<std::pair<NodeKind, std::string_view>, 6> kNodeKindNames{{
    {NodeKind::CompilationUnit, "CompilationUnit"},
    {NodeKind::ImportDeclaration, "ImportDeclaration"},
    {NodeKind::FieldDeclaration, "FieldDeclaration"},
    {NodeKind::MethodDeclaration, "MethodDeclaration"},
    {NodeKind::ConstructorDeclaration, "ConstructorDeclaration"},
    {NodeKind::Other, "Other"},
}};

constexpr std::array<std::pair<MatchedBy, std::string_view>, 4> kMatchedByNames{{
    {MatchedBy::ApiSimilarity, "ApiSimilarity"},
    {MatchedBy::TestSimilarity, "TestSimilarity"},
    {MatchedBy::Both, "Both"},
    {MatchedBy::ContextExpansion, "ContextExpansion"},
}};

constexpr std::array<std::pair<TerminationReason, std::string_view>, 3> kTerminationNames{{
    {TerminationReason::Complete, "Complete"},
    {TerminationReason::NoNewBlocks, "NoNewBlocks"},
    {TerminationReason::IterationCap, "IterationCap"},
}};

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table, Enum value) noexcept {
    for (const auto& [e, name] : table)
        if (e == value)
            return name;
    return "?";
}

template <typename Enum, std::size_t N>
Enum value_of(const std::array<std::pair<Enum, std::string_view>, N>& table, std::string_view name,
              const char* what) {
    for (const auto& [e, n] : table)
        if (n == name)
            return e;
    throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(name));
}

} // namespace

std::string_view to_string(NodeKind kind) noexcept { return name_of(kNodeKindNames, kind); }
NodeKind node_kind_from_string(std::string_view name) { return value_of(kNodeKindNames, name, "node kind"); }

std::string_view to_string(MatchedBy m) noexcept { return name_of(kMatchedByNames, m); }
MatchedBy matched_by_from_string(std::string_view name) { return value_of(kMatchedByNames, name, "matched_by"); }

std::string_view to_string(TerminationReason r) noexcept { return name_of(kTerminationNames, r); }
TerminationReason termination_reason_from_string(std::string_view name) {
    return value_of(kTerminationNames, name, "termination reason");
}

std::string_view to_string(Judgment j) noexcept { return j == Judgment::Vulnerable ? "Vulnerable" : "Secure"; }

Judgment judgment_from_string(std::string_view name) {
    if (name == "Vulnerable")
        return Judgment::Vulnerable;
    if (name == "Secure")
        return Judgment::Secure;
    throw std::invalid_argument("unknown judgment: " + std::string(name));
}

std::string make_block_id(std::string_view file_path, int line_start, int line_end, NodeKind kind) {
    std::string key;
    key.reserve(file_path.size() + 32);
    key.append(file_path);
    key.push_back('\0');
    key += std::to_string(line_start);
    key.push_back(':');
    key += std::to_string(line_end);
    key.push_back('\0');
    key.append(to_string(kind));
    return to_hex(fnv1a64(key));
}

bool block_location_less(const CodeBlock& a, const CodeBlock& b) noexcept {
    return std::tie(a.file_path, a.line_start, a.id) < std::tie(b.file_path, b.line_start, b.id);
}

void VulnSpec::validate() const {
    if (vuln_id.empty())
        throw std::invalid_argument("vuln_id is empty");
    if (api_signatures.empty())
        throw std::invalid_argument("api_signatures is empty");
    for (const auto& sig : api_signatures)
        if (sig.find_first_not_of(" \t\r\n") == std::string::npos)
            throw std::invalid_argument("blank api signature");
    if (pov_test_source.find_first_not_of(" \t\r\n") == std::string::npos)
        throw std::invalid_argument("pov_test_source is empty");
}

Candidate::Candidate(CodeBlock anchor, MatchedBy matched_by, double similarity_api, double similarity_test)
    : matched_by_(matched_by), similarity_api_(similarity_api), similarity_test_(similarity_test) {
    context_.push_back(std::move(anchor));
}

bool Candidate::contains(std::string_view block_id) const noexcept {
    return std::any_of(context_.begin(), context_.end(), [&](const CodeBlock& b) { return b.id == block_id; });
}

bool Candidate::add_context(CodeBlock block) {
    if (contains(block.id))
        return false;
    context_.push_back(std::move(block));
    return true;
}

Judgment aggregate(std::span<const Judgment> judgments) noexcept {
    return std::any_of(judgments.begin(), judgments.end(), [](Judgment j) { return j == Judgment::Vulnerable; })
               ? Judgment::Vulnerable
               : Judgment::Secure;
}

void Verdict::finalize() {
    std::vector<Judgment> js;
    js.reserve(per_candidate.size());
    for (const auto& c : per_candidate)
        js.push_back(c.judgment);
    project_judgment = aggregate(js);
}

} // namespace vulnreach
