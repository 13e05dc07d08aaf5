#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace vulnreach {

enum class NodeKind {
    CompilationUnit,
    ImportDeclaration,
    FieldDeclaration,
    MethodDeclaration,
    ConstructorDeclaration,
    Other,
};

std::string_view to_string(NodeKind kind) noexcept;
NodeKind node_kind_from_string(std::string_view name);

/// True for the declaration kinds a large compilation unit is split into.
constexpr bool is_split_kind(NodeKind kind) noexcept {
    return kind == NodeKind::ImportDeclaration || kind == NodeKind::FieldDeclaration ||
           kind == NodeKind::MethodDeclaration || kind == NodeKind::ConstructorDeclaration;
}

/// Deterministic block id derived from the block's location and kind.
std::string make_block_id(std::string_view file_path, int line_start, int line_end, NodeKind kind);

/// A contiguous, line-aligned source segment produced by the segmenter.
///
/// `source` holds the exact bytes of lines [line_start, line_end], line
/// terminators included, so the blocks of a file concatenate back to the file.
struct CodeBlock {
    std::string id;
    std::string file_path;
    int line_start = 1;
    int line_end = 1;
    std::string source;
    NodeKind node_kind = NodeKind::Other;
    std::optional<std::string> enclosing_class;
    std::optional<std::string> enclosing_method;
    std::uint32_t size = 0;
    bool oversize = false;

    bool operator==(const CodeBlock&) const = default;
};

/// Orders blocks by (file_path, line_start), then id.
bool block_location_less(const CodeBlock& a, const CodeBlock& b) noexcept;

/// Fixed-dimension vector with unit Euclidean norm.
template <typename Scalar>
class BasicEmbedding {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    static constexpr Scalar kNormTolerance = Scalar(1e-6);

    BasicEmbedding() = default;

    /// Normalizes `raw`; throws std::invalid_argument for empty or zero vectors.
    static BasicEmbedding normalized(const Eigen::Ref<const Vector>& raw);

    /// Adopts `unit` as-is; throws std::invalid_argument unless its norm is 1 within tolerance.
    static BasicEmbedding from_unit(Vector unit);

    Eigen::Index dims() const noexcept { return values_.size(); }
    const Vector& values() const noexcept { return values_; }
    bool empty() const noexcept { return values_.size() == 0; }

    bool operator==(const BasicEmbedding& other) const {
        return values_.size() == other.values_.size() && values_ == other.values_;
    }

private:
    explicit BasicEmbedding(Vector v) : values_(std::move(v)) {}
    Vector values_;
};

using EmbeddingVector = BasicEmbedding<double>;

/// Cosine similarity of two unit vectors, computed as their dot product.
template <typename Scalar>
Scalar cosine(const BasicEmbedding<Scalar>& a, const BasicEmbedding<Scalar>& b) {
    return a.values().dot(b.values());
}

struct VulnSpec {
    std::string vuln_id;
    std::string library;
    std::vector<std::string> api_signatures;
    std::string pov_test_source;
    std::optional<std::string> description;

    /// Throws std::invalid_argument when a required field is empty.
    void validate() const;

    bool operator==(const VulnSpec&) const = default;
};

enum class MatchedBy { ApiSimilarity, TestSimilarity, Both, ContextExpansion };

std::string_view to_string(MatchedBy m) noexcept;
MatchedBy matched_by_from_string(std::string_view name);

/// A block under analysis plus the context gathered for it. The context always
/// starts with the anchor and can only grow.
class Candidate {
public:
    Candidate() = default;
    Candidate(CodeBlock anchor, MatchedBy matched_by, double similarity_api, double similarity_test);

    const CodeBlock& anchor() const noexcept { return context_.front(); }
    const std::vector<CodeBlock>& context() const noexcept { return context_; }
    MatchedBy matched_by() const noexcept { return matched_by_; }
    double similarity_api() const noexcept { return similarity_api_; }
    double similarity_test() const noexcept { return similarity_test_; }

    bool contains(std::string_view block_id) const noexcept;

    /// Appends `block` unless a block with the same id is present. Returns whether it was added.
    bool add_context(CodeBlock block);

    bool operator==(const Candidate&) const = default;

private:
    std::vector<CodeBlock> context_;
    MatchedBy matched_by_ = MatchedBy::ApiSimilarity;
    double similarity_api_ = 0.0;
    double similarity_test_ = 0.0;
};

enum class Judgment { Secure, Vulnerable };

std::string_view to_string(Judgment j) noexcept;
Judgment judgment_from_string(std::string_view name);

/// Project verdict rule: Vulnerable iff any judgment is Vulnerable.
Judgment aggregate(std::span<const Judgment> judgments) noexcept;

enum class TerminationReason { Complete, NoNewBlocks, IterationCap };

std::string_view to_string(TerminationReason r) noexcept;
TerminationReason termination_reason_from_string(std::string_view name);

struct CandidateJudgment {
    std::string candidate_id;
    std::string file_path;
    int line_start = 0;
    int line_end = 0;
    MatchedBy matched_by = MatchedBy::ApiSimilarity;
    double similarity_api = 0.0;
    double similarity_test = 0.0;
    std::vector<std::string> context_ids;
    TerminationReason termination = TerminationReason::Complete;
    Judgment judgment = Judgment::Secure;
    std::string rationale;

    bool operator==(const CandidateJudgment&) const = default;
};

struct Verdict {
    std::string project_id;
    std::string vuln_id;
    std::vector<CandidateJudgment> per_candidate;
    Judgment project_judgment = Judgment::Secure;
    std::string transcript_path;

    /// Recomputes project_judgment from per_candidate.
    void finalize();

    bool operator==(const Verdict&) const = default;
};

} // namespace vulnreach

#include "vulnreach/core_impl.hpp"
