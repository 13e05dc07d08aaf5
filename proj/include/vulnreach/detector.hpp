#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vulnreach/core.hpp"
#include "vulnreach/embedding.hpp"
#include "vulnreach/gateway.hpp"
#include "vulnreach/vector_store.hpp"

namespace vulnreach {

struct DetectorConfig {
    /// Cosine threshold for the similarity prefilter. Not published; swept by the harness.
    double tau = 0.35;
    std::size_t top_k = 10;
    /// Upper bound on reflection calls per candidate.
    unsigned max_iterations = 5;
    unsigned parallelism = 1;
    RetryPolicy retry{};

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

/// Everything one analysis talks to. The store is only read.
struct DetectorDeps {
    const VectorStore& store;
    EncoderProvider& encoder;
    LlmGateway& gateway;
};

/// Blocks similar to an API signature or to the PoV test (score > tau) that the
/// grader confirms call the API, ordered by location.
/// Throws EmptyIndex for an empty store.
std::vector<Candidate> identify_candidates(DetectorDeps deps, const VulnSpec& vuln, const DetectorConfig& cfg);

struct ContextResult {
    Candidate candidate;
    TerminationReason termination = TerminationReason::Complete;
    unsigned reflection_calls = 0;
    unsigned inference_calls = 0;
    unsigned searches = 0;
    /// Blocks appended to the context, in retrieval order.
    std::vector<CodeBlock> discovered;
};

/// Reflection loop: ask whether the context suffices; if not, infer the
/// missing code, search for it within the suggested scope and append the new
/// hits. Stops when the model reports the context complete, when a search
/// brings nothing new, or after max_iterations reflection calls.
ContextResult complete_context(DetectorDeps deps, Candidate candidate, const VulnSpec& vuln,
                               const DetectorConfig& cfg);

/// Full analysis of one project against one vulnerability. Blocks discovered
/// while completing a context join the candidate pool (once per block id) and
/// are judged like the others. The project is Vulnerable iff any candidate is.
/// Any provider failure aborts the analysis.
Verdict analyze(DetectorDeps deps, const VulnSpec& vuln, const DetectorConfig& cfg, const std::string& project_id);

} // namespace vulnreach
