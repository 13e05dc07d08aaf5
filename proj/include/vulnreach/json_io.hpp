#pragma once

// nlohmann/json bindings for the domain types. These define the on-disk
// shapes of vulnspec.json, the index sidecar, and report.json.

#include <json.hpp>

#include "vulnreach/core.hpp"

namespace vulnreach {

using Json = nlohmann::json;

void to_json(Json& j, NodeKind k);
void from_json(const Json& j, NodeKind& k);
void to_json(Json& j, MatchedBy m);
void from_json(const Json& j, MatchedBy& m);
void to_json(Json& j, Judgment v);
void from_json(const Json& j, Judgment& v);
void to_json(Json& j, TerminationReason r);
void from_json(const Json& j, TerminationReason& r);

void to_json(Json& j, const CodeBlock& b);
void from_json(const Json& j, CodeBlock& b);

void to_json(Json& j, const EmbeddingVector& v);
void from_json(const Json& j, EmbeddingVector& v);

void to_json(Json& j, const VulnSpec& v);
void from_json(const Json& j, VulnSpec& v);

void to_json(Json& j, const Candidate& c);
void from_json(const Json& j, Candidate& c);

void to_json(Json& j, const CandidateJudgment& c);
void from_json(const Json& j, CandidateJudgment& c);

void to_json(Json& j, const Verdict& v);
void from_json(const Json& j, Verdict& v);

/// Reads and validates a vulnspec.json document.
VulnSpec load_vulnspec(const std::string& path);

/// Parses JSON text; on failure throws FormatError naming `origin` with line and column.
Json parse_json_text(const std::string& text, const std::string& origin);
Json read_json_file(const std::string& path);

/// Writes `text` to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

} // namespace vulnreach
