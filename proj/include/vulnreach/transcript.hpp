#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vulnreach/chat.hpp"
#include "vulnreach/json_io.hpp"

namespace vulnreach {

struct TranscriptEntry {
    std::uint64_t seq = 0;
    RoleKind role_kind = RoleKind::Grader;
    std::string template_version;
    std::string template_hash;
    std::string provider_name;
    std::string model_id;
    std::string conversation_key;
    unsigned attempt = 1;
    std::string system_prompt;
    std::string rendered_prompt;
    std::string raw_response;
    Json parsed_response; // null when the response did not parse
    std::optional<std::string> parse_error;
    std::optional<std::string> error; // provider failure; raw_response is empty
    std::string timestamp; // UTC, ISO 8601

    bool operator==(const TranscriptEntry&) const = default;
};

void to_json(Json& j, const TranscriptEntry& e);
void from_json(const Json& j, TranscriptEntry& e);

/// Append-only log of model interactions. Appends are serialized and receive
/// a monotone sequence number. With a sink attached, every entry is also
/// written to that file as one JSON line when it is appended.
class Transcript {
public:
    Transcript() = default;
    Transcript(const Transcript&) = delete;
    Transcript& operator=(const Transcript&) = delete;

    /// Streams subsequent entries to `path` (truncates it).
    void attach_sink(const std::string& path);

    /// Stamps seq and timestamp (if empty) and appends; returns the seq.
    std::uint64_t append(TranscriptEntry entry);

    std::vector<TranscriptEntry> entries() const;
    std::size_t size() const;

    void save_jsonl(const std::string& path) const;
    static std::vector<TranscriptEntry> load_jsonl(const std::string& path);

private:
    mutable std::mutex mutex_;
    std::vector<TranscriptEntry> entries_;
    std::ofstream sink_;
};

std::string utc_timestamp();

} // namespace vulnreach
