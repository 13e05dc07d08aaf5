#include "vulnreach/transcript.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include "vulnreach/errors.hpp"

namespace vulnreach {

void to_json(Json& j, const TranscriptEntry& e) {
    j = Json{{"seq", e.seq},
             {"role_kind", std::string(to_string(e.role_kind))},
             {"template_version", e.template_version},
             {"template_hash", e.template_hash},
             {"provider_name", e.provider_name},
             {"model_id", e.model_id},
             {"conversation_key", e.conversation_key},
             {"attempt", e.attempt},
             {"system_prompt", e.system_prompt},
             {"rendered_prompt", e.rendered_prompt},
             {"raw_response", e.raw_response},
             {"parsed_response", e.parsed_response},
             {"parse_error", e.parse_error ? Json(*e.parse_error) : Json(nullptr)},
             {"error", e.error ? Json(*e.error) : Json(nullptr)},
             {"timestamp", e.timestamp}};
}

void from_json(const Json& j, TranscriptEntry& e) {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.role_kind = role_kind_from_string(j.at("role_kind").get<std::string>());
    e.template_version = j.value("template_version", std::string{});
    e.template_hash = j.value("template_hash", std::string{});
    e.provider_name = j.value("provider_name", std::string{});
    e.model_id = j.value("model_id", std::string{});
    e.conversation_key = j.value("conversation_key", std::string{});
    e.attempt = j.value("attempt", 1u);
    e.system_prompt = j.value("system_prompt", std::string{});
    e.rendered_prompt = j.at("rendered_prompt").get<std::string>();
    e.raw_response = j.at("raw_response").get<std::string>();
    e.parsed_response = j.value("parsed_response", Json());
    if (auto it = j.find("parse_error"); it != j.end() && !it->is_null())
        e.parse_error = it->get<std::string>();
    else
        e.parse_error.reset();
    if (auto it = j.find("error"); it != j.end() && !it->is_null())
        e.error = it->get<std::string>();
    else
        e.error.reset();
    e.timestamp = j.value("timestamp", std::string{});
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
    return out;
}

void Transcript::attach_sink(const std::string& path) {
    std::lock_guard lock(mutex_);
    sink_ = std::ofstream(path, std::ios::binary | std::ios::trunc);
    if (!sink_)
        throw IoError("cannot write transcript " + path);
    for (const auto& e : entries_)
        sink_ << Json(e).dump() << '\n';
    sink_.flush();
}

std::uint64_t Transcript::append(TranscriptEntry entry) {
    std::lock_guard lock(mutex_);
    entry.seq = entries_.size() + 1;
    if (entry.timestamp.empty())
        entry.timestamp = utc_timestamp();
    if (sink_.is_open()) {
        sink_ << Json(entry).dump() << '\n';
        sink_.flush();
    }
    entries_.push_back(std::move(entry));
    return entries_.back().seq;
}

std::vector<TranscriptEntry> Transcript::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void Transcript::save_jsonl(const std::string& path) const {
    std::string text;
    for (const auto& e : entries())
        text += Json(e).dump() + "\n";
    write_file_atomic(path, text);
}

std::vector<TranscriptEntry> Transcript::load_jsonl(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<TranscriptEntry> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(parse_json_text(line, path + ":" + std::to_string(lineno)).get<TranscriptEntry>());
        } catch (const Json::exception& e) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": bad transcript entry: " + e.what());
        } catch (const std::invalid_argument& e) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": bad transcript entry: " + e.what());
        }
    }
    return out;
}

} // namespace vulnreach
