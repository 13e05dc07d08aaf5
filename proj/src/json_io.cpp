#include "vulnreach/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vulnreach/errors.hpp"

namespace vulnreach {

namespace fs = std::filesystem;

void to_json(Json& j, NodeKind k) { j = std::string(to_string(k)); }
void from_json(const Json& j, NodeKind& k) { k = node_kind_from_string(j.get<std::string>()); }
void to_json(Json& j, MatchedBy m) { j = std::string(to_string(m)); }
void from_json(const Json& j, MatchedBy& m) { m = matched_by_from_string(j.get<std::string>()); }
void to_json(Json& j, Judgment v) { j = std::string(to_string(v)); }
void from_json(const Json& j, Judgment& v) { v = judgment_from_string(j.get<std::string>()); }
void to_json(Json& j, TerminationReason r) { j = std::string(to_string(r)); }
void from_json(const Json& j, TerminationReason& r) { r = termination_reason_from_string(j.get<std::string>()); }

namespace {

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& value) {
    j[key] = value ? Json(*value) : Json(nullptr);
}

template <typename T>
void get_optional(const Json& j, const char* key, std::optional<T>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        out.reset();
    else
        out = it->template get<T>();
}

} // namespace

void to_json(Json& j, const CodeBlock& b) {
    j = Json{{"id", b.id},
             {"file_path", b.file_path},
             {"line_start", b.line_start},
             {"line_end", b.line_end},
             {"node_kind", b.node_kind},
             {"size", b.size},
             {"oversize", b.oversize},
             {"source", b.source}};
    put_optional(j, "enclosing_class", b.enclosing_class);
    put_optional(j, "enclosing_method", b.enclosing_method);
}

void from_json(const Json& j, CodeBlock& b) {
    j.at("id").get_to(b.id);
    j.at("file_path").get_to(b.file_path);
    j.at("line_start").get_to(b.line_start);
    j.at("line_end").get_to(b.line_end);
    j.at("node_kind").get_to(b.node_kind);
    j.at("size").get_to(b.size);
    b.oversize = j.value("oversize", false);
    j.at("source").get_to(b.source);
    get_optional(j, "enclosing_class", b.enclosing_class);
    get_optional(j, "enclosing_method", b.enclosing_method);
}

void to_json(Json& j, const EmbeddingVector& v) {
    j = Json::array();
    for (Eigen::Index i = 0; i < v.dims(); ++i)
        j.push_back(v.values()[i]);
}

void from_json(const Json& j, EmbeddingVector& v) {
    auto raw = j.get<std::vector<double>>();
    v = EmbeddingVector::from_unit(Eigen::Map<const Eigen::VectorXd>(raw.data(), Eigen::Index(raw.size())));
}

void to_json(Json& j, const VulnSpec& v) {
    j = Json{{"vuln_id", v.vuln_id},
             {"library", v.library},
             {"api_signatures", v.api_signatures},
             {"pov_test_source", v.pov_test_source}};
    if (v.description)
        j["description"] = *v.description;
}

void from_json(const Json& j, VulnSpec& v) {
    j.at("vuln_id").get_to(v.vuln_id);
    v.library = j.value("library", std::string{});
    j.at("api_signatures").get_to(v.api_signatures);
    j.at("pov_test_source").get_to(v.pov_test_source);
    get_optional(j, "description", v.description);
}

void to_json(Json& j, const Candidate& c) {
    j = Json{{"anchor", c.anchor()},
             {"context", c.context()},
             {"matched_by", c.matched_by()},
             {"similarity_api", c.similarity_api()},
             {"similarity_test", c.similarity_test()}};
}

void from_json(const Json& j, Candidate& c) {
    Candidate out(j.at("anchor").get<CodeBlock>(), j.at("matched_by").get<MatchedBy>(),
                  j.at("similarity_api").get<double>(), j.at("similarity_test").get<double>());
    for (const auto& b : j.at("context"))
        out.add_context(b.get<CodeBlock>());
    c = std::move(out);
}

void to_json(Json& j, const CandidateJudgment& c) {
    j = Json{{"candidate_id", c.candidate_id},
             {"file_path", c.file_path},
             {"line_start", c.line_start},
             {"line_end", c.line_end},
             {"matched_by", c.matched_by},
             {"similarity_api", c.similarity_api},
             {"similarity_test", c.similarity_test},
             {"context_ids", c.context_ids},
             {"termination", c.termination},
             {"judgment", c.judgment},
             {"rationale", c.rationale}};
}

void from_json(const Json& j, CandidateJudgment& c) {
    j.at("candidate_id").get_to(c.candidate_id);
    c.file_path = j.value("file_path", std::string{});
    c.line_start = j.value("line_start", 0);
    c.line_end = j.value("line_end", 0);
    c.matched_by = j.value("matched_by", MatchedBy::ApiSimilarity);
    c.similarity_api = j.value("similarity_api", 0.0);
    c.similarity_test = j.value("similarity_test", 0.0);
    c.context_ids = j.value("context_ids", std::vector<std::string>{});
    c.termination = j.value("termination", TerminationReason::Complete);
    j.at("judgment").get_to(c.judgment);
    j.at("rationale").get_to(c.rationale);
}

void to_json(Json& j, const Verdict& v) {
    j = Json{{"project_id", v.project_id},
             {"vuln_id", v.vuln_id},
             {"per_candidate", v.per_candidate},
             {"project_judgment", v.project_judgment},
             {"transcript_path", v.transcript_path}};
}

void from_json(const Json& j, Verdict& v) {
    j.at("project_id").get_to(v.project_id);
    j.at("vuln_id").get_to(v.vuln_id);
    j.at("per_candidate").get_to(v.per_candidate);
    j.at("project_judgment").get_to(v.project_judgment);
    v.transcript_path = j.value("transcript_path", std::string{});
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("read failed: " + path);
    return std::move(ss).str();
}

void write_file_atomic(const std::string& path, const std::string& text) {
    const fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out)
            throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // e.byte is 1-based and points just past the offending character.
        std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
        offset = std::min(offset, text.size());
        int line = 1;
        int column = 1;
        for (std::size_t i = 0; i < offset; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw FormatError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": invalid JSON: " + e.what());
    }
}

Json read_json_file(const std::string& path) { return parse_json_text(read_file(path), path); }

VulnSpec load_vulnspec(const std::string& path) {
    const Json j = read_json_file(path);
    VulnSpec spec;
    try {
        spec = j.get<VulnSpec>();
        spec.validate();
    } catch (const Json::exception& e) {
        throw FormatError(path + ": invalid vulnspec: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(path + ": invalid vulnspec: " + e.what());
    }
    return spec;
}

} // namespace vulnreach
