#include "vulnreach/evalharness.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "vulnreach/errors.hpp"
#include "vulnreach/hash.hpp"
#include "vulnreach/indexer.hpp"
#include "vulnreach/transcript.hpp"

namespace vulnreach {

namespace fs = std::filesystem;

const VulnSpec& BenchmarkManifest::vuln(const std::string& id) const {
    for (const auto& v : vulns)
        if (v.vuln_id == id)
            return v;
    throw ManifestError("unknown vuln_ref " + id);
}

void BenchmarkManifest::validate() const {
    std::set<std::string> vuln_ids;
    for (const auto& v : vulns) {
        try {
            v.validate();
        } catch (const std::invalid_argument& e) {
            throw ManifestError("vuln " + v.vuln_id + ": " + e.what());
        }
        if (!vuln_ids.insert(v.vuln_id).second)
            throw ManifestError("duplicate vuln_id " + v.vuln_id);
    }
    std::set<std::string> project_ids;
    for (const auto& p : projects) {
        if (p.project_id.empty())
            throw ManifestError("project with empty project_id");
        if (!project_ids.insert(p.project_id).second)
            throw ManifestError("duplicate project_id " + p.project_id);
        for (const auto& ref : p.vuln_refs)
            if (!vuln_ids.count(ref))
                throw ManifestError("project " + p.project_id + " references unknown vuln " + ref);
    }
}

BenchmarkManifest BenchmarkManifest::from_json(const Json& j, const fs::path& base_dir) {
    BenchmarkManifest m;
    try {
        for (const Json& v : j.at("vulns")) {
            Json spec = v;
            // The PoV test may live in its own file next to the manifest.
            if (auto it = v.find("pov_test_file"); it != v.end()) {
                spec["pov_test_source"] = read_file((base_dir / it->get<std::string>()).string());
                spec.erase("pov_test_file");
            }
            m.vulns.push_back(spec.get<VulnSpec>());
        }
        for (const Json& p : j.at("projects")) {
            ManifestProject mp;
            p.at("project_id").get_to(mp.project_id);
            mp.root_path = (base_dir / p.at("root_path").get<std::string>()).lexically_normal();
            mp.ground_truth = p.at("ground_truth").get<Judgment>();
            p.at("vuln_refs").get_to(mp.vuln_refs);
            m.projects.push_back(std::move(mp));
        }
    } catch (const Json::exception& e) {
        throw ManifestError(std::string("invalid manifest: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ManifestError(std::string("invalid manifest: ") + e.what());
    } catch (const IoError& e) {
        throw ManifestError(std::string("invalid manifest: ") + e.what());
    }
    m.validate();
    return m;
}

BenchmarkManifest BenchmarkManifest::load(const fs::path& path) {
    Json j;
    try {
        j = read_json_file(path.string());
    } catch (const FormatError& e) {
        throw ManifestError(e.what());
    } catch (const IoError& e) {
        throw ManifestError(e.what());
    }
    return from_json(j, path.parent_path());
}

void to_json(Json& j, const ConfusionMatrix& cm) {
    j = Json{{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

void from_json(const Json& j, ConfusionMatrix& cm) {
    j.at("tp").get_to(cm.tp);
    j.at("fp").get_to(cm.fp);
    j.at("tn").get_to(cm.tn);
    j.at("fn").get_to(cm.fn);
}

void to_json(Json& j, const Metrics& m) {
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    j = Json{{"precision", opt(m.precision)},
             {"recall", opt(m.recall)},
             {"accuracy", opt(m.accuracy)},
             {"f1", opt(m.f1)}};
}

ConfusionMatrix score(const std::map<std::string, Judgment>& predictions, const BenchmarkManifest& manifest) {
    ConfusionMatrix cm;
    for (const auto& p : manifest.projects) {
        auto it = predictions.find(p.project_id);
        if (it == predictions.end())
            throw MissingPrediction(p.project_id);
        const bool predicted = it->second == Judgment::Vulnerable;
        const bool actual = p.ground_truth == Judgment::Vulnerable;
        if (predicted && actual)
            ++cm.tp;
        else if (predicted)
            ++cm.fp;
        else if (actual)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

std::optional<double> f1_score(double precision, double recall) noexcept {
    if (precision + recall == 0.0)
        return std::nullopt;
    return 2.0 * precision * recall / (precision + recall);
}

Metrics metrics(const ConfusionMatrix& cm) noexcept {
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0)
            return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    Metrics m;
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    m.recall = ratio(cm.tp, cm.tp + cm.fn);
    m.accuracy = ratio(cm.tp + cm.tn, cm.total());
    if (m.precision && m.recall)
        m.f1 = f1_score(*m.precision, *m.recall);
    return m;
}

std::string format_metric(const std::optional<double>& value) {
    if (!value)
        return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *value);
    return buf;
}

namespace {

struct ProjectIndex {
    VectorStore store;
    std::size_t block_count = 0;
};

ProjectIndex load_or_build_index(const ManifestProject& project, const PipelineConfig& cfg, EncoderProvider& encoder) {
    ProjectSegments seg = segment_project(project.root_path, cfg.segmenter);
    const std::string hash = corpus_hash(seg.blocks);
    if (cfg.cache_dir.empty())
        return {index_blocks(seg.blocks, cfg.segmenter.theta, encoder), seg.blocks.size()};

    std::uint64_t key = fnv1a64(hash);
    key = fnv1a64("|" + std::to_string(cfg.segmenter.theta) + "|", key);
    key = fnv1a64(encoder.name(), key);
    const fs::path path = cfg.cache_dir / (to_hex(key) + ".vrx");
    if (fs::exists(path)) {
        try {
            VectorStore cached = VectorStore::open(path.string());
            const IndexInfo& info = cached.info();
            if (info.corpus_hash == hash && info.theta == cfg.segmenter.theta && info.encoder == encoder.name())
                return {std::move(cached), seg.blocks.size()};
        } catch (const FormatError&) {
            // Rebuilt below.
        }
    }
    fs::create_directories(cfg.cache_dir);
    return {index_blocks(seg.blocks, cfg.segmenter.theta, encoder, path.string()), seg.blocks.size()};
}

std::string safe_name(std::string s) {
    for (char& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
            c = '_';
    return s;
}

ProjectRow run_project(const BenchmarkManifest& manifest, const ManifestProject& project, const PipelineConfig& cfg,
                       const PipelineProviders& providers) {
    ProjectRow row;
    row.project_id = project.project_id;
    row.ground_truth = project.ground_truth;
    try {
        auto encoder = providers.make_encoder();
        auto chat = providers.make_chat();
        ProjectIndex index = load_or_build_index(project, cfg, *encoder);
        row.block_count = index.block_count;

        std::vector<Judgment> judgments;
        for (const auto& ref : project.vuln_refs) {
            const VulnSpec& vuln = manifest.vuln(ref);
            Transcript transcript;
            std::string transcript_name;
            if (!cfg.transcript_dir.empty()) {
                fs::create_directories(cfg.transcript_dir);
                transcript_name = safe_name(project.project_id) + "__" + safe_name(vuln.vuln_id) + ".jsonl";
                transcript.attach_sink((cfg.transcript_dir / transcript_name).string());
            }
            LlmGateway gateway(*chat, providers.prompts, transcript, cfg.gateway);
            Verdict v = analyze(DetectorDeps{index.store, *encoder, gateway}, vuln, cfg.detector, project.project_id);
            v.transcript_path = transcript_name;
            judgments.push_back(v.project_judgment);
            row.verdicts.push_back(std::move(v));
        }
        row.predicted = aggregate(judgments);
    } catch (const std::exception& e) {
        row.predicted.reset();
        row.verdicts.clear();
        row.failure = e.what();
    }
    return row;
}

} // namespace

BenchmarkReport run_benchmark(const BenchmarkManifest& manifest, const PipelineConfig& cfg,
                              const PipelineProviders& providers) {
    manifest.validate();
    cfg.segmenter.validate();
    cfg.detector.validate();

    std::vector<ProjectRow> rows(manifest.projects.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++)
            rows[i] = run_project(manifest, manifest.projects[i], cfg, providers);
    };
    {
        std::vector<std::jthread> pool;
        const unsigned n = std::max(1u, std::min<unsigned>(cfg.project_parallelism,
                                                           static_cast<unsigned>(rows.size())));
        for (unsigned i = 0; i < n; ++i)
            pool.emplace_back(worker);
    }

    BenchmarkReport report;
    report.theta = cfg.segmenter.theta;
    report.tau = cfg.detector.tau;
    report.config_echo = cfg.config_echo;
    for (const auto& row : rows) {
        if (!row.predicted)
            continue;
        const bool predicted = *row.predicted == Judgment::Vulnerable;
        const bool actual = row.ground_truth == Judgment::Vulnerable;
        ++(predicted ? (actual ? report.cm.tp : report.cm.fp) : (actual ? report.cm.fn : report.cm.tn));
    }
    report.rows = std::move(rows);
    report.metrics = metrics(report.cm);
    return report;
}

Json BenchmarkReport::to_json() const {
    Json j;
    j["theta"] = theta;
    j["tau"] = tau;
    j["config"] = config_echo;
    Json rows_json = Json::array();
    std::size_t failed = 0;
    for (const auto& r : rows) {
        Json row{{"project_id", r.project_id},
                 {"ground_truth", r.ground_truth},
                 {"predicted", r.predicted ? Json(*r.predicted) : Json(nullptr)},
                 {"status", r.predicted ? "ok" : "failed to run"},
                 {"block_count", r.block_count},
                 {"verdicts", r.verdicts}};
        if (r.failure) {
            row["failure"] = *r.failure;
            ++failed;
        }
        rows_json.push_back(std::move(row));
    }
    j["projects"] = std::move(rows_json);
    j["failed_projects"] = failed;
    j["confusion_matrix"] = cm;
    j["metrics"] = metrics;
    j["note"] = "projects that failed to run are excluded from the confusion matrix";
    return j;
}

std::string BenchmarkReport::render_table() const {
    std::size_t width = std::string("Project").size();
    for (const auto& r : rows)
        width = std::max(width, r.project_id.size());
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    std::ostringstream out;
    out << "theta=" << theta << " tau=" << format_metric(tau) << "\n";
    out << pad("Project", width) << "  " << pad("Truth", 10) << "  " << pad("Predicted", 10) << "  "
        << pad("Blocks", 6) << "  Correct\n";
    for (const auto& r : rows) {
        const std::string predicted = r.predicted ? std::string(to_string(*r.predicted)) : "-";
        const std::string correct = r.predicted ? (*r.predicted == r.ground_truth ? "yes" : "no") : "-";
        out << pad(r.project_id, width) << "  " << pad(std::string(to_string(r.ground_truth)), 10) << "  "
            << pad(predicted, 10) << "  " << pad(std::to_string(r.block_count), 6) << "  " << correct << "\n";
    }
    out << "\nTP=" << cm.tp << " FP=" << cm.fp << " TN=" << cm.tn << " FN=" << cm.fn << "\n";
    out << "Precision " << format_metric(metrics.precision) << "\n";
    out << "Recall    " << format_metric(metrics.recall) << "\n";
    out << "Accuracy  " << format_metric(metrics.accuracy) << "\n";
    out << "F1        " << format_metric(metrics.f1) << "\n";
    return out.str();
}

} // namespace vulnreach
