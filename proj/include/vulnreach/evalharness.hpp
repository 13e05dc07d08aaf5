#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vulnreach/core.hpp"
#include "vulnreach/detector.hpp"
#include "vulnreach/embedding.hpp"
#include "vulnreach/json_io.hpp"
#include "vulnreach/segmenter.hpp"

namespace vulnreach {

struct ManifestProject {
    std::string project_id;
    std::filesystem::path root_path; // resolved against the manifest directory
    Judgment ground_truth = Judgment::Secure;
    std::vector<std::string> vuln_refs;
};

struct BenchmarkManifest {
    std::vector<ManifestProject> projects;
    std::vector<VulnSpec> vulns;

    const VulnSpec& vuln(const std::string& id) const;

    /// Throws ManifestError on duplicate ids or dangling references.
    void validate() const;

    /// Throws ManifestError (with line:column for JSON syntax errors).
    static BenchmarkManifest load(const std::filesystem::path& path);
    static BenchmarkManifest from_json(const Json& j, const std::filesystem::path& base_dir);
};

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Undefined ratios (zero denominator) are nullopt.
struct Metrics {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> accuracy;
    std::optional<double> f1;
};

void to_json(Json& j, const ConfusionMatrix& cm);
void from_json(const Json& j, ConfusionMatrix& cm);
void to_json(Json& j, const Metrics& m);

/// Throws MissingPrediction when a manifest project has no prediction.
ConfusionMatrix score(const std::map<std::string, Judgment>& predictions, const BenchmarkManifest& manifest);

Metrics metrics(const ConfusionMatrix& cm) noexcept;

/// Harmonic mean of precision and recall; nullopt when both are zero.
std::optional<double> f1_score(double precision, double recall) noexcept;

/// Fixed three-decimal rendering; "n/a" for undefined values.
std::string format_metric(const std::optional<double>& value);

/// Factories so each worker can own its providers.
struct PipelineProviders {
    std::function<std::unique_ptr<EncoderProvider>()> make_encoder;
    std::function<std::unique_ptr<ChatProvider>()> make_chat;
    PromptLibrary prompts = PromptLibrary::builtin();
};

struct PipelineConfig {
    SegmenterConfig segmenter;
    DetectorConfig detector;
    GatewayOptions gateway;
    /// Projects evaluated concurrently.
    unsigned project_parallelism = 1;
    /// Where per-(project, vuln) indexes are cached; empty disables the cache.
    std::filesystem::path cache_dir;
    /// Transcripts are written here as <project>__<vuln>.jsonl when set.
    std::filesystem::path transcript_dir;
    /// Copied verbatim into the report.
    Json config_echo = Json::object();
};

struct ProjectRow {
    std::string project_id;
    Judgment ground_truth = Judgment::Secure;
    std::optional<Judgment> predicted; // empty when the project failed to run
    std::vector<Verdict> verdicts;
    std::size_t block_count = 0;
    std::optional<std::string> failure;
};

struct BenchmarkReport {
    unsigned theta = 0;
    double tau = 0.0;
    std::vector<ProjectRow> rows; // manifest order
    ConfusionMatrix cm;
    Metrics metrics;
    Json config_echo;

    Json to_json() const;
    /// Plain-text per-project table followed by the confusion matrix and metrics.
    std::string render_table() const;
};

/// Runs index + analyze for every project and referenced vulnerability. Rows
/// that fail are reported and left out of the confusion matrix.
BenchmarkReport run_benchmark(const BenchmarkManifest& manifest, const PipelineConfig& cfg,
                              const PipelineProviders& providers);

inline constexpr std::array<unsigned, 6> kThetaSweep{500, 1000, 1500, 2000, 2500, 3000};

} // namespace vulnreach
