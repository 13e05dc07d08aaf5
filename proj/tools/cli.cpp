#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>

#include "vulnreach/config.hpp"
#include "vulnreach/errors.hpp"
#include "vulnreach/evalharness.hpp"
#include "vulnreach/indexer.hpp"
#include "vulnreach/transcript.hpp"

namespace vulnreach::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    unsigned theta = 0;
    double tau = 0;
    std::size_t top_k = 0;
    unsigned max_iterations = 0;
    unsigned parallelism = 0;
    CLI::Option* theta_opt = nullptr;
    CLI::Option* tau_opt = nullptr;
    CLI::Option* top_k_opt = nullptr;
    CLI::Option* max_iterations_opt = nullptr;
    CLI::Option* parallelism_opt = nullptr;
};

void add_config_option(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
}

void add_detector_options(CLI::App* cmd, CommonOptions& o) {
    o.tau_opt = cmd->add_option("--tau", o.tau, "similarity threshold in (0, 1]");
    o.top_k_opt = cmd->add_option("--top-k", o.top_k, "hits kept per search");
    o.max_iterations_opt = cmd->add_option("--max-iterations", o.max_iterations, "reflection calls per candidate");
    o.parallelism_opt = cmd->add_option("--parallelism", o.parallelism, "concurrent candidates (or projects)");
}

/// Defaults, then the config file, then flags.
ToolConfig effective_config(const CommonOptions& o) {
    ToolConfig c = o.config.empty() ? ToolConfig{} : ToolConfig::load(o.config);
    if (o.theta_opt && o.theta_opt->count())
        c.theta = o.theta;
    if (o.tau_opt && o.tau_opt->count())
        c.tau = o.tau;
    if (o.top_k_opt && o.top_k_opt->count())
        c.top_k = o.top_k;
    if (o.max_iterations_opt && o.max_iterations_opt->count())
        c.max_iterations = o.max_iterations;
    if (o.parallelism_opt && o.parallelism_opt->count())
        c.parallelism = o.parallelism;
    return c;
}

std::string relative_to(const fs::path& target, const fs::path& dir) {
    const fs::path rel = fs::absolute(target).lexically_normal().lexically_relative(fs::absolute(dir).lexically_normal());
    return rel.empty() ? target.generic_string() : rel.generic_string();
}

int cmd_index(const CommonOptions& o, const std::string& project, const std::string& out_path,
              const std::string& encoder_name, std::ostream& out, std::ostream& err) {
    ToolConfig cfg = effective_config(o);
    if (!encoder_name.empty())
        cfg.encoder.provider = encoder_name;
    cfg.validate();
    auto encoder = cfg.make_encoder();
    IndexResult r = index_project(project, cfg.segmenter(), *encoder, out_path, cfg.retry());
    for (const auto& e : r.errors)
        err << "warning: skipped " << e.file_path << ": " << e.message << "\n";
    out << "indexed " << r.store.count() << " blocks from " << r.file_count << " files, dims " << r.store.dims()
        << ", encoder " << r.store.info().encoder << " -> " << out_path << "\n";
    return kOk;
}

int cmd_analyze(const CommonOptions& o, const std::string& index_path, const std::string& vuln_path,
                const std::string& report_path, const std::string& replay, std::string transcript_out,
                std::string project_id, std::ostream& out) {
    ToolConfig cfg = effective_config(o);
    if (!replay.empty()) {
        cfg.chat.provider = "replay";
        cfg.chat.transcript = fs::absolute(replay).string();
    }
    cfg.validate();

    const VectorStore store = VectorStore::open(index_path);
    auto encoder = cfg.make_encoder();
    if (store.info().encoder != encoder->name())
        throw ConfigError("index " + index_path + " was built with encoder " + store.info().encoder +
                          " but the configured encoder is " + encoder->name());
    const VulnSpec vuln = load_vulnspec(vuln_path);
    auto chat = cfg.make_chat();
    const PromptLibrary prompts = cfg.prompts();

    if (transcript_out.empty())
        transcript_out = report_path + ".transcript.jsonl";
    if (project_id.empty())
        project_id = fs::path(index_path).stem().string();
    const fs::path report_dir = fs::absolute(report_path).parent_path();

    Transcript transcript;
    if (!fs::absolute(transcript_out).parent_path().empty())
        fs::create_directories(fs::absolute(transcript_out).parent_path());
    transcript.attach_sink(transcript_out);
    LlmGateway gateway(*chat, prompts, transcript, GatewayOptions{cfg.max_context_tokens});

    Verdict verdict = analyze(DetectorDeps{store, *encoder, gateway}, vuln, cfg.detector(), project_id);
    verdict.transcript_path = relative_to(transcript_out, report_dir);

    Json report = verdict;
    report["config"] = cfg.to_json();
    report["index"] = Json{{"encoder", store.info().encoder},
                           {"tokenizer", store.info().tokenizer},
                           {"theta", store.info().theta},
                           {"corpus_hash", store.info().corpus_hash},
                           {"blocks", store.count()}};
    write_file_atomic(report_path, report.dump(2) + "\n");

    out << verdict.project_id << " / " << verdict.vuln_id << ": " << to_string(verdict.project_judgment) << " ("
        << verdict.per_candidate.size() << " candidate" << (verdict.per_candidate.size() == 1 ? "" : "s") << ")\n";
    return verdict.project_judgment == Judgment::Vulnerable ? kVulnerable : kOk;
}

void print_metrics(const Metrics& m, std::ostream& out) {
    out << "precision " << format_metric(m.precision) << "\n"
        << "recall    " << format_metric(m.recall) << "\n"
        << "accuracy  " << format_metric(m.accuracy) << "\n"
        << "f1        " << format_metric(m.f1) << "\n";
}

int evaluate_predictions(const std::string& manifest_path, const std::string& predictions_path,
                         const fs::path& out_dir, std::ostream& out) {
    const Json j = read_json_file(predictions_path);
    ConfusionMatrix cm;
    try {
        if (j.contains("tp")) {
            cm = j.get<ConfusionMatrix>();
        } else {
            if (manifest_path.empty())
                throw ConfigError("--from-predictions with per-project predictions needs --manifest");
            const BenchmarkManifest manifest = BenchmarkManifest::load(manifest_path);
            const Json& preds = j.contains("predictions") ? j.at("predictions") : j;
            std::map<std::string, Judgment> map;
            for (const auto& [id, v] : preds.items())
                map[id] = v.get<Judgment>();
            cm = score(map, manifest);
        }
    } catch (const Json::exception& e) {
        throw ConfigError(predictions_path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(predictions_path + ": " + e.what());
    }
    const Metrics m = metrics(cm);
    fs::create_directories(out_dir);
    write_file_atomic((out_dir / "metrics.json").string(),
                      Json{{"confusion_matrix", cm}, {"metrics", m}}.dump(2) + "\n");
    out << "TP=" << cm.tp << " FP=" << cm.fp << " TN=" << cm.tn << " FN=" << cm.fn << "\n";
    print_metrics(m, out);
    return kOk;
}

std::string grid_label(double tau) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", tau);
    return buf;
}

int cmd_evaluate(const CommonOptions& o, const std::string& manifest_path, const std::string& out_path,
                 bool sweep_theta, std::vector<double> tau_grid, std::ostream& out) {
    ToolConfig cfg = effective_config(o);
    cfg.validate();
    const BenchmarkManifest manifest = BenchmarkManifest::load(manifest_path);
    const fs::path out_dir(out_path);
    fs::create_directories(out_dir);

    std::vector<unsigned> thetas{cfg.theta};
    if (sweep_theta)
        thetas.assign(kThetaSweep.begin(), kThetaSweep.end());
    if (tau_grid.empty())
        tau_grid.push_back(cfg.tau);
    const bool single = thetas.size() == 1 && tau_grid.size() == 1;

    PipelineProviders providers;
    providers.make_encoder = [&cfg] { return cfg.make_encoder(); };
    providers.make_chat = [&cfg] { return cfg.make_chat(); };
    providers.prompts = cfg.prompts();

    Json summary = Json::array();
    for (unsigned theta : thetas) {
        for (double tau : tau_grid) {
            ToolConfig run_cfg = cfg;
            run_cfg.theta = theta;
            run_cfg.tau = tau;
            run_cfg.validate();
            const fs::path run_dir =
                single ? out_dir : out_dir / ("theta-" + std::to_string(theta) + "_tau-" + grid_label(tau));

            PipelineConfig pc;
            pc.segmenter = run_cfg.segmenter();
            pc.detector = run_cfg.detector();
            pc.gateway.max_context_tokens = run_cfg.max_context_tokens;
            pc.project_parallelism = run_cfg.parallelism;
            pc.cache_dir = out_dir / "index-cache";
            pc.transcript_dir = run_dir / "transcripts";
            pc.config_echo = run_cfg.to_json();

            const BenchmarkReport report = run_benchmark(manifest, pc, providers);
            fs::create_directories(run_dir);
            write_file_atomic((run_dir / "report.json").string(), report.to_json().dump(2) + "\n");
            const std::string table = report.render_table();
            write_file_atomic((run_dir / "report.txt").string(), table);
            out << table << "\n";

            std::size_t blocks = 0;
            for (const auto& r : report.rows)
                blocks += r.block_count;
            summary.push_back(Json{{"theta", theta},
                                   {"tau", tau},
                                   {"report", relative_to(run_dir / "report.json", out_dir)},
                                   {"total_blocks", blocks},
                                   {"confusion_matrix", report.cm},
                                   {"metrics", report.metrics}});
        }
    }
    if (!single)
        write_file_atomic((out_dir / "sweep.json").string(), summary.dump(2) + "\n");
    return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Decides whether a Java project reaches a vulnerable library API.", "vulnreach"};
    app.require_subcommand(1);

    CommonOptions index_opts;
    std::string project, index_out, encoder_name;
    auto* index_cmd = app.add_subcommand("index", "segment and embed a project");
    index_cmd->add_option("--project", project, "project root")->required();
    index_cmd->add_option("--out", index_out, "index file to write")->required();
    index_opts.theta_opt = index_cmd->add_option("--theta", index_opts.theta, "block size threshold in tokens");
    index_cmd->add_option("--encoder", encoder_name, "encoder provider (reference, openai)");
    add_config_option(index_cmd, index_opts);

    CommonOptions analyze_opts;
    std::string index_path, vuln_path, report_path, replay, transcript_out, project_id;
    auto* analyze_cmd = app.add_subcommand("analyze", "analyze an indexed project against one vulnerability");
    analyze_cmd->add_option("--index", index_path, "index file")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--vuln", vuln_path, "vulnspec JSON")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--report", report_path, "report JSON to write")->required();
    analyze_cmd->add_option("--transcript", replay, "replay model answers from this transcript")
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--transcript-out", transcript_out, "where to record the transcript");
    analyze_cmd->add_option("--project-id", project_id, "project name for the report (default: index file stem)");
    add_config_option(analyze_cmd, analyze_opts);
    add_detector_options(analyze_cmd, analyze_opts);

    CommonOptions eval_opts;
    std::string manifest_path, eval_out, predictions;
    bool sweep_theta = false;
    std::vector<double> tau_grid;
    auto* eval_cmd = app.add_subcommand("evaluate", "run a benchmark manifest and score it");
    eval_cmd->add_option("--manifest", manifest_path, "benchmark manifest JSON");
    eval_cmd->add_option("--out", eval_out, "output directory")->required();
    eval_cmd->add_flag("--sweep-theta", sweep_theta, "run theta = 500, 1000, ..., 3000");
    eval_cmd->add_option("--tau-grid", tau_grid, "comma-separated tau values")->delimiter(',');
    eval_cmd->add_option("--from-predictions", predictions,
                         "score a confusion matrix or per-project predictions instead of running the pipeline")
        ->check(CLI::ExistingFile);
    eval_opts.theta_opt = eval_cmd->add_option("--theta", eval_opts.theta, "block size threshold in tokens");
    add_config_option(eval_cmd, eval_opts);
    add_detector_options(eval_cmd, eval_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUserError;
    }

    try {
        if (*index_cmd)
            return cmd_index(index_opts, project, index_out, encoder_name, out, err);
        if (*analyze_cmd)
            return cmd_analyze(analyze_opts, index_path, vuln_path, report_path, replay, transcript_out, project_id,
                               out);
        if (!predictions.empty())
            return evaluate_predictions(manifest_path, predictions, eval_out, out);
        if (manifest_path.empty())
            throw ConfigError("evaluate needs --manifest");
        return cmd_evaluate(eval_opts, manifest_path, eval_out, sweep_theta, tau_grid, out);
    } catch (const ProviderError& e) {
        err << "error: " << e.what() << "\n";
        return kProviderError;
    } catch (const MalformedResponse& e) {
        err << "error: " << e.what() << "\n";
        return kProviderError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    }
}

} // namespace vulnreach::cli
