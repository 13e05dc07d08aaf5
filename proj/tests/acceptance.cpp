// One line per acceptance criterion; exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "support.hpp"
#include "vulnreach/detector.hpp"
#include "vulnreach/evalharness.hpp"
#include "vulnreach/json_io.hpp"
#include "vulnreach/scripted_provider.hpp"

using namespace vulnreach;
using namespace vulnreach::testing;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

bool near(std::optional<double> v, double want, double tol) { return v && std::fabs(*v - want) <= tol; }

std::string fmt(std::optional<double> v) { return format_metric(v); }

Check metrics_reproduction() {
    Check c;
    const Metrics m = metrics(ConfusionMatrix{31, 6, 7, 11});
    c.expect(near(m.precision, 0.838, 5e-4), "precision " + fmt(m.precision));
    c.expect(near(m.recall, 0.738, 5e-4), "recall " + fmt(m.recall));
    c.expect(near(m.accuracy, 0.691, 5e-4), "accuracy " + fmt(m.accuracy));
    c.expect(near(m.f1, 0.785, 5e-4), "f1 " + fmt(m.f1));
    if (c.ok)
        c.detail = "P " + fmt(m.precision) + " R " + fmt(m.recall) + " A " + fmt(m.accuracy) + " F1 " + fmt(m.f1);
    return c;
}

Check baseline_rows() {
    Check c;
    const auto steady = f1_score(0.700, 0.241);
    const auto vascanner = f1_score(0.73, 0.262);
    c.expect(near(steady, 0.359, 1e-3), "steady " + fmt(steady));
    c.expect(near(vascanner, 0.386, 1e-3), "vascanner " + fmt(vascanner));
    if (c.ok)
        c.detail = "steady " + fmt(steady) + " vascanner " + fmt(vascanner);
    return c;
}

Check segmentation_laws() {
    Check c;
    TempDir dir("accept-seg");
    JavaCorpusGenerator gen(2024);
    const auto files = gen.write_corpus(dir.path(), 50);
    c.expect(files.size() == 50, "corpus has " + std::to_string(files.size()) + " files");
    std::size_t blocks = 0;
    for (unsigned theta : kThetaSweep) {
        const auto r = check_segmentation_laws(dir.path(), files, theta);
        c.expect(r.violations.empty(), r.violations.empty() ? "" : r.violations.front());
        blocks += r.blocks;
    }
    const auto mono = check_monotonicity(dir.path(), files, {kThetaSweep.begin(), kThetaSweep.end()});
    c.expect(mono.violations.empty(), mono.violations.empty() ? "" : mono.violations.front());
    if (c.ok)
        c.detail = "50 files, " + std::to_string(blocks) + " blocks over the theta grid";
    return c;
}

Check search_equivalence() {
    Check c;
    std::mt19937 rng(64);
    std::uniform_int_distribution<std::size_t> size(1, 10000);
    std::uniform_real_distribution<double> tau(0.0, 0.3);
    const std::size_t ks[] = {1, 5, 50, 20000};
    std::size_t compared = 0;
    for (int s = 0; s < 200 && c.ok; ++s) {
        const std::size_t n = size(rng);
        std::vector<StoreEntry> entries;
        entries.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            entries.push_back(StoreEntry{synthetic_block(i), random_unit(rng, 64)});
        VectorStore store(64);
        store.insert(entries);
        for (int q = 0; q < 3; ++q) {
            const auto query = random_unit(rng, 64);
            const std::size_t k = ks[rng() % 4];
            const double t = q == 0 ? 0.0 : tau(rng);
            const auto diff = compare_hits(store.search(query, k, t), brute_force_search(entries, query, k, t), 1e-9);
            c.expect(diff.empty(), "store " + std::to_string(s) + ": " + diff);
            ++compared;
        }
    }
    if (c.ok)
        c.detail = std::to_string(compared) + " queries over 200 stores";
    return c;
}

CodeBlock scenario_block(const std::string& file, const std::string& cls, const std::string& method,
                         const std::string& source) {
    CodeBlock b;
    b.file_path = file;
    b.source = source;
    b.line_start = 10;
    b.line_end = 9 + static_cast<int>(std::count(source.begin(), source.end(), '\n'));
    b.node_kind = NodeKind::MethodDeclaration;
    b.enclosing_class = cls;
    b.enclosing_method = method;
    b.size = static_cast<std::uint32_t>(default_tokenizer().count(source));
    b.id = make_block_id(file, b.line_start, b.line_end, b.node_kind);
    return b;
}

struct Scenario {
    explicit Scenario(const Json& rules) : chat(ScriptedProvider::from_json(Json{{"rules", rules}})),
                                           gateway(chat, prompts, transcript) {
        std::vector<StoreEntry> entries;
        for (const auto& b : blocks())
            entries.push_back(StoreEntry{b, reference_encode(b.source, 256)});
        store.insert(entries);
        cfg.tau = 0.35;
        cfg.top_k = 5;
        cfg.max_iterations = 4;
    }

    static std::vector<CodeBlock> blocks() {
        return {
            scenario_block("src/auth/Accounts.java", "Accounts", "register",
                           "void register(String user) {\n    String pwd = readPassword(user);\n"
                           "    store(user, encoder.encode(pwd));\n}\n"),
            scenario_block("src/auth/Accounts.java", "Accounts", "readPassword",
                           "String readPassword(String user) {\n    return form.get(user + \".password\");\n}\n"),
            scenario_block("src/auth/Audit.java", "Audit", "readPasswordAge",
                           "int readPasswordAge(String user) {\n    return ages.get(user + \".password\");\n}\n"),
            scenario_block("src/ui/Banner.java", "Banner", "show",
                           "void show() {\n    System.out.println(\"Welcome\");\n}\n"),
        };
    }

    static VulnSpec vuln() {
        VulnSpec v;
        v.vuln_id = "CVE-SCENARIO";
        v.library = "org.springframework.security:spring-security-crypto";
        v.api_signatures = {"BCryptPasswordEncoder.encode(CharSequence rawPassword)"};
        v.pov_test_source = "@Test\nvoid nullPassword() {\n    assertThrows(IllegalArgumentException.class,"
                            " () -> encoder.encode(null));\n}\n";
        return v;
    }

    ContextResult run() {
        return complete_context(DetectorDeps{store, encoder, gateway},
                                Candidate(blocks()[0], MatchedBy::ApiSimilarity, 0.6, 0.3), vuln(), cfg);
    }

    VectorStore store{256};
    ReferenceEncoder encoder{256};
    ScriptedProvider chat;
    PromptLibrary prompts = PromptLibrary::builtin();
    Transcript transcript;
    LlmGateway gateway;
    DetectorConfig cfg;
};

Check reflection_loop() {
    Check c;
    const Json need_pwd = Json::parse(R"js({"role": "reflection", "responses": [
        {"complete": false, "reason": "need pwd definition"}, {"complete": true}]})js");
    const Json infer_pwd = Json::parse(R"js({"role": "inference", "response": {
        "missing_code": "String readPassword(String user) { return form.get(user); }",
        "scope": {"class": "Accounts", "method": "readPassword"}}})js");
    Scenario fig(Json::array({need_pwd, infer_pwd}));
    const auto r = fig.run();
    c.expect(r.termination == TerminationReason::Complete, "figure scenario did not complete");
    c.expect(r.reflection_calls == 2, "reflection calls " + std::to_string(r.reflection_calls));
    c.expect(r.inference_calls == 1, "inference calls " + std::to_string(r.inference_calls));
    c.expect(r.searches == 1, "searches " + std::to_string(r.searches));
    c.expect(r.candidate.context().size() == 2, "context size " + std::to_string(r.candidate.context().size()));
    c.expect(r.candidate.context().size() == 2 && r.candidate.context()[1].enclosing_method == "readPassword",
             "wrong block retrieved");

    // Always incomplete, and the inferred code matches nothing new.
    const Json never = Json::parse(R"js({"role": "reflection", "response": {"complete": false, "reason": "unknown"}})js");
    Scenario empty(Json::array({never, Json::parse(R"js({"role": "inference", "response": {
        "missing_code": "String readPassword(String user)", "scope": {"class": "Nowhere"}}})js")}));
    const auto e = empty.run();
    c.expect(e.termination == TerminationReason::NoNewBlocks, "nothing-retrievable did not stop on an empty search");
    c.expect(e.reflection_calls == 1 && e.searches == 1, "nothing-retrievable made extra calls");

    // Always incomplete while each search still turns up something new.
    Scenario endless(Json::array({never, Json::parse(R"js({"role": "inference", "responses": [
        {"missing_code": "String readPassword(String user) { return form.get(user); }"},
        {"missing_code": "int readPasswordAge(String user) { return ages.get(user); }"},
        {"missing_code": "void show() { System.out.println(\"Welcome\"); }"}]})js")}));
    endless.cfg.top_k = 1;
    endless.cfg.max_iterations = 3;
    const auto cap = endless.run();
    c.expect(cap.termination == TerminationReason::IterationCap, "always-incomplete did not hit the cap");
    c.expect(cap.reflection_calls == 3, "capped run made " + std::to_string(cap.reflection_calls) + " reflections");
    if (c.ok)
        c.detail = "figure: 2 reflections, 1 inference, 1 search, context 1->2; adversarial: NoNewBlocks, IterationCap";
    return c;
}

int run_cli(const std::vector<std::string>& args, std::string& err) {
    std::vector<const char*> argv{"vulnreach"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, errs;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, errs);
    err = errs.str();
    return code;
}

Json without_timestamps(Json j) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end();)
            if (it.key().find("time") != std::string::npos)
                it = j.erase(it);
            else {
                it.value() = without_timestamps(it.value());
                ++it;
            }
    } else if (j.is_array()) {
        for (auto& e : j)
            e = without_timestamps(e);
    }
    return j;
}

Check end_to_end_determinism() {
    Check c;
    TempDir dir("accept-e2e");
    const std::string toy = (fixture_dir() / "toy").string();
    std::string reports[2];
    for (int i = 0; i < 2; ++i) {
        const std::string out = (dir / ("run" + std::to_string(i))).string();
        std::string err;
        const int code = run_cli({"evaluate", "--manifest", toy + "/manifest.json", "--config", toy + "/config.json",
                                  "--out", out},
                                 err);
        c.expect(code == cli::kOk, "evaluate exited " + std::to_string(code) + ": " + err);
        if (code != cli::kOk)
            return c;
        reports[i] = without_timestamps(read_json_file(out + "/report.json")).dump(2);
        c.expect(read_file(out + "/report.txt") == read_file(dir / "run0/report.txt"), "report.txt differs");
    }
    c.expect(reports[0] == reports[1], "report.json differs between runs");
    const Json cm = read_json_file(dir / "run0/report.json")["confusion_matrix"];
    c.expect(cm == Json{{"tp", 2}, {"fp", 0}, {"tn", 2}, {"fn", 0}}, "toy confusion matrix " + cm.dump());
    if (c.ok)
        c.detail = "identical reports, TP=2 FP=0 TN=2 FN=0";
    return c;
}

Check verdict_exhaustion() {
    Check c;
    std::size_t cases = 0;
    for (std::size_t n = 0; n <= 3; ++n)
        for (unsigned bits = 0; bits < (1u << n); ++bits) {
            Verdict v;
            bool any = false;
            for (std::size_t i = 0; i < n; ++i) {
                CandidateJudgment j;
                j.candidate_id = "c" + std::to_string(i);
                j.judgment = (bits >> i) & 1u ? Judgment::Vulnerable : Judgment::Secure;
                any = any || j.judgment == Judgment::Vulnerable;
                v.per_candidate.push_back(j);
            }
            v.project_judgment = any ? Judgment::Secure : Judgment::Vulnerable; // stale on purpose
            v.finalize();
            c.expect(v.project_judgment == (any ? Judgment::Vulnerable : Judgment::Secure),
                     "n=" + std::to_string(n) + " bits=" + std::to_string(bits));
            ++cases;
        }

    // The same rule through the detector, with the judge scripted per candidate.
    const auto blocks = Scenario::blocks();
    for (unsigned bits = 0; bits < 8; ++bits) {
        Json rules = Json::array({Json::parse(R"js({"role": "reflection", "response": {"complete": true}})js")});
        for (std::size_t i = 0; i < 3; ++i)
            rules.push_back(Json{{"role", "judge"},
                                 {"contains", Json::array({blocks[i].source.substr(0, 20)})},
                                 {"response",
                                  {{"judgment", (bits >> i) & 1u ? "vulnerable" : "secure"}, {"rationale", "scripted"}}}});
        rules.push_back(Json{{"role", "grader"},
                             {"contains", Json::array({"readPassword"})},
                             {"response", {{"answer", "yes"}}}});
        rules.push_back(Json{{"role", "grader"}, {"response", {{"answer", "no"}}}});
        Scenario s(rules);
        s.cfg.tau = 0.01;
        const Verdict v = analyze(DetectorDeps{s.store, s.encoder, s.gateway}, Scenario::vuln(), s.cfg, "p");
        bool any = false;
        for (const auto& j : v.per_candidate)
            any = any || j.judgment == Judgment::Vulnerable;
        c.expect(v.per_candidate.size() == 3, "detector saw " + std::to_string(v.per_candidate.size()) + " candidates");
        c.expect(any == (bits != 0), "scripted judgments not applied for bits=" + std::to_string(bits));
        c.expect(v.project_judgment == (bits != 0 ? Judgment::Vulnerable : Judgment::Secure),
                 "detector verdict wrong for bits=" + std::to_string(bits));
    }
    if (c.ok)
        c.detail = std::to_string(cases) + " judgment sequences, 8 detector runs";
    return c;
}

} // namespace

int main() {
    using Clock = std::chrono::steady_clock;
    struct Criterion {
        int id;
        std::function<Check()> check;
        double limit_s; // 0 for none
    };
    const std::vector<Criterion> criteria{
        {1, metrics_reproduction, 1.0},   {2, baseline_rows, 0.0},       {3, segmentation_laws, 30.0},
        {4, search_equivalence, 60.0},    {5, reflection_loop, 5.0},     {6, end_to_end_determinism, 0.0},
        {7, verdict_exhaustion, 0.0},
    };
    std::map<int, bool> passed;
    for (const auto& cr : criteria) {
        const auto start = Clock::now();
        Check c;
        try {
            c = cr.check();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("threw: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        if (cr.limit_s > 0 && secs >= cr.limit_s) {
            c.ok = false;
            c.detail += " (took " + std::to_string(secs) + " s, limit " + std::to_string(cr.limit_s) + " s)";
        }
        passed[cr.id] = c.ok;
        std::ostringstream time;
        time.precision(2);
        time << std::fixed << secs;
        std::cout << "criterion " << cr.id << ": " << (c.ok ? "PASS" : "FAIL") << " " << c.detail << " [" << time.str()
                  << " s]" << std::endl;
    }
    const bool desk_scale = passed[1] && passed[2] && passed[5] && passed[6] && passed[7];
    passed[8] = desk_scale;
    std::cout << "criterion 8: " << (desk_scale ? "PASS" : "FAIL")
              << " detection quality is checked with scripted providers and metric arithmetic (criteria 1, 2, 5-7);"
                 " live-model accuracy is out of scope"
              << std::endl;
    bool all = true;
    for (const auto& [id, ok] : passed)
        all = all && ok;
    return all ? 0 : 1;
}
