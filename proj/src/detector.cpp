#include "vulnreach/detector.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "vulnreach/errors.hpp"

namespace vulnreach {

namespace {

struct Seeds {
    std::vector<EmbeddingVector> api;
    EmbeddingVector test;
};

Seeds embed_seeds(DetectorDeps deps, const VulnSpec& vuln, const DetectorConfig& cfg) {
    if (deps.encoder.dims() != deps.store.dims())
        throw DimsMismatch(deps.store.dims(), deps.encoder.dims());
    std::vector<std::string> texts = vuln.api_signatures;
    texts.push_back(vuln.pov_test_source);
    std::vector<EmbeddingVector> vectors = embed(deps.encoder, texts, cfg.retry);
    Seeds s;
    s.test = std::move(vectors.back());
    vectors.pop_back();
    s.api = std::move(vectors);
    return s;
}

double api_similarity(const VectorStore& store, const std::string& id, const Seeds& seeds) {
    double best = -1.0;
    for (const auto& v : seeds.api)
        best = std::max(best, store.similarity(id, v).value_or(-1.0));
    return best;
}

CandidateJudgment make_judgment(const ContextResult& r, const JudgeResult& judge) {
    const Candidate& c = r.candidate;
    CandidateJudgment j;
    j.candidate_id = c.anchor().id;
    j.file_path = c.anchor().file_path;
    j.line_start = c.anchor().line_start;
    j.line_end = c.anchor().line_end;
    j.matched_by = c.matched_by();
    j.similarity_api = c.similarity_api();
    j.similarity_test = c.similarity_test();
    for (const auto& b : c.context())
        j.context_ids.push_back(b.id);
    j.termination = r.termination;
    j.judgment = judge.judgment;
    j.rationale = judge.rationale;
    return j;
}

} // namespace

void DetectorConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0))
        throw ConfigError("tau must be in (0, 1]");
    if (top_k == 0)
        throw ConfigError("top_k must be positive");
    if (max_iterations == 0)
        throw ConfigError("max_iterations must be positive");
    if (parallelism == 0)
        throw ConfigError("parallelism must be positive");
}

std::vector<Candidate> identify_candidates(DetectorDeps deps, const VulnSpec& vuln, const DetectorConfig& cfg) {
    cfg.validate();
    vuln.validate();
    if (deps.store.empty())
        throw EmptyIndex();
    const Seeds seeds = embed_seeds(deps, vuln, cfg);

    struct Hit {
        CodeBlock block;
        bool by_api = false;
        bool by_test = false;
    };
    std::map<std::string, Hit> hits;
    auto collect = [&](const EmbeddingVector& seed, bool api) {
        for (auto& h : deps.store.search(seed, cfg.top_k, cfg.tau)) {
            if (!(h.score > cfg.tau))
                continue;
            std::string id = h.block.id;
            auto [it, fresh] = hits.try_emplace(std::move(id), Hit{std::move(h.block)});
            (api ? it->second.by_api : it->second.by_test) = true;
        }
    };
    for (const auto& s : seeds.api)
        collect(s, true);
    collect(seeds.test, false);

    std::vector<Hit> ordered;
    for (auto& [id, h] : hits)
        ordered.push_back(std::move(h));
    std::sort(ordered.begin(), ordered.end(),
              [](const Hit& a, const Hit& b) { return block_location_less(a.block, b.block); });

    std::vector<Candidate> out;
    for (auto& h : ordered) {
        bool confirmed = false;
        for (const auto& sig : vuln.api_signatures)
            if (deps.gateway.grade_invocation(h.block, sig) == GradeAnswer::Yes) {
                confirmed = true;
                break;
            }
        if (!confirmed)
            continue;
        const MatchedBy by = h.by_api && h.by_test ? MatchedBy::Both
                             : h.by_api            ? MatchedBy::ApiSimilarity
                                                   : MatchedBy::TestSimilarity;
        const double api = api_similarity(deps.store, h.block.id, seeds);
        const double test = deps.store.similarity(h.block.id, seeds.test).value_or(-1.0);
        out.emplace_back(std::move(h.block), by, api, test);
    }
    return out;
}

ContextResult complete_context(DetectorDeps deps, Candidate candidate, const VulnSpec& vuln,
                               const DetectorConfig& cfg) {
    cfg.validate();
    ContextResult r;
    r.candidate = std::move(candidate);

    ReflectionResult reflection = deps.gateway.reflection_query(r.candidate.context(), vuln);
    r.reflection_calls = 1;
    while (!reflection.complete) {
        if (r.reflection_calls >= cfg.max_iterations) {
            r.termination = TerminationReason::IterationCap;
            return r;
        }
        const InferenceResult inferred = deps.gateway.code_inference(r.candidate.context(), vuln, reflection.reason);
        ++r.inference_calls;

        const EmbeddingVector query = embed_one(deps.encoder, inferred.missing_snippet, cfg.retry);
        const std::vector<SearchHit> hits = deps.store.search(query, cfg.top_k, cfg.tau, inferred.scope);
        ++r.searches;

        std::size_t added = 0;
        for (const auto& h : hits)
            if (r.candidate.add_context(h.block)) {
                r.discovered.push_back(h.block);
                ++added;
            }
        if (added == 0) {
            r.termination = TerminationReason::NoNewBlocks;
            return r;
        }
        reflection = deps.gateway.reflection_query(r.candidate.context(), vuln);
        ++r.reflection_calls;
    }
    r.termination = TerminationReason::Complete;
    return r;
}

Verdict analyze(DetectorDeps deps, const VulnSpec& vuln, const DetectorConfig& cfg, const std::string& project_id) {
    std::vector<Candidate> initial = identify_candidates(deps, vuln, cfg);
    // Only needed to score blocks that join the pool mid-run.
    const Seeds seeds = initial.empty() ? Seeds{} : embed_seeds(deps, vuln, cfg);

    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Candidate> queue(std::make_move_iterator(initial.begin()), std::make_move_iterator(initial.end()));
    std::set<std::string> seen;
    for (const auto& c : queue)
        seen.insert(c.anchor().id);
    std::vector<CandidateJudgment> judged;
    std::size_t busy = 0;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            Candidate next;
            {
                std::unique_lock lock(mutex);
                cv.wait(lock, [&] { return failure || !queue.empty() || busy == 0; });
                if (failure || queue.empty())
                    return;
                next = std::move(queue.front());
                queue.pop_front();
                ++busy;
            }
            try {
                ContextResult r = complete_context(deps, std::move(next), vuln, cfg);
                JudgeResult judge = deps.gateway.judge_reachability(r.candidate, vuln);
                std::lock_guard lock(mutex);
                judged.push_back(make_judgment(r, judge));
                for (const auto& b : r.discovered)
                    if (seen.insert(b.id).second)
                        queue.emplace_back(b, MatchedBy::ContextExpansion, api_similarity(deps.store, b.id, seeds),
                                           deps.store.similarity(b.id, seeds.test).value_or(-1.0));
                --busy;
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure)
                    failure = std::current_exception();
                --busy;
            }
            cv.notify_all();
        }
    };

    {
        std::vector<std::jthread> pool;
        const unsigned n = std::max(1u, cfg.parallelism);
        for (unsigned i = 0; i < n; ++i)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);

    std::sort(judged.begin(), judged.end(), [](const CandidateJudgment& a, const CandidateJudgment& b) {
        if (a.file_path != b.file_path)
            return a.file_path < b.file_path;
        if (a.line_start != b.line_start)
            return a.line_start < b.line_start;
        return a.candidate_id < b.candidate_id;
    });

    Verdict v;
    v.project_id = project_id;
    v.vuln_id = vuln.vuln_id;
    v.per_candidate = std::move(judged);
    v.finalize();
    return v;
}

} // namespace vulnreach
