#include "proofloop/coevolve.hpp"

#include <algorithm>
#include <unordered_set>

#include "proofloop/errors.hpp"
#include "proofloop/jsonl.hpp"
#include "proofloop/text.hpp"

namespace proofloop::coevolve {

json IterationReport::to_json() const {
    return json{{"iteration", iteration},
                {"pool_size", pool_size},
                {"new_verified", new_verified},
                {"new_verified_distinct", new_verified_distinct},
                {"repair_examples", repair_examples},
                {"hard_cases", hard_cases},
                {"aborted_rollouts", aborted_rollouts},
                {"corpus_size_before", corpus_size_before},
                {"corpus_size_after", corpus_size_after},
                {"index_snapshot_before", index_snapshot_before},
                {"index_snapshot_after", index_snapshot_after},
                {"index_entries_after", index_entries_after}};
}

RoutedOutputs route_rollouts(const std::vector<engine::Trajectory>& trajectories,
                             const std::vector<rl::RewardedGroup>& groups, int iteration,
                             const std::string& toolchain_tag) {
    RoutedOutputs out;

    std::vector<engine::Trajectory> successful;
    for (const auto& traj : trajectories) {
        if (!traj.verified()) continue;
        successful.push_back(traj);
        const auto& final_round = traj.rounds.back();
        corpus::VerifiedProof p;
        p.statement_id = traj.statement_id;
        p.proof_text = final_round.attempt;
        p.verified_at_iteration = iteration;
        p.verifier_metadata =
            toolchain_tag + "; " + std::to_string(final_round.verdict.elapsed_ms) + "ms";
        out.verified_proofs.push_back(std::move(p));
    }

    auto [examples, report] = repair::extract_and_dedup(successful);
    out.repair_examples = std::move(examples);
    out.repair_report = report;
    out.hard_case_ids = rl::select_hard_cases(groups);
    return out;
}

IterationResult run_iteration(const std::vector<corpus::TheoremStatement>& pool,
                              corpus::Corpus& corpus, retrieval::IndexSnapshot index,
                              retrieval::EmbeddingProvider& provider,
                              verifier::VerifierClient& verifier_client,
                              policy::PolicyClient& policy_client,
                              const IterationOptions& options, int iteration) {
    IterationResult result;
    result.report.iteration = iteration;
    result.report.pool_size = pool.size();
    result.report.corpus_size_before = corpus.proof_count();
    result.report.index_snapshot_before = index ? index->snapshot_id() : 0;

    // Pool statements must resolve in the corpus before their proofs can.
    corpus.add_statements(pool);

    auto batch = engine::run_batch(pool, options.batch, index, provider, verifier_client,
                                   policy_client);
    result.trajectories = std::move(batch.trajectories);
    result.report.aborted_rollouts = batch.report.aborted;

    auto persist_trajectories = [&]() {
        if (options.output_dir.empty()) return;
        std::vector<json> live, aborted;
        for (const auto& t : result.trajectories)
            (t.outcome == engine::Outcome::Aborted ? aborted : live).push_back(t.to_json());
        jsonl::write_file(options.output_dir / "trajectories.jsonl", live);
        if (!aborted.empty()) jsonl::write_file(options.output_dir / "aborted.jsonl", aborted);
    };

    // A batch where nothing ran to completion means the backends are down;
    // keep what we have and surface the failure.
    if (batch.report.total > 0 && batch.report.aborted == batch.report.total) {
        persist_trajectories();
        if (!options.output_dir.empty())
            jsonl::write_text_file(options.output_dir / "report.json",
                                   result.report.to_json().dump(2) + "\n");
        throw VerifierUnavailable("all " + std::to_string(batch.report.total) +
                                  " rollouts aborted in iteration " + std::to_string(iteration) +
                                  ": " + (result.trajectories.empty()
                                              ? ""
                                              : result.trajectories.front().abort_reason));
    }

    auto groups = rl::collect_groups(result.trajectories);
    result.routed = route_rollouts(result.trajectories, groups, iteration, options.toolchain_tag);
    result.report.new_verified = result.routed.verified_proofs.size();
    result.report.repair_examples = result.routed.repair_examples.size();
    result.report.hard_cases = result.routed.hard_case_ids.size();

    auto delta = corpus.ingest_verified(result.routed.verified_proofs);
    result.report.new_verified_distinct = delta.added;
    corpus.add_repairs(result.routed.repair_examples);
    {
        std::vector<json> live;
        for (const auto& t : result.trajectories)
            if (t.outcome != engine::Outcome::Aborted) live.push_back(t.to_json());
        corpus.add_trajectories(live);
    }

    result.new_index = retrieval::rebuild_index(corpus, provider,
                                                index ? index->snapshot_id() : 0);
    result.report.corpus_size_after = corpus.proof_count();
    result.report.index_snapshot_after = result.new_index->snapshot_id();
    result.report.index_entries_after = result.new_index->size();

    if (!options.output_dir.empty()) {
        persist_trajectories();
        std::vector<json> proofs_json, repairs_json;
        for (const auto& p : result.routed.verified_proofs) proofs_json.push_back(p.to_json());
        for (const auto& r : result.routed.repair_examples) repairs_json.push_back(r.to_json());
        jsonl::write_file(options.output_dir / "new_proofs.jsonl", proofs_json);
        jsonl::write_file(options.output_dir / "repairs.jsonl", repairs_json);
        std::string hard;
        for (const auto& id : result.routed.hard_case_ids) hard += id + "\n";
        jsonl::write_text_file(options.output_dir / "hard_cases.txt", hard);
        json report = result.report.to_json();
        report["repair_filter"] = result.routed.repair_report.to_json();
        jsonl::write_text_file(options.output_dir / "report.json", report.dump(2) + "\n");
    }
    return result;
}

CoevolutionResult run_coevolution(std::vector<corpus::TheoremStatement> pool,
                                  corpus::Corpus& corpus, retrieval::EmbeddingProvider& provider,
                                  verifier::VerifierClient& verifier_client,
                                  const PolicyProvider& policy_provider,
                                  const CoevolutionOptions& options) {
    if (options.iterations < 1) throw DomainError("iterations must be >= 1");

    CoevolutionResult result;
    auto index = retrieval::rebuild_index(corpus, provider, 0);

    for (int k = 0; k < options.iterations; ++k) {
        IterationOptions iter_opts = options.iteration;
        if (!options.output_root.empty())
            iter_opts.output_dir = options.output_root / ("iter_" + std::to_string(k));

        auto iter = run_iteration(pool, corpus, index, provider, verifier_client,
                                  policy_provider(k), iter_opts, k);
        index = iter.new_index;
        result.reports.push_back(iter.report);

        if (options.drop_solved) {
            std::unordered_set<std::string> solved;
            for (const auto& t : iter.trajectories)
                if (t.verified()) solved.insert(t.statement_id);
            pool.erase(std::remove_if(pool.begin(), pool.end(),
                                      [&](const corpus::TheoremStatement& s) {
                                          return solved.count(s.id) > 0;
                                      }),
                       pool.end());
        }
    }
    result.final_index = index;
    return result;
}

std::string corpus_content_hash(const corpus::Corpus& corpus) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& s : corpus.statements()) h = text::fnv1a64_mix(h, s.to_json().dump());
    for (const auto& p : corpus.proofs()) h = text::fnv1a64_mix(h, p.to_json().dump());
    for (const auto& r : corpus.repairs()) h = text::fnv1a64_mix(h, r.to_json().dump());
    return text::hex64(h);
}

}  // namespace proofloop::coevolve
