#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proofloop/corpus.hpp"
#include "proofloop/engine.hpp"
#include "proofloop/repair.hpp"
#include "proofloop/retrieval.hpp"
#include "proofloop/rl.hpp"

namespace proofloop::coevolve {

using json = nlohmann::json;

struct IterationReport {
    int iteration = 0;
    std::size_t pool_size = 0;
    std::size_t new_verified = 0;       // verified proofs collected this iteration
    std::size_t new_verified_distinct = 0;  // distinct additions to the corpus
    std::size_t repair_examples = 0;
    std::size_t hard_cases = 0;
    std::size_t aborted_rollouts = 0;
    std::size_t corpus_size_before = 0;
    std::size_t corpus_size_after = 0;
    std::uint64_t index_snapshot_before = 0;
    std::uint64_t index_snapshot_after = 0;
    std::size_t index_entries_after = 0;

    json to_json() const;
};

struct RoutedOutputs {
    std::vector<corpus::VerifiedProof> verified_proofs;   // P+
    std::vector<corpus::RepairExample> repair_examples;   // B (deduped)
    std::vector<std::string> hard_case_ids;               // H
    repair::RepairFilterReport repair_report;
};

// Routes one iteration's rollouts: every verified rollout contributes its
// final proof; repair examples come from verified rollouts only; hard cases
// are the groups with success rate strictly inside (0, 1).
RoutedOutputs route_rollouts(const std::vector<engine::Trajectory>& trajectories,
                             const std::vector<rl::RewardedGroup>& groups, int iteration,
                             const std::string& toolchain_tag);

struct IterationOptions {
    engine::BatchOptions batch;
    std::filesystem::path output_dir;  // iter_k artifacts; empty = no files
    std::string toolchain_tag = "simulated";
};

struct IterationResult {
    retrieval::IndexSnapshot new_index;
    IterationReport report;
    std::vector<engine::Trajectory> trajectories;
    RoutedOutputs routed;
};

// One co-evolution step: batch rollouts against the pinned snapshot, route,
// grow the corpus, rebuild the index. The policy itself is not updated here;
// swapping policies between iterations is the caller's hook. Throws
// VerifierUnavailable after persisting partial outputs when every rollout
// aborted (dead backend).
IterationResult run_iteration(const std::vector<corpus::TheoremStatement>& pool,
                              corpus::Corpus& corpus, retrieval::IndexSnapshot index,
                              retrieval::EmbeddingProvider& provider,
                              verifier::VerifierClient& verifier_client,
                              policy::PolicyClient& policy_client,
                              const IterationOptions& options, int iteration);

// Per-iteration policy source, the hook for hot-swapping prover endpoints
// between iterations.
using PolicyProvider = std::function<policy::PolicyClient&(int iteration)>;

struct CoevolutionOptions {
    int iterations = 1;
    bool drop_solved = false;  // remove statements solved in iteration k from the pool
    IterationOptions iteration;
    std::filesystem::path output_root;  // per-iteration dirs created as iter_<k>
};

struct CoevolutionResult {
    retrieval::IndexSnapshot final_index;
    std::vector<IterationReport> reports;
};

CoevolutionResult run_coevolution(std::vector<corpus::TheoremStatement> pool,
                                  corpus::Corpus& corpus, retrieval::EmbeddingProvider& provider,
                                  verifier::VerifierClient& verifier_client,
                                  const PolicyProvider& policy_provider,
                                  const CoevolutionOptions& options);

// Order-insensitive content hash over the corpus record files (statements and
// proofs), for replay-determinism checks.
std::string corpus_content_hash(const corpus::Corpus& corpus);

}  // namespace proofloop::coevolve
