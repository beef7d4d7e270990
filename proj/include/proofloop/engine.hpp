#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proofloop/corpus.hpp"
#include "proofloop/policy.hpp"
#include "proofloop/retrieval.hpp"
#include "proofloop/verifier.hpp"

namespace proofloop::engine {

using json = nlohmann::json;

// The round-t conditioning tuple. Deliberately compact: only the most recent
// attempt and feedback, never the full history.
struct InteractionState {
    corpus::TheoremStatement statement;
    std::vector<retrieval::ScoredEntry> retrieved;
    std::optional<std::string> prev_attempt;   // absent exactly at round 1
    std::optional<std::string> prev_feedback;  // absent exactly at round 1
    int round_index = 1;
};

struct RoundRecord {
    int round_index = 1;
    std::vector<std::string> retrieved_ids;
    std::string attempt;  // empty when no code could be extracted
    verifier::Verdict verdict;
    bool format_ok = false;
    std::optional<double> reward;  // filled by the rl signal pass

    json to_json() const;
    static RoundRecord from_json(const json& j);
};

enum class Outcome { Verified, BudgetExhausted, Aborted };

std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct Trajectory {
    std::string statement_id;
    int sample_index = 0;
    std::vector<RoundRecord> rounds;
    Outcome outcome = Outcome::BudgetExhausted;
    int round_budget = 1;
    std::uint64_t index_snapshot = 0;  // retrieval snapshot pinned for this rollout
    std::string abort_reason;          // set only when outcome == Aborted

    bool verified() const { return outcome == Outcome::Verified; }
    // Reference string "statement_id#sample_index" for provenance fields.
    std::string ref() const;

    json to_json() const;
    static Trajectory from_json(const json& j);
};

struct RolloutOptions {
    int round_budget = 16;
    std::size_t k_retrieval = 2;
    policy::SamplingParams sampling;
    verifier::VerifyOptions verify;
    policy::PromptLimits prompt_limits;
    // Completion-shape predicate recorded per round (swappable; the rl
    // module's rule is used when unset).
    std::function<bool(std::string_view)> format_check;
};

// Test hook: sees every rendered prompt, in round order.
using PromptObserver = std::function<void(int round_index, const policy::PromptBundle& bundle)>;

// One bounded multi-round rollout: retrieve, render, generate, extract,
// verify, until verified or the budget is exhausted. Transport failures abort
// the rollout, preserving the completed rounds.
Trajectory run_rollout(const corpus::TheoremStatement& statement, const RolloutOptions& options,
                       retrieval::IndexSnapshot memory, retrieval::EmbeddingProvider& provider,
                       verifier::VerifierClient& verifier_client, policy::PolicyClient& policy_client,
                       std::uint64_t seed, int sample_index = 0,
                       const PromptObserver& observer = {});

struct BatchOptions {
    RolloutOptions rollout;
    int n_samples = 8;
    int parallelism = 4;
    std::uint64_t run_seed = 0;
};

struct BatchReport {
    std::size_t total = 0;
    std::size_t verified = 0;
    std::size_t budget_exhausted = 0;
    std::size_t aborted = 0;

    json to_json() const;
};

struct BatchResult {
    std::vector<Trajectory> trajectories;  // sorted by (statement_id, sample_index)
    BatchReport report;
};

// Per-rollout seed: a stable hash of (run_seed, statement_id, sample_index),
// so rollouts are mutually independent and reproducible.
std::uint64_t rollout_seed(std::uint64_t run_seed, const std::string& statement_id,
                           int sample_index);

// n_samples independent rollouts per statement under a bounded worker pool.
// Every rollout queries the same pinned memory snapshot; completion order
// does not affect stored order; individual aborts do not abort the batch.
BatchResult run_batch(const std::vector<corpus::TheoremStatement>& statements,
                      const BatchOptions& options, retrieval::IndexSnapshot memory,
                      retrieval::EmbeddingProvider& provider,
                      verifier::VerifierClient& verifier_client,
                      policy::PolicyClient& policy_client);

}  // namespace proofloop::engine
