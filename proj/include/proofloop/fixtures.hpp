#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proofloop/corpus.hpp"
#include "proofloop/policy.hpp"
#include "proofloop/verifier.hpp"

namespace proofloop::fixtures {

using json = nlohmann::json;

// Per-statement program for the scripted prover. Rounds before success_round
// emit defective proofs carrying the listed defect markers; from
// success_round on, the canonical solution. success_samples narrows success
// to specific sample indices (others never succeed), which is how a world
// dials in group success rates.
struct ScriptedBehavior {
    std::string statement_id;
    std::optional<int> success_round;        // absent = never succeeds
    std::vector<std::string> defect_sequence;
    std::vector<bool> format_ok_sequence;    // per round; missing entries default true
    std::vector<int> success_samples;        // empty = every sample

    json to_json() const;
    static ScriptedBehavior from_json(const json& j);
};

// Scripted prover: a pure function of (statement_id, round_index,
// sample_index). Defect marker "NO_CODE" yields a prose completion with no
// code block at all.
class ScriptedPolicyClient : public policy::PolicyClient {
public:
    ScriptedPolicyClient(std::map<std::string, ScriptedBehavior> behaviors,
                         std::map<std::string, std::string> solutions);
    std::string generate(const policy::GenerationRequest& request) override;

    // The defective attempt text for a round, exposed so tests can assert on
    // sentinels and diffs.
    static std::string defective_proof(const std::string& solution, const std::string& statement_id,
                                       int round_index, const std::string& defect);

private:
    std::map<std::string, ScriptedBehavior> behaviors_;
    std::map<std::string, std::string> solutions_;
};

// A self-consistent simulated world: statements, a simulator that knows their
// canonical solutions, and a scripted prover that follows the behaviors.
struct World {
    std::vector<corpus::TheoremStatement> statements;
    std::map<std::string, std::string> solutions;
    std::map<std::string, ScriptedBehavior> behaviors;
    std::shared_ptr<verifier::SimulatedVerifier> simulator;
    std::shared_ptr<ScriptedPolicyClient> prover;

    const corpus::TheoremStatement& statement(const std::string& id) const;
};

// Builds and validates a world from spec records (one per statement:
// id, lean_statement, solution, optional behavior fields). Throws SpecError
// when the spec is inconsistent — a success-round proof that fails
// simulation, or a defect round that verifies.
World make_world(const std::vector<json>& spec_records);

World load_world(const std::filesystem::path& path);

// The sample world shipped under fixtures/ for end-to-end runs: twenty
// statements mixing immediate successes, multi-round repairs, partially
// solved groups and never-solved statements.
std::vector<json> sample_world_spec();

}  // namespace proofloop::fixtures
