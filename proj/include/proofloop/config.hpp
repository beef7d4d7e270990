#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace proofloop::config {

using json = nlohmann::json;

// Commands that collect RL-style rollouts run tighter budgets than
// evaluation sweeps.
enum class Mode { Evaluation, Rollout };

struct RunConfig {
    std::string policy_backend = "scripted";     // remote | scripted
    std::string verifier_backend = "simulated";  // remote | simulated
    std::string embedder_backend = "test";       // remote | test

    std::string policy_url;
    std::string verifier_url;
    std::string embed_url;
    std::string api_key;
    std::string model;
    std::map<int, std::string> policy_url_iters;  // per-iteration endpoint overrides

    int round_budget = 16;
    int n_samples = 8;
    int k_retrieval = 2;
    int parallelism = 4;

    double temperature = 1.0;
    double top_p = 0.999;
    int max_response_tokens = 32000;
    int max_prompt_tokens = 14000;

    std::int64_t verify_timeout_ms = 240000;
    std::int64_t heartbeat_cap = 4000000;
    bool reconstruct_proofs = false;

    std::uint64_t seed = 0;
    int embed_dim = 256;
    std::string world_file;
    bool drop_solved = false;

    static RunConfig defaults(Mode mode);
    void validate() const;  // throws ConfigError
    json to_json() const;   // the resolved echo written next to outputs
};

// Precedence below CLI flags: environment variables override the file, the
// file overrides defaults. Flags are layered on top by the CLI itself.
RunConfig load(const std::optional<std::filesystem::path>& file, Mode mode);

void apply_file(RunConfig& cfg, const std::filesystem::path& file);
void apply_env(RunConfig& cfg);

}  // namespace proofloop::config
