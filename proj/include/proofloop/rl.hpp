#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "proofloop/engine.hpp"
#include "proofloop/verifier.hpp"

namespace proofloop::rl {

using json = nlohmann::json;

// Per-round reward: 1.0 for a verified round with correct output format,
// 0.8 for a verified round without it, 0.0 for any unverified round.
double round_reward(const verifier::Verdict& verdict, bool format_ok);

// Output-format criterion: a non-empty plan section followed by exactly one
// fenced code block. Swappable wherever it is consumed.
bool format_check(std::string_view completion);

struct RoundReward {
    int sample_index = 0;
    int round_index = 1;
    double reward = 0.0;
};

// All realized rounds of one theorem's n rollouts, pooled flat. Rollouts that
// stopped early contribute fewer entries.
struct RewardedGroup {
    std::string statement_id;
    std::vector<RoundReward> rounds;
    int n_rollouts = 0;
    int success_count = 0;  // rollouts with outcome verified
};

struct AdvantageRecord {
    int sample_index = 0;
    int round_index = 1;
    double reward = 0.0;
    double advantage = 0.0;
};

struct AdvantageGroup {
    std::string statement_id;
    std::vector<AdvantageRecord> rounds;
    int n_rollouts = 0;
    int success_count = 0;
    double epsilon = 0.0;

    json to_json() const;
};

// Group-relative normalization over the pooled rounds:
// a_i = (r_i - mean) / (population_std + epsilon). All-equal groups yield
// all-zero advantages. Throws EmptyGroup on an empty pool.
AdvantageGroup group_advantages(const RewardedGroup& group, double epsilon = 1e-8);

// Fills each round's reward and pools rewards per statement. Aborted
// trajectories are excluded from groups and from n/m counts.
std::vector<RewardedGroup> collect_groups(std::vector<engine::Trajectory>& trajectories);

// Statements with group success rate strictly between 0 and 1.
std::vector<std::string> select_hard_cases(const std::vector<RewardedGroup>& groups);

}  // namespace proofloop::rl
