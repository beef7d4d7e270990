#include "proofloop/rl.hpp"

#include <cmath>
#include <map>

#include "proofloop/errors.hpp"
#include "proofloop/text.hpp"

namespace proofloop::rl {

double round_reward(const verifier::Verdict& verdict, bool format_ok) {
    if (!verdict.verified) return 0.0;
    return format_ok ? 1.0 : 0.8;
}

bool format_check(std::string_view completion) {
    auto blocks = text::fenced_blocks(completion);
    if (blocks.size() != 1) return false;
    // The plan is whatever precedes the single block's opening fence.
    auto fence_pos = completion.find("```");
    std::string plan = text::trim(completion.substr(0, fence_pos));
    return !plan.empty();
}

json AdvantageGroup::to_json() const {
    json rounds_json = json::array();
    for (const auto& r : rounds)
        rounds_json.push_back(json{{"sample_index", r.sample_index},
                                   {"round_index", r.round_index},
                                   {"reward", r.reward},
                                   {"advantage", r.advantage}});
    return json{{"statement_id", statement_id},
                {"n_rollouts", n_rollouts},
                {"success_count", success_count},
                {"epsilon", epsilon},
                {"rounds", std::move(rounds_json)}};
}

AdvantageGroup group_advantages(const RewardedGroup& group, double epsilon) {
    if (group.rounds.empty()) throw EmptyGroup("no rounds in group " + group.statement_id);

    AdvantageGroup out;
    out.statement_id = group.statement_id;
    out.n_rollouts = group.n_rollouts;
    out.success_count = group.success_count;
    out.epsilon = epsilon;

    bool all_equal = true;
    for (const auto& r : group.rounds) all_equal = all_equal && r.reward == group.rounds[0].reward;

    double mean = 0.0;
    for (const auto& r : group.rounds) mean += r.reward;
    mean /= static_cast<double>(group.rounds.size());

    double var = 0.0;
    for (const auto& r : group.rounds) var += (r.reward - mean) * (r.reward - mean);
    var /= static_cast<double>(group.rounds.size());
    double stddev = std::sqrt(var);

    out.rounds.reserve(group.rounds.size());
    for (const auto& r : group.rounds) {
        AdvantageRecord rec{r.sample_index, r.round_index, r.reward, 0.0};
        if (!all_equal) rec.advantage = (r.reward - mean) / (stddev + epsilon);
        out.rounds.push_back(rec);
    }
    return out;
}

std::vector<RewardedGroup> collect_groups(std::vector<engine::Trajectory>& trajectories) {
    std::vector<RewardedGroup> groups;
    std::map<std::string, std::size_t> index;
    for (auto& traj : trajectories) {
        if (traj.outcome == engine::Outcome::Aborted) continue;
        auto [it, inserted] = index.try_emplace(traj.statement_id, groups.size());
        if (inserted) {
            RewardedGroup g;
            g.statement_id = traj.statement_id;
            groups.push_back(std::move(g));
        }
        auto& g = groups[it->second];
        ++g.n_rollouts;
        if (traj.verified()) ++g.success_count;
        for (auto& round : traj.rounds) {
            double r = round_reward(round.verdict, round.format_ok);
            round.reward = r;
            g.rounds.push_back({traj.sample_index, round.round_index, r});
        }
    }
    return groups;
}

std::vector<std::string> select_hard_cases(const std::vector<RewardedGroup>& groups) {
    std::vector<std::string> out;
    for (const auto& g : groups)
        if (g.success_count > 0 && g.success_count < g.n_rollouts)
            out.push_back(g.statement_id);
    return out;
}

}  // namespace proofloop::rl
