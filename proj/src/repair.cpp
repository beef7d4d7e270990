#include "proofloop/repair.hpp"

#include <unordered_set>

#include "proofloop/errors.hpp"
#include "proofloop/policy.hpp"
#include "proofloop/text.hpp"

namespace proofloop::repair {

RepairFilterReport& RepairFilterReport::operator+=(const RepairFilterReport& other) {
    extracted += other.extracted;
    kept += other.kept;
    dropped_empty_prev += other.dropped_empty_prev;
    dropped_long_feedback += other.dropped_long_feedback;
    dropped_near_noop += other.dropped_near_noop;
    dropped_dedup += other.dropped_dedup;
    return *this;
}

json RepairFilterReport::to_json() const {
    return json{{"extracted", extracted},
                {"kept", kept},
                {"dropped_empty_prev", dropped_empty_prev},
                {"dropped_long_feedback", dropped_long_feedback},
                {"dropped_near_noop", dropped_near_noop},
                {"dropped_dedup", dropped_dedup}};
}

bool is_malformed_proof(std::string_view proof) {
    if (text::trim(proof).empty()) return true;
    if (proof.find(policy::kNoLeanCodeFound) != std::string_view::npos) return true;
    if (proof.find(":=") != std::string_view::npos) return false;
    for (auto tok : text::tokenize(proof))
        if (tok == "by") return false;
    return true;
}

std::pair<std::vector<corpus::RepairExample>, RepairFilterReport> extract_repairs(
    const engine::Trajectory& trajectory) {
    if (trajectory.outcome == engine::Outcome::Aborted)
        throw DomainError("cannot extract repairs from an aborted trajectory");

    std::vector<corpus::RepairExample> out;
    RepairFilterReport report;

    for (std::size_t i = 1; i < trajectory.rounds.size(); ++i) {
        const auto& prev = trajectory.rounds[i - 1];
        const auto& cur = trajectory.rounds[i];
        ++report.extracted;

        // (i) degenerate transition: malformed previous attempt (or a target
        // that is itself no attempt at all).
        if (is_malformed_proof(prev.attempt) || text::trim(cur.attempt).empty()) {
            ++report.dropped_empty_prev;
            continue;
        }
        // (ii) boilerplate-dominated feedback.
        if (text::count_tokens(prev.verdict.feedback) > kMaxFeedbackTokens) {
            ++report.dropped_long_feedback;
            continue;
        }
        // (iii) near-no-op revision.
        if (text::token_edit_distance_bounded(prev.attempt, cur.attempt, kMinTokenDiff - 1) <
            kMinTokenDiff) {
            ++report.dropped_near_noop;
            continue;
        }

        corpus::RepairExample ex;
        ex.statement_id = trajectory.statement_id;
        ex.retrieved_ids = cur.retrieved_ids;
        ex.extra["index_snapshot"] = trajectory.index_snapshot;
        ex.prev_proof = prev.attempt;
        ex.prev_feedback = prev.verdict.feedback;
        ex.target_proof = cur.attempt;
        ex.source_trajectory = trajectory.ref();
        ex.round_index = cur.round_index;
        out.push_back(std::move(ex));
        ++report.kept;
    }
    return {std::move(out), report};
}

std::vector<corpus::RepairExample> dedup_repairs(
    const std::vector<corpus::RepairExample>& examples) {
    std::vector<corpus::RepairExample> out;
    std::unordered_set<std::string> seen;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        std::string key = ex.prev_proof + '\x1f' + ex.prev_feedback + '\x1f' + ex.target_proof;
        if (seen.insert(std::move(key)).second) out.push_back(ex);
    }
    return out;
}

std::pair<std::vector<corpus::RepairExample>, RepairFilterReport> extract_and_dedup(
    const std::vector<engine::Trajectory>& trajectories) {
    std::vector<corpus::RepairExample> all;
    RepairFilterReport report;
    for (const auto& traj : trajectories) {
        if (traj.outcome == engine::Outcome::Aborted) continue;
        auto [examples, r] = extract_repairs(traj);
        report += r;
        all.insert(all.end(), std::make_move_iterator(examples.begin()),
                   std::make_move_iterator(examples.end()));
    }
    auto deduped = dedup_repairs(all);
    report.dropped_dedup = all.size() - deduped.size();
    report.kept = deduped.size();
    return {std::move(deduped), report};
}

}  // namespace proofloop::repair
