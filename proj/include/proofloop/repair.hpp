#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "proofloop/corpus.hpp"
#include "proofloop/engine.hpp"

namespace proofloop::repair {

using json = nlohmann::json;

// Feedback longer than this (whitespace tokens) is dominated by repeated
// boilerplate and dropped; exactly this length is still kept.
inline constexpr std::size_t kMaxFeedbackTokens = 8000;
// Revisions moving fewer than this many tokens are near-no-ops.
inline constexpr std::size_t kMinTokenDiff = 3;

struct RepairFilterReport {
    std::size_t extracted = 0;
    std::size_t kept = 0;
    std::size_t dropped_empty_prev = 0;
    std::size_t dropped_long_feedback = 0;
    std::size_t dropped_near_noop = 0;
    std::size_t dropped_dedup = 0;

    RepairFilterReport& operator+=(const RepairFilterReport& other);
    json to_json() const;
};

// Shallow malformedness check for a proof attempt: empty, the
// extraction-failure placeholder, or no `:=` / `by` proof head at all.
bool is_malformed_proof(std::string_view proof);

// Decomposes one trajectory into round-level repair candidates — transition
// (p_{t-1}, f_{t-1}) -> p_t for every t >= 2, carrying round t's retrieved
// context — then applies the filters in order: malformed previous attempt,
// over-long feedback, near-no-op revision. The trajectory must not be
// aborted.
std::pair<std::vector<corpus::RepairExample>, RepairFilterReport> extract_repairs(
    const engine::Trajectory& trajectory);

// Collapses byte-exact duplicates of (prev_proof, prev_feedback, target_proof)
// to the first occurrence, preserving order otherwise.
std::vector<corpus::RepairExample> dedup_repairs(
    const std::vector<corpus::RepairExample>& examples);

// extract_repairs over many trajectories followed by dedup, with one combined
// report (dedup drops are attributed to dropped_dedup).
std::pair<std::vector<corpus::RepairExample>, RepairFilterReport> extract_and_dedup(
    const std::vector<engine::Trajectory>& trajectories);

}  // namespace proofloop::repair
