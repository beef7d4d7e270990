#include "proofloop/engine.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "proofloop/errors.hpp"
#include "proofloop/rl.hpp"
#include "proofloop/text.hpp"

namespace proofloop::engine {

json RoundRecord::to_json() const {
    std::vector<std::string> tags;
    for (auto t : verdict.failure_tags) tags.push_back(verifier::to_string(t));
    json j{{"round_index", round_index},
           {"retrieved_ids", retrieved_ids},
           {"attempt", attempt},
           {"verdict",
            {{"verified", verdict.verified},
             {"feedback", verdict.feedback},
             {"elapsed_ms", verdict.elapsed_ms},
             {"failure_tags", tags}}},
           {"format_ok", format_ok}};
    if (reward) j["reward"] = *reward;
    return j;
}

RoundRecord RoundRecord::from_json(const json& j) {
    RoundRecord r;
    r.round_index = j.at("round_index").get<int>();
    if (j.contains("retrieved_ids"))
        r.retrieved_ids = j["retrieved_ids"].get<std::vector<std::string>>();
    r.attempt = j.value("attempt", "");
    const auto& v = j.at("verdict");
    r.verdict.verified = v.at("verified").get<bool>();
    r.verdict.feedback = v.value("feedback", "");
    r.verdict.elapsed_ms = v.value("elapsed_ms", 0);
    if (v.contains("failure_tags"))
        for (const auto& t : v["failure_tags"])
            r.verdict.failure_tags.insert(verifier::failure_tag_from_string(t.get<std::string>()));
    r.format_ok = j.value("format_ok", false);
    if (j.contains("reward")) r.reward = j["reward"].get<double>();
    return r;
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Verified: return "verified";
        case Outcome::BudgetExhausted: return "budget_exhausted";
        case Outcome::Aborted: return "aborted";
    }
    return "budget_exhausted";
}

Outcome outcome_from_string(const std::string& s) {
    if (s == "verified") return Outcome::Verified;
    if (s == "budget_exhausted") return Outcome::BudgetExhausted;
    if (s == "aborted") return Outcome::Aborted;
    throw IoError("unknown outcome: " + s);
}

std::string Trajectory::ref() const {
    return statement_id + "#" + std::to_string(sample_index);
}

json Trajectory::to_json() const {
    json rounds_json = json::array();
    for (const auto& r : rounds) rounds_json.push_back(r.to_json());
    json j{{"statement_id", statement_id},
           {"sample_index", sample_index},
           {"rounds", std::move(rounds_json)},
           {"outcome", engine::to_string(outcome)},
           {"round_budget", round_budget},
           {"index_snapshot", index_snapshot}};
    if (outcome == Outcome::Aborted) j["abort_reason"] = abort_reason;
    return j;
}

Trajectory Trajectory::from_json(const json& j) {
    Trajectory t;
    t.statement_id = j.at("statement_id").get<std::string>();
    t.sample_index = j.at("sample_index").get<int>();
    for (const auto& r : j.at("rounds")) t.rounds.push_back(RoundRecord::from_json(r));
    t.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    t.round_budget = j.at("round_budget").get<int>();
    t.index_snapshot = j.value("index_snapshot", std::uint64_t{0});
    t.abort_reason = j.value("abort_reason", "");
    return t;
}

json BatchReport::to_json() const {
    return json{{"total", total},
                {"verified", verified},
                {"budget_exhausted", budget_exhausted},
                {"aborted", aborted}};
}

std::uint64_t rollout_seed(std::uint64_t run_seed, const std::string& statement_id,
                           int sample_index) {
    auto h = text::fnv1a64_mix(text::fnv1a64(statement_id), run_seed);
    return text::fnv1a64_mix(h, static_cast<std::uint64_t>(sample_index));
}

Trajectory run_rollout(const corpus::TheoremStatement& statement, const RolloutOptions& options,
                       retrieval::IndexSnapshot memory, retrieval::EmbeddingProvider& provider,
                       verifier::VerifierClient& verifier_client, policy::PolicyClient& policy_client,
                       std::uint64_t seed, int sample_index, const PromptObserver& observer) {
    if (options.round_budget < 1) throw DomainError("round_budget must be >= 1");
    auto check_format = options.format_check ? options.format_check
                                             : [](std::string_view c) { return rl::format_check(c); };

    Trajectory traj;
    traj.statement_id = statement.id;
    traj.sample_index = sample_index;
    traj.round_budget = options.round_budget;
    traj.index_snapshot = memory ? memory->snapshot_id() : 0;
    traj.outcome = Outcome::BudgetExhausted;

    std::string prev_attempt;
    std::string prev_feedback;

    for (int t = 1; t <= options.round_budget; ++t) {
        // The compact state X_t: statement, per-round retrieval against the
        // pinned snapshot, and the round t-1 attempt/feedback only.
        InteractionState state;
        state.statement = statement;
        state.round_index = t;
        if (memory && !memory->empty() && options.k_retrieval > 0) {
            try {
                state.retrieved = retrieval::query_topk(*memory, statement.lean_statement,
                                                        options.k_retrieval, provider);
            } catch (const EmbedderUnavailable& e) {
                traj.outcome = Outcome::Aborted;
                traj.abort_reason = e.what();
                return traj;
            }
        }
        if (t > 1) {
            state.prev_attempt = prev_attempt;
            state.prev_feedback = prev_feedback;
        }

        policy::PromptState ps;
        ps.statement_text = state.statement.lean_statement;
        ps.round_index = state.round_index;
        if (state.prev_attempt) ps.prev_attempt = *state.prev_attempt;
        if (state.prev_feedback) ps.prev_feedback = *state.prev_feedback;
        for (const auto& s : state.retrieved)
            ps.retrieved.push_back({s.entry.statement_text, s.entry.proof_text, s.entry.proof_ref});
        const auto& retrieved = state.retrieved;

        auto bundle = policy::render_prompt(ps, options.prompt_limits);
        if (observer) observer(t, bundle);

        policy::GenerationRequest req;
        req.prompt = bundle.rendered_text;
        req.params = options.sampling;
        req.statement_id = statement.id;
        req.round_index = t;
        req.sample_index = sample_index;
        req.seed = seed;

        std::string completion;
        try {
            completion = policy_client.generate(req);
        } catch (const PolicyUnavailable& e) {
            traj.outcome = Outcome::Aborted;
            traj.abort_reason = e.what();
            return traj;
        }

        RoundRecord rec;
        rec.round_index = t;
        for (const auto& s : retrieved) rec.retrieved_ids.push_back(s.entry.proof_ref);
        rec.format_ok = check_format(completion);

        auto proof = policy::extract_proof(completion);
        if (!proof || proof->empty()) {
            rec.attempt.clear();
            rec.verdict.verified = false;
            rec.verdict.feedback = policy::kNoLeanCodeFound;
            rec.verdict.elapsed_ms = 0;
            rec.verdict.failure_tags = {verifier::FailureTag::NoLeanCodeFound};
        } else {
            rec.attempt = *proof;
            try {
                rec.verdict = verifier_client.verify(statement.id, rec.attempt, options.verify);
            } catch (const VerifierUnavailable& e) {
                traj.outcome = Outcome::Aborted;
                traj.abort_reason = e.what();
                return traj;
            }
        }

        traj.rounds.push_back(rec);
        if (rec.verdict.verified) {
            traj.outcome = Outcome::Verified;
            return traj;
        }
        prev_attempt = rec.attempt;
        prev_feedback = rec.verdict.feedback;
    }
    return traj;
}

BatchResult run_batch(const std::vector<corpus::TheoremStatement>& statements,
                      const BatchOptions& options, retrieval::IndexSnapshot memory,
                      retrieval::EmbeddingProvider& provider,
                      verifier::VerifierClient& verifier_client,
                      policy::PolicyClient& policy_client) {
    if (options.n_samples < 1) throw DomainError("n_samples must be >= 1");
    if (options.parallelism < 1) throw DomainError("parallelism must be >= 1");

    struct Task {
        const corpus::TheoremStatement* statement;
        int sample_index;
    };
    std::vector<Task> tasks;
    tasks.reserve(statements.size() * options.n_samples);
    for (const auto& s : statements)
        for (int j = 0; j < options.n_samples; ++j) tasks.push_back({&s, j});

    std::vector<Trajectory> results(tasks.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const auto& task = tasks[i];
            std::uint64_t seed =
                rollout_seed(options.run_seed, task.statement->id, task.sample_index);
            try {
                results[i] = run_rollout(*task.statement, options.rollout, memory, provider,
                                         verifier_client, policy_client, seed, task.sample_index);
            } catch (const std::exception& e) {
                Trajectory t;
                t.statement_id = task.statement->id;
                t.sample_index = task.sample_index;
                t.round_budget = options.rollout.round_budget;
                t.outcome = Outcome::Aborted;
                t.abort_reason = e.what();
                results[i] = std::move(t);
            }
        }
    };

    int threads = std::min<int>(options.parallelism, static_cast<int>(tasks.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::sort(results.begin(), results.end(), [](const Trajectory& a, const Trajectory& b) {
        if (a.statement_id != b.statement_id) return a.statement_id < b.statement_id;
        return a.sample_index < b.sample_index;
    });

    BatchResult out;
    out.report.total = results.size();
    for (const auto& t : results) {
        switch (t.outcome) {
            case Outcome::Verified: ++out.report.verified; break;
            case Outcome::BudgetExhausted: ++out.report.budget_exhausted; break;
            case Outcome::Aborted: ++out.report.aborted; break;
        }
    }
    out.trajectories = std::move(results);
    return out;
}

}  // namespace proofloop::engine
