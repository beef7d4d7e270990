#include <doctest.h>

#include <map>
#include <set>

#include "proofloop/engine.hpp"
#include "proofloop/errors.hpp"
#include "proofloop/fixtures.hpp"
#include "proofloop/policy.hpp"
#include "proofloop/retrieval.hpp"
#include "test_support.hpp"

using namespace proofloop;

namespace {

struct Rig {
    fixtures::World world;
    retrieval::TrigramEmbedder embedder;
    retrieval::IndexSnapshot memory;

    explicit Rig(const std::vector<nlohmann::json>& spec) : world(fixtures::make_world(spec)) {
        memory = std::make_shared<const retrieval::RetrievalIndex>(
            1, embedder.dim(), std::vector<retrieval::MemoryEntry>{},
            retrieval::RetrievalIndex::Matrix(0, embedder.dim()));
    }
    Rig(std::initializer_list<nlohmann::json> spec)
        : Rig(std::vector<nlohmann::json>(spec)) {}

    engine::Trajectory rollout(const std::string& id, int budget, int sample = 0,
                               const engine::PromptObserver& observer = {}) {
        engine::RolloutOptions opts;
        opts.round_budget = budget;
        auto seed = engine::rollout_seed(0, id, sample);
        return engine::run_rollout(world.statement(id), opts, memory, embedder, *world.simulator,
                                   *world.prover, seed, sample, observer);
    }
};

nlohmann::json world_entry(const char* id, int success_round = 0,
                           std::vector<std::string> defects = {}) {
    nlohmann::json e{{"id", id},
                     {"lean_statement", std::string("theorem ") + id + " : True := by sorry"},
                     {"solution", std::string("theorem ") + id + " : True := by trivial"}};
    if (success_round > 0) e["success_round"] = success_round;
    if (!defects.empty()) e["defects"] = defects;
    return e;
}

}  // namespace

TEST_CASE("run_rollout against the scripted world") {
    SUBCASE("success at round 1") {
        Rig rig({world_entry("t", 1)});
        auto traj = rig.rollout("t", 4);
        CHECK(traj.outcome == engine::Outcome::Verified);
        REQUIRE(traj.rounds.size() == 1);
        CHECK(traj.rounds[0].verdict.verified);
    }
    SUBCASE("budget exhaustion after 4 failed rounds") {
        Rig rig({world_entry("t")});
        auto traj = rig.rollout("t", 4);
        CHECK(traj.outcome == engine::Outcome::BudgetExhausted);
        CHECK(traj.rounds.size() == 4);
        for (const auto& r : traj.rounds) CHECK(!r.verdict.verified);
    }
    SUBCASE("success at round 3 stops immediately, earlier rounds failed") {
        Rig rig({world_entry("t", 3, {"sorry", "BAD_TYPE"})});
        auto traj = rig.rollout("t", 4);
        CHECK(traj.outcome == engine::Outcome::Verified);
        REQUIRE(traj.rounds.size() == 3);
        CHECK(!traj.rounds[0].verdict.verified);
        CHECK(!traj.rounds[1].verdict.verified);
        CHECK(traj.rounds[2].verdict.verified);
        CHECK(traj.rounds[2].round_index == 3);
    }
    SUBCASE("an extraction failure is a failed round with the placeholder feedback") {
        Rig rig({world_entry("t", 2, {"NO_CODE"})});
        auto traj = rig.rollout("t", 3);
        REQUIRE(traj.rounds.size() == 2);
        CHECK(traj.rounds[0].attempt.empty());
        CHECK(traj.rounds[0].verdict.feedback == policy::kNoLeanCodeFound);
        CHECK(traj.rounds[0].verdict.failure_tags.count(verifier::FailureTag::NoLeanCodeFound) ==
              1);
        CHECK(traj.rounds[1].verdict.verified);
    }
    SUBCASE("round budget below 1 is refused") {
        Rig rig({world_entry("t", 1)});
        CHECK_THROWS_AS(rig.rollout("t", 0), DomainError);
    }
    SUBCASE("every rollout halts within its budget") {
        Rig rig({world_entry("a", 1), world_entry("b", 3, {"sorry", "BAD_TACTIC"}),
                 world_entry("c"), world_entry("d", 2, {"NO_CODE"})});
        for (const char* id : {"a", "b", "c", "d"})
            for (int budget : {1, 2, 5}) {
                auto traj = rig.rollout(id, budget);
                CHECK(traj.rounds.size() <= static_cast<std::size_t>(budget));
                CHECK(!traj.rounds.empty());
            }
    }
}

TEST_CASE("compact state: round t sees round t-1 only") {
    Rig rig({world_entry("t", 0, {"sorry", "BAD_TYPE", "BAD_IDENT", "BAD_TACTIC"})});
    std::map<int, std::string> prompts;
    rig.rollout("t", 4, 0, [&](int round, const policy::PromptBundle& b) {
        prompts[round] = b.rendered_text;
    });
    REQUIRE(prompts.size() == 4);

    // Round 1 carries no attempt material at all.
    CHECK(prompts[1].find("SENTINEL_t_R") == std::string::npos);
    // Round t carries exactly the round t-1 sentinel.
    for (int t = 2; t <= 4; ++t) {
        for (int older = 1; older <= 4; ++older) {
            std::string sentinel = "SENTINEL_t_R" + std::to_string(older);
            bool present = prompts[t].find(sentinel) != std::string::npos;
            CHECK(present == (older == t - 1));
        }
    }
}

TEST_CASE("aborted rollouts preserve completed rounds") {
    Rig rig({world_entry("t", 0, {"sorry"})});

    struct FailAfter : verifier::VerifierClient {
        verifier::SimulatedVerifier& inner;
        int allowed;
        int calls = 0;
        FailAfter(verifier::SimulatedVerifier& v, int n) : inner(v), allowed(n) {}
        verifier::Verdict verify(const std::string& id, const std::string& proof,
                                 const verifier::VerifyOptions& opts) override {
            if (++calls > allowed) throw VerifierUnavailable("backend gone");
            return inner.verify(id, proof, opts);
        }
    } flaky(*rig.world.simulator, 2);

    engine::RolloutOptions opts;
    opts.round_budget = 5;
    auto traj = engine::run_rollout(rig.world.statement("t"), opts, rig.memory, rig.embedder,
                                    flaky, *rig.world.prover, 1, 0);
    CHECK(traj.outcome == engine::Outcome::Aborted);
    CHECK(traj.rounds.size() == 2);
    CHECK(traj.abort_reason == "backend gone");
}

TEST_CASE("run_batch") {
    auto spec = std::vector<nlohmann::json>{world_entry("a", 1),
                                            world_entry("b", 2, {"sorry"})};

    SUBCASE("two statements times three samples") {
        Rig rig(spec);
        engine::BatchOptions opts;
        opts.rollout.round_budget = 3;
        opts.n_samples = 3;
        opts.parallelism = 2;
        auto result = engine::run_batch(rig.world.statements, opts, rig.memory, rig.embedder,
                                        *rig.world.simulator, *rig.world.prover);
        CHECK(result.trajectories.size() == 6);
        CHECK(result.report.total == 6);
        CHECK(result.report.verified == 6);
        // Stored order is (statement_id, sample_index), not completion order.
        std::vector<std::pair<std::string, int>> order;
        for (const auto& t : result.trajectories) order.push_back({t.statement_id, t.sample_index});
        auto sorted = order;
        std::sort(sorted.begin(), sorted.end());
        CHECK(order == sorted);
    }

    SUBCASE("identical run_seed twice gives byte-identical serialization") {
        Rig rig(spec);
        engine::BatchOptions opts;
        opts.rollout.round_budget = 3;
        opts.n_samples = 2;
        opts.run_seed = 99;
        auto a = engine::run_batch(rig.world.statements, opts, rig.memory, rig.embedder,
                                   *rig.world.simulator, *rig.world.prover);
        auto b = engine::run_batch(rig.world.statements, opts, rig.memory, rig.embedder,
                                   *rig.world.simulator, *rig.world.prover);
        REQUIRE(a.trajectories.size() == b.trajectories.size());
        for (std::size_t i = 0; i < a.trajectories.size(); ++i)
            CHECK(a.trajectories[i].to_json().dump() == b.trajectories[i].to_json().dump());
    }

    SUBCASE("parallelism does not affect stored output") {
        Rig rig(spec);
        engine::BatchOptions seq;
        seq.rollout.round_budget = 3;
        seq.n_samples = 4;
        seq.parallelism = 1;
        seq.run_seed = 5;
        auto par = seq;
        par.parallelism = 8;
        auto a = engine::run_batch(rig.world.statements, seq, rig.memory, rig.embedder,
                                   *rig.world.simulator, *rig.world.prover);
        auto b = engine::run_batch(rig.world.statements, par, rig.memory, rig.embedder,
                                   *rig.world.simulator, *rig.world.prover);
        REQUIRE(a.trajectories.size() == b.trajectories.size());
        for (std::size_t i = 0; i < a.trajectories.size(); ++i)
            CHECK(a.trajectories[i].to_json().dump() == b.trajectories[i].to_json().dump());
    }

    SUBCASE("individual aborts do not abort the batch") {
        Rig rig(spec);
        struct Partial : policy::PolicyClient {
            policy::PolicyClient& inner;
            explicit Partial(policy::PolicyClient& p) : inner(p) {}
            std::string generate(const policy::GenerationRequest& req) override {
                if (req.statement_id == "b") throw PolicyUnavailable("b endpoint down");
                return inner.generate(req);
            }
        } partial(*rig.world.prover);

        engine::BatchOptions opts;
        opts.rollout.round_budget = 2;
        opts.n_samples = 2;
        auto result = engine::run_batch(rig.world.statements, opts, rig.memory, rig.embedder,
                                        *rig.world.simulator, partial);
        CHECK(result.report.total == 4);
        CHECK(result.report.verified == 2);
        CHECK(result.report.aborted == 2);
        for (const auto& t : result.trajectories)
            if (t.statement_id == "b") CHECK(t.outcome == engine::Outcome::Aborted);
    }

    SUBCASE("rollout seeds differ across statements and samples") {
        std::set<std::uint64_t> seeds;
        for (const char* id : {"a", "b", "c"})
            for (int j = 0; j < 4; ++j) seeds.insert(engine::rollout_seed(7, id, j));
        CHECK(seeds.size() == 12);
    }
}

TEST_CASE("trajectory serialization round-trips") {
    Rig rig({world_entry("t", 3, {"sorry", "BAD_TYPE"})});
    auto traj = rig.rollout("t", 4);
    auto j = traj.to_json();
    auto back = engine::Trajectory::from_json(j);
    CHECK(back.to_json().dump() == j.dump());
    CHECK(back.statement_id == traj.statement_id);
    CHECK(back.rounds.size() == traj.rounds.size());
    CHECK(back.rounds[1].verdict.feedback == traj.rounds[1].verdict.feedback);
}
