#include <doctest.h>

#include "proofloop/engine.hpp"
#include "proofloop/errors.hpp"
#include "proofloop/repair.hpp"
#include "proofloop/text.hpp"

using namespace proofloop;

namespace {

engine::RoundRecord round_of(int index, std::string attempt, std::string feedback,
                             bool verified = false) {
    engine::RoundRecord r;
    r.round_index = index;
    r.attempt = std::move(attempt);
    r.verdict.verified = verified;
    r.verdict.feedback = std::move(feedback);
    r.retrieved_ids = {"ref_a", "ref_b"};
    return r;
}

engine::Trajectory traj_of(std::vector<engine::RoundRecord> rounds,
                           const std::string& id = "stmt") {
    engine::Trajectory t;
    t.statement_id = id;
    t.sample_index = 0;
    t.round_budget = static_cast<int>(rounds.size());
    t.outcome = rounds.back().verdict.verified ? engine::Outcome::Verified
                                               : engine::Outcome::BudgetExhausted;
    t.rounds = std::move(rounds);
    return t;
}

std::string tokens(int n, const std::string& base) {
    std::string out;
    for (int i = 0; i < n; ++i) out += base + std::to_string(i) + " ";
    return out;
}

}  // namespace

TEST_CASE("extract_repairs") {
    SUBCASE("a single-round trajectory yields no candidates") {
        auto t = traj_of({round_of(1, "p := by one", "err", true)});
        auto [examples, report] = repair::extract_repairs(t);
        CHECK(examples.empty());
        CHECK(report.extracted == 0);
    }

    SUBCASE("a clean 4-round trajectory yields 3 examples") {
        auto t = traj_of({round_of(1, "p := by alpha beta gamma", "error one"),
                          round_of(2, "p := by delta epsilon zeta", "error two"),
                          round_of(3, "p := by eta theta iota", "error three"),
                          round_of(4, "p := by kappa lambda mu", "", true)});
        auto [examples, report] = repair::extract_repairs(t);
        REQUIRE(examples.size() == 3);
        CHECK(report.extracted == 3);
        CHECK(report.kept == 3);
        CHECK(examples[0].round_index == 2);
        CHECK(examples[0].prev_proof == "p := by alpha beta gamma");
        CHECK(examples[0].prev_feedback == "error one");
        CHECK(examples[0].target_proof == "p := by delta epsilon zeta");
        CHECK(examples[0].retrieved_ids == std::vector<std::string>{"ref_a", "ref_b"});
        CHECK(examples[0].source_trajectory == "stmt#0");
        CHECK(examples[2].round_index == 4);
    }

    SUBCASE("a 2-token revision is a near-no-op") {
        auto t = traj_of({round_of(1, "p := by a b c d", "err"),
                          round_of(2, "p := by a b x y", "", true)});
        auto [examples, report] = repair::extract_repairs(t);
        CHECK(examples.empty());
        CHECK(report.dropped_near_noop == 1);
    }
    SUBCASE("a 3-token revision is kept (boundary)") {
        auto t = traj_of({round_of(1, "p := by a b c d", "err"),
                          round_of(2, "p := by x y z d", "", true)});
        auto [examples, report] = repair::extract_repairs(t);
        CHECK(examples.size() == 1);
        CHECK(report.dropped_near_noop == 0);
    }

    SUBCASE("feedback over 8000 tokens is dropped, exactly 8000 is kept") {
        auto over = traj_of({round_of(1, "p := by " + tokens(10, "a"), tokens(8001, "w")),
                             round_of(2, "p := by " + tokens(10, "b"), "", true)});
        auto [e1, r1] = repair::extract_repairs(over);
        CHECK(e1.empty());
        CHECK(r1.dropped_long_feedback == 1);

        auto at = traj_of({round_of(1, "p := by " + tokens(10, "a"), tokens(8000, "w")),
                           round_of(2, "p := by " + tokens(10, "b"), "", true)});
        auto [e2, r2] = repair::extract_repairs(at);
        CHECK(e2.size() == 1);
        CHECK(r2.dropped_long_feedback == 0);
    }

    SUBCASE("transitions out of a malformed previous attempt are dropped") {
        auto placeholder = traj_of({round_of(1, "", "no_lean_code_found"),
                                    round_of(2, "p := by real proof now", "", true)});
        auto [e1, r1] = repair::extract_repairs(placeholder);
        CHECK(e1.empty());
        CHECK(r1.dropped_empty_prev == 1);

        // No := and no `by` token: not a proof head.
        auto headless = traj_of({round_of(1, "just some prose text here", "err"),
                                 round_of(2, "p := by real proof now", "", true)});
        auto [e2, r2] = repair::extract_repairs(headless);
        CHECK(e2.empty());
        CHECK(r2.dropped_empty_prev == 1);
    }

    SUBCASE("filters apply in order, one count per candidate") {
        auto t = traj_of({round_of(1, "", "no_lean_code_found"),
                          round_of(2, "p := by " + tokens(6, "a"), tokens(8001, "w")),
                          round_of(3, "p := by " + tokens(6, "b"), "err"),
                          round_of(4, "p := by " + tokens(6, "b"), "", true)});
        auto [examples, report] = repair::extract_repairs(t);
        CHECK(report.extracted == 3);
        CHECK(report.dropped_empty_prev == 1);   // round 1 -> 2
        CHECK(report.dropped_long_feedback == 1);  // round 2 -> 3
        CHECK(report.dropped_near_noop == 1);    // round 3 -> 4 (identical)
        CHECK(report.kept == 0);
        CHECK(report.extracted == report.kept + report.dropped_empty_prev +
                                      report.dropped_long_feedback + report.dropped_near_noop +
                                      report.dropped_dedup);
        CHECK(examples.empty());
    }

    SUBCASE("aborted trajectories are refused") {
        auto t = traj_of({round_of(1, "p := by x y z", "err")});
        t.outcome = engine::Outcome::Aborted;
        CHECK_THROWS_AS(repair::extract_repairs(t), DomainError);
    }

    SUBCASE("candidate count never exceeds rounds - 1") {
        for (int rounds = 1; rounds <= 6; ++rounds) {
            std::vector<engine::RoundRecord> rs;
            for (int i = 1; i <= rounds; ++i)
                rs.push_back(round_of(i, "p := by " + tokens(4, "t" + std::to_string(i)), "err",
                                      i == rounds));
            auto [examples, report] = repair::extract_repairs(traj_of(rs));
            CHECK(examples.size() <= static_cast<std::size_t>(rounds - 1));
            CHECK(report.extracted == static_cast<std::size_t>(rounds - 1));
        }
    }

    SUBCASE("kept examples satisfy the filter rules post hoc") {
        auto t = traj_of({round_of(1, "p := by alpha beta gamma delta", "lean error alpha"),
                          round_of(2, "p := by one two three four", "lean error beta"),
                          round_of(3, "p := by five six seven eight", "", true)});
        auto [examples, report] = repair::extract_repairs(t);
        for (const auto& ex : examples) {
            CHECK(!ex.prev_proof.empty());
            CHECK(!ex.prev_feedback.empty());
            CHECK(!ex.target_proof.empty());
            CHECK(ex.round_index >= 2);
            CHECK(text::count_tokens(ex.prev_feedback) <= repair::kMaxFeedbackTokens);
            CHECK(text::token_edit_distance(ex.prev_proof, ex.target_proof) >=
                  repair::kMinTokenDiff);
        }
    }
}

TEST_CASE("dedup_repairs") {
    auto mk = [](const std::string& prev, const std::string& fb, const std::string& target) {
        corpus::RepairExample ex;
        ex.statement_id = "s";
        ex.prev_proof = prev;
        ex.prev_feedback = fb;
        ex.target_proof = target;
        ex.round_index = 2;
        return ex;
    };

    SUBCASE("identical triples collapse to the first") {
        auto a = mk("p1", "f1", "p2");
        a.source_trajectory = "first";
        auto b = mk("p1", "f1", "p2");
        b.source_trajectory = "second";
        auto out = repair::dedup_repairs({a, b});
        REQUIRE(out.size() == 1);
        CHECK(out[0].source_trajectory == "first");
    }
    SUBCASE("a different feedback keeps both") {
        auto out = repair::dedup_repairs({mk("p1", "f1", "p2"), mk("p1", "f2", "p2")});
        CHECK(out.size() == 2);
    }
    SUBCASE("count matches a quadratic oracle on a mixed batch") {
        std::vector<corpus::RepairExample> batch;
        for (int i = 0; i < 10; ++i)
            batch.push_back(mk("p" + std::to_string(i % 7), "f" + std::to_string(i % 5),
                               "t" + std::to_string(i % 3)));
        // Oracle: keep element i iff no j < i has the identical triple.
        std::size_t expected = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            bool dup = false;
            for (std::size_t j = 0; j < i; ++j)
                dup = dup || (batch[j].prev_proof == batch[i].prev_proof &&
                              batch[j].prev_feedback == batch[i].prev_feedback &&
                              batch[j].target_proof == batch[i].target_proof);
            if (!dup) ++expected;
        }
        CHECK(repair::dedup_repairs(batch).size() == expected);
    }
    SUBCASE("idempotent and order-stable") {
        std::vector<corpus::RepairExample> batch = {mk("a", "b", "c"), mk("d", "e", "f"),
                                                    mk("a", "b", "c"), mk("g", "h", "i")};
        auto once = repair::dedup_repairs(batch);
        auto twice = repair::dedup_repairs(once);
        REQUIRE(once.size() == 3);
        REQUIRE(twice.size() == once.size());
        CHECK(once[0].prev_proof == "a");
        CHECK(once[1].prev_proof == "d");
        CHECK(once[2].prev_proof == "g");
    }
}

TEST_CASE("is_malformed_proof") {
    CHECK(repair::is_malformed_proof(""));
    CHECK(repair::is_malformed_proof("   \n "));
    CHECK(repair::is_malformed_proof("no_lean_code_found"));
    CHECK(repair::is_malformed_proof("words without a proof head"));
    CHECK(!repair::is_malformed_proof("theorem t : True := trivial"));
    CHECK(!repair::is_malformed_proof("proof by induction"));  // has a `by` token
    CHECK(repair::is_malformed_proof("bypass bystander"));     // `by` only as a prefix
}
