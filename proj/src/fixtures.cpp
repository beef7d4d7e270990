#include "proofloop/fixtures.hpp"

#include <algorithm>

#include "proofloop/errors.hpp"
#include "proofloop/jsonl.hpp"
#include "proofloop/text.hpp"

namespace proofloop::fixtures {

json ScriptedBehavior::to_json() const {
    json j{{"statement_id", statement_id}};
    if (success_round) j["success_round"] = *success_round;
    if (!defect_sequence.empty()) j["defects"] = defect_sequence;
    if (!format_ok_sequence.empty()) j["format_ok"] = format_ok_sequence;
    if (!success_samples.empty()) j["success_samples"] = success_samples;
    return j;
}

ScriptedBehavior ScriptedBehavior::from_json(const json& j) {
    ScriptedBehavior b;
    b.statement_id = j.value("statement_id", j.value("id", ""));
    if (j.contains("success_round")) b.success_round = j["success_round"].get<int>();
    if (j.contains("defects")) b.defect_sequence = j["defects"].get<std::vector<std::string>>();
    if (j.contains("format_ok")) b.format_ok_sequence = j["format_ok"].get<std::vector<bool>>();
    if (j.contains("success_samples"))
        b.success_samples = j["success_samples"].get<std::vector<int>>();
    return b;
}

ScriptedPolicyClient::ScriptedPolicyClient(std::map<std::string, ScriptedBehavior> behaviors,
                                           std::map<std::string, std::string> solutions)
    : behaviors_(std::move(behaviors)), solutions_(std::move(solutions)) {}

std::string ScriptedPolicyClient::defective_proof(const std::string& solution,
                                                  const std::string& statement_id, int round_index,
                                                  const std::string& defect) {
    // Three round-dependent tokens, so consecutive attempts differ by at
    // least the near-no-op threshold and stale-round sentinels are detectable
    // in prompts.
    return solution + "\n  -- SENTINEL_" + statement_id + "_R" + std::to_string(round_index) +
           " round " + std::to_string(round_index) + " step " +
           std::to_string(round_index * 7 + 3) + "\n  " + defect;
}

std::string ScriptedPolicyClient::generate(const policy::GenerationRequest& request) {
    auto bit = behaviors_.find(request.statement_id);
    auto sit = solutions_.find(request.statement_id);
    if (bit == behaviors_.end() || sit == solutions_.end())
        throw PolicyUnavailable("no scripted behavior for statement " + request.statement_id);
    const auto& b = bit->second;
    const auto& solution = sit->second;
    int r = request.round_index;

    bool sample_can_succeed =
        b.success_samples.empty() ||
        std::find(b.success_samples.begin(), b.success_samples.end(), request.sample_index) !=
            b.success_samples.end();
    bool succeed = b.success_round && r >= *b.success_round && sample_can_succeed;

    bool format_ok = true;
    if (r - 1 < static_cast<int>(b.format_ok_sequence.size()))
        format_ok = b.format_ok_sequence[r - 1];

    if (succeed) {
        std::string proof = solution;
        if (format_ok)
            return "Plan: the goal follows from the standard lemmas; apply them and close the "
                   "remaining goals.\n\n```lean\n" +
                   proof + "\n```\n";
        return "```\n-- outline for round " + std::to_string(r) + "\n```\n\n```lean\n" + proof +
               "\n```\n";
    }

    std::string defect = "sorry";
    if (!b.defect_sequence.empty()) {
        std::size_t idx = std::min<std::size_t>(r - 1, b.defect_sequence.size() - 1);
        defect = b.defect_sequence[idx];
    }
    if (defect == "NO_CODE")
        return "I am still analyzing the goal structure for round " + std::to_string(r) +
               "; no proof yet.";

    std::string proof = defective_proof(solution, request.statement_id, r, defect);
    if (format_ok)
        return "Plan: revise the previous attempt along the reported failure for round " +
               std::to_string(r) + ".\n\n```lean\n" + proof + "\n```\n";
    return "```\n-- outline for round " + std::to_string(r) + "\n```\n\n```lean\n" + proof +
           "\n```\n";
}

const corpus::TheoremStatement& World::statement(const std::string& id) const {
    for (const auto& s : statements)
        if (s.id == id) return s;
    throw DomainError("no such statement in world: " + id);
}

World make_world(const std::vector<json>& spec_records) {
    World w;
    w.simulator = std::make_shared<verifier::SimulatedVerifier>();

    for (const auto& rec : spec_records) {
        corpus::TheoremStatement s;
        s.id = rec.value("id", "");
        s.lean_statement = rec.at("lean_statement").get<std::string>();
        if (s.id.empty()) s.id = corpus::statement_id_for(s.lean_statement);
        s.source = corpus::StatementSource::Public;

        std::string solution = rec.at("solution").get<std::string>();
        ScriptedBehavior b = ScriptedBehavior::from_json(rec);
        b.statement_id = s.id;

        if (b.success_round && *b.success_round < 1)
            throw SpecError("success_round must be >= 1 for " + s.id);
        if (b.defect_sequence.empty()) {
            int needed = b.success_round ? *b.success_round - 1 : 1;
            b.defect_sequence.assign(std::max(needed, 1), "sorry");
        }
        if (b.success_round &&
            static_cast<int>(b.defect_sequence.size()) < *b.success_round - 1)
            throw SpecError("defect sequence shorter than success_round - 1 for " + s.id);

        w.simulator->register_statement(s.id, solution);

        verifier::VerifyOptions opts;
        auto success = w.simulator->verify(s.id, solution, opts);
        if (!success.verified)
            throw SpecError("canonical solution fails simulation for " + s.id + ": " +
                            success.feedback);
        for (std::size_t i = 0; i < b.defect_sequence.size(); ++i) {
            if (b.defect_sequence[i] == "NO_CODE") continue;
            auto proof = ScriptedPolicyClient::defective_proof(solution, s.id,
                                                               static_cast<int>(i) + 1,
                                                               b.defect_sequence[i]);
            if (w.simulator->verify(s.id, proof, opts).verified)
                throw SpecError("defect round " + std::to_string(i + 1) + " verifies for " + s.id);
        }

        w.solutions[s.id] = std::move(solution);
        w.behaviors[s.id] = std::move(b);
        w.statements.push_back(std::move(s));
    }

    w.prover = std::make_shared<ScriptedPolicyClient>(w.behaviors, w.solutions);
    return w;
}

World load_world(const std::filesystem::path& path) {
    return make_world(jsonl::read_file(path));
}

std::vector<json> sample_world_spec() {
    auto entry = [](const char* id, const char* stmt, const char* tactic) {
        std::string statement = std::string(stmt) + " := by sorry";
        std::string solution = std::string(stmt) + " := by " + tactic;
        return json{{"id", id}, {"lean_statement", statement}, {"solution", solution}};
    };

    std::vector<json> spec;

    // Solved in round 1 by every sample.
    auto e = entry("w01", "theorem add_comm_nat (a b : Nat) : a + b = b + a", "omega");
    e["success_round"] = 1;
    spec.push_back(e);
    e = entry("w02", "theorem mul_one_nat (n : Nat) : n * 1 = n", "simp");
    e["success_round"] = 1;
    spec.push_back(e);
    e = entry("w03", "theorem zero_add_nat (n : Nat) : 0 + n = n", "simp");
    e["success_round"] = 1;
    spec.push_back(e);
    e = entry("w04", "theorem le_refl_nat (n : Nat) : n <= n", "exact Nat.le_refl n");
    e["success_round"] = 1;
    spec.push_back(e);
    e = entry("w05", "theorem sq_nonneg_int (x : Int) : 0 <= x * x", "positivity");
    e["success_round"] = 1;
    spec.push_back(e);

    // Multi-round repairs, eventually solved by every sample.
    e = entry("w06", "theorem add_assoc_nat (a b c : Nat) : a + b + c = a + (b + c)", "omega");
    e["success_round"] = 2;
    e["defects"] = json::array({"BAD_TYPE"});
    spec.push_back(e);
    e = entry("w07", "theorem two_mul_nat (n : Nat) : 2 * n = n + n", "omega");
    e["success_round"] = 3;
    e["defects"] = json::array({"sorry", "BAD_TACTIC"});
    spec.push_back(e);
    e = entry("w08", "theorem succ_pos_nat (n : Nat) : 0 < n + 1", "omega");
    e["success_round"] = 4;
    e["defects"] = json::array({"BAD_IDENT", "sorry", "BAD_TACTIC"});
    spec.push_back(e);
    e = entry("w09", "theorem min_le_left_nat (a b : Nat) : min a b <= a",
              "exact Nat.min_le_left a b");
    e["success_round"] = 3;
    e["defects"] = json::array({"BAD_CASES", "BAD_TYPE"});
    spec.push_back(e);

    // Partially solved groups: only some sample indices ever succeed.
    e = entry("w10", "theorem abs_nonneg_int (x : Int) : 0 <= |x|", "exact abs_nonneg x");
    e["success_round"] = 2;
    e["defects"] = json::array({"sorry"});
    e["success_samples"] = json::array({0});
    spec.push_back(e);
    e = entry("w11",
              "theorem add_le_add_nat (a b c d : Nat) : a <= b -> c <= d -> a + c <= b + d",
              "intro h1 h2; omega");
    e["success_round"] = 3;
    e["defects"] = json::array({"BAD_TACTIC", "sorry"});
    e["success_samples"] = json::array({0, 1});
    spec.push_back(e);
    e = entry("w12", "theorem pow_two_nat (n : Nat) : n ^ 2 = n * n", "ring");
    e["success_round"] = 2;
    e["defects"] = json::array({"BAD_TYPE"});
    e["success_samples"] = json::array({1});
    spec.push_back(e);
    e = entry("w13", "theorem sub_self_int (x : Int) : x - x = 0", "ring");
    e["success_round"] = 4;
    e["defects"] = json::array({"sorry", "BAD_IDENT", "BAD_TACTIC"});
    e["success_samples"] = json::array({2});
    spec.push_back(e);
    e = entry("w14", "theorem one_le_two_nat : (1 : Nat) <= 2", "omega");
    e["success_round"] = 2;
    e["defects"] = json::array({"BAD_CASES"});
    e["success_samples"] = json::array({0, 2});
    spec.push_back(e);

    // Never solved.
    e = entry("w15",
              "theorem gauss_sum (n : Nat) : 2 * (Finset.range (n + 1)).sum id = n * (n + 1)",
              "induction n <;> simp_all [Finset.sum_range_succ] <;> ring");
    spec.push_back(e);
    e = entry("w16", "theorem prime_two : Nat.Prime 2", "decide");
    e["defects"] = json::array({"BAD_TYPE"});
    spec.push_back(e);
    e = entry("w17", "theorem exists_double (x : Int) : exists y : Int, y + y = 2 * x",
              "exact ⟨x, by ring⟩");
    e["defects"] = json::array({"BAD_CASES"});
    spec.push_back(e);
    e = entry("w18", "theorem add_zero_nat (n : Nat) : n + 0 = n", "simp");
    e["defects"] = json::array({"STALL"});
    spec.push_back(e);

    // Extraction failures for two rounds, then a partial success.
    e = entry("w19", "theorem odd_square (n : Nat) : Odd n -> Odd (n * n)",
              "intro h; exact h.mul h");
    e["success_round"] = 3;
    e["defects"] = json::array({"NO_CODE", "NO_CODE"});
    e["success_samples"] = json::array({0});
    spec.push_back(e);

    // Verified immediately but with a malformed output shape (reward 0.8 path).
    e = entry("w20", "theorem triv_true : True", "trivial");
    e["success_round"] = 1;
    e["format_ok"] = json::array({false});
    spec.push_back(e);

    return spec;
}

}  // namespace proofloop::fixtures
