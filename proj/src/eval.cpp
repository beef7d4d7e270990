#include "proofloop/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "proofloop/errors.hpp"

namespace proofloop::eval {

double pass_at_k(int n, int m, int k) {
    if (n < 1) throw DomainError("pass_at_k: n must be >= 1");
    if (m < 0 || m > n) throw DomainError("pass_at_k: m out of [0, n]");
    if (k < 1 || k > n) throw DomainError("pass_at_k: k out of [1, n]");
    if (m == 0) return 0.0;
    if (n - m < k) return 1.0;  // every k-subset hits a success
    double prod = 1.0;
    for (int i = 0; i < k; ++i)
        prod *= static_cast<double>(n - m - i) / static_cast<double>(n - i);
    double p = 1.0 - prod;
    return std::clamp(p, 0.0, 1.0);
}

namespace {

struct PerStatement {
    std::vector<const engine::Trajectory*> samples;  // aborted excluded
};

std::map<std::string, PerStatement> group_by_statement(
    const std::vector<engine::Trajectory>& trajectories) {
    std::map<std::string, PerStatement> groups;
    for (const auto& t : trajectories) {
        if (t.outcome == engine::Outcome::Aborted) continue;
        groups[t.statement_id].samples.push_back(&t);
    }
    return groups;
}

bool verified_within_depth(const engine::Trajectory& t, int depth) {
    for (const auto& r : t.rounds)
        if (r.round_index <= depth && r.verdict.verified) return true;
    return false;
}

}  // namespace

std::vector<StatementTally> tally_trajectories(
    const std::vector<engine::Trajectory>& trajectories) {
    std::vector<StatementTally> out;
    for (const auto& [id, group] : group_by_statement(trajectories)) {
        StatementTally tally;
        tally.statement_id = id;
        tally.n = static_cast<int>(group.samples.size());
        for (const auto* t : group.samples)
            if (t->verified()) ++tally.m;
        out.push_back(std::move(tally));
    }
    return out;
}

double benchmark_pass_at_k(const std::vector<StatementTally>& tallies, int k) {
    if (tallies.empty()) throw DomainError("benchmark_pass_at_k: no tallies");
    std::string offenders;
    for (const auto& t : tallies)
        if (t.n < k) offenders += (offenders.empty() ? "" : ", ") + t.statement_id;
    if (!offenders.empty())
        throw DomainError("benchmark_pass_at_k: n < k for statements: " + offenders);
    double sum = 0.0;
    for (const auto& t : tallies) sum += pass_at_k(t.n, t.m, k);
    return sum / static_cast<double>(tallies.size());
}

double pass_rk(const std::vector<engine::Trajectory>& trajectories, int R, int k) {
    if (R < 1) throw DomainError("pass_rk: R must be >= 1");
    if (k < 1) throw DomainError("pass_rk: k must be >= 1");
    auto groups = group_by_statement(trajectories);
    if (groups.empty()) throw DomainError("pass_rk: no usable trajectories");

    double sum = 0.0;
    for (const auto& [id, group] : groups) {
        int n = static_cast<int>(group.samples.size());
        if (k > n)
            throw DomainError("pass_rk: k=" + std::to_string(k) + " exceeds samples for " + id);
        int m = 0;
        for (const auto* t : group.samples) {
            if (t->round_budget < R)
                throw DomainError("pass_rk: trajectory " + t->ref() + " ran with budget " +
                                  std::to_string(t->round_budget) + " < R=" + std::to_string(R));
            if (verified_within_depth(*t, R)) ++m;
        }
        sum += pass_at_k(n, m, k);
    }
    return sum / static_cast<double>(groups.size());
}

json BudgetPoint::to_json() const {
    json allocs = json::array();
    for (const auto& a : allocations)
        allocs.push_back(json{
            {"R", a.R}, {"k", a.k}, {"pass", a.pass_value}, {"is_best", a.is_best}});
    return json{{"B", budget},
                {"allocations", std::move(allocs)},
                {"best", {{"R", best.R}, {"k", best.k}, {"pass", best.pass_value}}}};
}

BudgetPoint best_pass(const std::vector<engine::Trajectory>& trajectories, long budget) {
    if (budget < 1) throw DomainError("best_pass: budget must be >= 1");
    auto groups = group_by_statement(trajectories);
    if (groups.empty()) throw NoFeasibleAllocation("no usable trajectories");

    int max_depth = 0;
    int max_samples = 0;
    bool first = true;
    for (const auto& [id, group] : groups) {
        int depth = group.samples.front()->round_budget;
        for (const auto* t : group.samples) depth = std::min(depth, t->round_budget);
        int n = static_cast<int>(group.samples.size());
        if (first) {
            max_depth = depth;
            max_samples = n;
            first = false;
        } else {
            max_depth = std::min(max_depth, depth);
            max_samples = std::min(max_samples, n);
        }
    }

    BudgetPoint point;
    point.budget = budget;
    for (long r = 1; r <= budget; ++r) {
        if (budget % r != 0) continue;
        long k = budget / r;
        if (r > max_depth || k > max_samples) continue;
        Allocation a;
        a.R = static_cast<int>(r);
        a.k = static_cast<int>(k);
        a.pass_value = pass_rk(trajectories, a.R, a.k);
        point.allocations.push_back(a);
    }
    if (point.allocations.empty())
        throw NoFeasibleAllocation("no (R, k) with R*k=" + std::to_string(budget) +
                                   " fits depth " + std::to_string(max_depth) + " and samples " +
                                   std::to_string(max_samples));

    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < point.allocations.size(); ++i)
        if (point.allocations[i].pass_value > point.allocations[best_idx].pass_value) best_idx = i;
    point.allocations[best_idx].is_best = true;
    point.best = point.allocations[best_idx];
    return point;
}

std::vector<SweepRow> budget_sweep(const std::vector<engine::Trajectory>& trajectories,
                                   const std::vector<long>& budgets) {
    std::vector<SweepRow> rows;
    rows.reserve(budgets.size());
    for (long b : budgets) {
        SweepRow row;
        row.budget = b;
        try {
            row.point = best_pass(trajectories, b);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "B,R,k,pass,is_best\n";
    char buf[64];
    for (const auto& row : rows) {
        if (!row.point) continue;
        for (const auto& a : row.point->allocations) {
            std::snprintf(buf, sizeof(buf), "%ld,%d,%d,%.10g,%s\n", row.budget, a.R, a.k,
                          a.pass_value, a.is_best ? "true" : "false");
            out += buf;
        }
    }
    return out;
}

json sweep_report(const std::vector<SweepRow>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        if (row.point) {
            out.push_back(row.point->to_json());
        } else {
            out.push_back(json{{"B", row.budget}, {"error", row.error}});
        }
    }
    return out;
}

}  // namespace proofloop::eval
