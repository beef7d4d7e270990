#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proofloop/engine.hpp"

namespace proofloop::eval {

using json = nlohmann::json;

struct StatementTally {
    std::string statement_id;
    int n = 0;  // samples drawn
    int m = 0;  // successful samples
};

// Unbiased estimator 1 - C(n-m, k)/C(n, k), evaluated in product form so no
// factorial ever materializes; stable for n up to at least 10,000.
double pass_at_k(int n, int m, int k);

// Per-statement tallies; aborted rollouts count toward neither n nor m.
std::vector<StatementTally> tally_trajectories(const std::vector<engine::Trajectory>& trajectories);

// Unweighted mean of per-statement pass@k. Every tally needs n >= k; the
// error lists offenders.
double benchmark_pass_at_k(const std::vector<StatementTally>& tallies, int k);

// Pass at refinement depth R with k samples: a sample succeeds iff any of its
// first R rounds verified; then the unbiased estimator applies per statement
// and the results are macro-averaged.
double pass_rk(const std::vector<engine::Trajectory>& trajectories, int R, int k);

struct Allocation {
    int R = 1;
    int k = 1;
    double pass_value = 0.0;
    bool is_best = false;
};

struct BudgetPoint {
    long budget = 1;  // B, with R * k = B for every allocation
    std::vector<Allocation> allocations;
    Allocation best;

    json to_json() const;
};

// Evaluates every feasible factorization R * k = B (R within available
// depth, k within available samples) and reports the max.
BudgetPoint best_pass(const std::vector<engine::Trajectory>& trajectories, long budget);

struct SweepRow {
    long budget = 1;
    std::optional<BudgetPoint> point;
    std::string error;  // set when this budget had no feasible allocation
};

std::vector<SweepRow> budget_sweep(const std::vector<engine::Trajectory>& trajectories,
                                   const std::vector<long>& budgets);

// CSV table of a sweep: B,R,k,pass,is_best.
std::string sweep_csv(const std::vector<SweepRow>& rows);

json sweep_report(const std::vector<SweepRow>& rows);

}  // namespace proofloop::eval
