#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "overtune/ingest.hpp"
#include "overtune/metrics.hpp"

namespace overtune {

// Counterfactual incumbent-selection rules applied post hoc to a
// recorded trajectory.
struct SelectionRule {
    enum class Kind { NaiveArgmin, StopAtBudget, Percentile };
    Kind kind = Kind::NaiveArgmin;
    std::size_t budget = 0;  // StopAtBudget
    double k = 0.0;          // Percentile, in [0, 1]

    std::string name() const;
    // "naive" | "stop@<t>" | "pct@<k>"
    static SelectionRule parse(const std::string& text);
};

struct SelectionOutcome {
    SelectionRule rule;
    std::size_t chosen_index = 0;  // 1-based position in the trajectory
    double chosen_val = 0.0;
    double chosen_test = 0.0;
    // Gap of the chosen configuration to the best incumbent test error
    // within the rule's budget; signed, since a percentile pick may beat
    // every incumbent.
    double final_ot = 0.0;
    // Gap to the best evaluated test error within the budget; >= 0.
    double final_tr = 0.0;
    double delta_vs_naive_test = 0.0;
};

// naive_argmin: final incumbent. stop_at_budget(t): incumbent at t.
// percentile(k): nearest-rank pick at position ceil(k*(T-1))+1 of the
// validation errors sorted ascending (ties kept in evaluation order);
// k = 0 picks the best-validation configuration.
SelectionOutcome apply_rule(const ScoreTrajectory& traj, const SelectionRule& rule);

struct RuleSummary {
    SelectionRule rule;
    double mean_delta_test = 0.0;
    double mean_final_ot = 0.0;
    double win_fraction = 0.0;  // runs where the rule strictly beats naive
    std::size_t n = 0;
    std::size_t n_excluded = 0;  // runs the rule does not apply to
};

struct ScatterPoint {
    std::size_t run_index = 0;
    std::string rule;
    double delta_ot = 0.0;    // rule final_ot minus naive final_ot
    double delta_test = 0.0;  // rule chosen_test minus naive chosen_test
};

struct RuleSweepResult {
    std::vector<RuleSummary> summaries;       // one per rule, input order
    std::vector<ScatterPoint> scatter;        // per (rule, run)
    // Sign-quadrant counts of (delta_ot, delta_test) over the scatter,
    // reported for inspection: [--, -+, +-, ++] with zeros folded into
    // the negative side.
    std::size_t quadrants[4] = {0, 0, 0, 0};
};

RuleSweepResult rule_sweep(const std::vector<Run>& runs,
                           const std::vector<SelectionRule>& rules,
                           unsigned threads = 1);

}  // namespace overtune
