#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace overtune {

// One HPO run: paired validation/test error series, lower is better.
// Ingest is responsible for orientation (maximized metrics arrive negated)
// and finiteness; these types assume both.
struct ScoreTrajectory {
    std::vector<double> val;
    std::vector<double> test;

    std::size_t length() const { return val.size(); }
};

// Throws std::invalid_argument on empty or mismatched/non-finite input.
void check_trajectory(const ScoreTrajectory& traj);

// Best-so-far bookkeeping over a trajectory. Indices are 1-based.
struct IncumbentTrace {
    std::vector<std::size_t> incumbent_index;         // in [1, t]
    std::vector<double> incumbent_val;                // non-increasing
    std::vector<double> incumbent_test;
    std::vector<double> best_incumbent_test_so_far;   // non-increasing, <= incumbent_test
};

// Prefix argmin of validation error; earliest index wins ties, the
// incumbent only changes on strict improvement.
IncumbentTrace incumbent_trace(const ScoreTrajectory& traj);

// ot_t: incumbent test error minus the best test error of any incumbent
// seen so far. Always >= 0, ot_1 = 0.
std::vector<double> overtuning(const IncumbentTrace& trace);

// of_t: incumbent test error minus incumbent validation error. Any sign.
std::vector<double> meta_overfitting(const IncumbentTrace& trace);

// tr_t: incumbent test error minus the best test error of any evaluated
// configuration so far. Always >= 0 and >= ot_t.
std::vector<double> trajectory_test_regret(const ScoreTrajectory& traj,
                                           const IncumbentTrace& trace);

// Per-t gap to the best configuration in the whole search space.
// oracle_min_test must not exceed the observed minimum (tolerance 1e-12).
std::vector<double> oracle_test_regret(const IncumbentTrace& trace,
                                       double oracle_min_test);

struct RelativeOvertuning {
    std::vector<std::optional<double>> rel_ot;  // absent when denominator <= epsilon
    std::vector<double> denominator;            // test(inc_1) - best incumbent test so far
};

// ot_t normalized by the test improvement achieved since the first
// incumbent; undefined (not 0, not inf) when that improvement is <= epsilon.
RelativeOvertuning relative_overtuning(const IncumbentTrace& trace,
                                       const std::vector<double>& ot,
                                       double epsilon);

struct OvertuningReport {
    std::vector<double> ot;
    std::vector<double> of;
    std::vector<double> tr;
    std::optional<std::vector<double>> oracle_tr;
    std::vector<std::optional<double>> rel_ot;
    std::vector<double> denominator;
    double epsilon = 0.0;

    std::size_t length() const { return ot.size(); }
};

constexpr double kDefaultEpsilon = 0.001;

// Convenience: trace + all per-t metrics in one pass.
OvertuningReport compute_report(const ScoreTrajectory& traj,
                                double epsilon = kDefaultEpsilon,
                                std::optional<double> oracle_min_test = std::nullopt);

}  // namespace overtune
