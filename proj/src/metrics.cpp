#include "overtune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace overtune {

namespace {
constexpr double kOracleTolerance = 1e-12;
}

void check_trajectory(const ScoreTrajectory& traj) {
    if (traj.val.empty()) {
        throw std::invalid_argument("empty trajectory");
    }
    if (traj.val.size() != traj.test.size()) {
        throw std::invalid_argument("val/test length mismatch");
    }
    for (std::size_t i = 0; i < traj.val.size(); ++i) {
        if (!std::isfinite(traj.val[i]) || !std::isfinite(traj.test[i])) {
            throw std::invalid_argument("non-finite score in trajectory");
        }
    }
}

IncumbentTrace incumbent_trace(const ScoreTrajectory& traj) {
    check_trajectory(traj);
    const std::size_t n = traj.length();
    IncumbentTrace trace;
    trace.incumbent_index.resize(n);
    trace.incumbent_val.resize(n);
    trace.incumbent_test.resize(n);
    trace.best_incumbent_test_so_far.resize(n);

    std::size_t best = 0;
    double best_test_so_far = traj.test[0];
    for (std::size_t t = 0; t < n; ++t) {
        if (traj.val[t] < traj.val[best]) {  // strict: earliest index keeps ties
            best = t;
        }
        trace.incumbent_index[t] = best + 1;
        trace.incumbent_val[t] = traj.val[best];
        trace.incumbent_test[t] = traj.test[best];
        best_test_so_far = std::min(best_test_so_far, traj.test[best]);
        trace.best_incumbent_test_so_far[t] = best_test_so_far;
    }
    return trace;
}

std::vector<double> overtuning(const IncumbentTrace& trace) {
    const std::size_t n = trace.incumbent_test.size();
    std::vector<double> ot(n);
    for (std::size_t t = 0; t < n; ++t) {
        ot[t] = trace.incumbent_test[t] - trace.best_incumbent_test_so_far[t];
    }
    return ot;
}

std::vector<double> meta_overfitting(const IncumbentTrace& trace) {
    const std::size_t n = trace.incumbent_test.size();
    std::vector<double> of(n);
    for (std::size_t t = 0; t < n; ++t) {
        of[t] = trace.incumbent_test[t] - trace.incumbent_val[t];
    }
    return of;
}

std::vector<double> trajectory_test_regret(const ScoreTrajectory& traj,
                                           const IncumbentTrace& trace) {
    const std::size_t n = trace.incumbent_test.size();
    if (traj.length() != n) {
        throw std::invalid_argument("trajectory/trace length mismatch");
    }
    std::vector<double> tr(n);
    double best_test = traj.test[0];
    for (std::size_t t = 0; t < n; ++t) {
        best_test = std::min(best_test, traj.test[t]);
        tr[t] = trace.incumbent_test[t] - best_test;
    }
    return tr;
}

std::vector<double> oracle_test_regret(const IncumbentTrace& trace,
                                       double oracle_min_test) {
    const std::size_t n = trace.incumbent_test.size();
    if (n == 0) {
        throw std::invalid_argument("empty trace");
    }
    if (oracle_min_test > trace.best_incumbent_test_so_far.back() + kOracleTolerance) {
        throw std::invalid_argument("inconsistent oracle");
    }
    std::vector<double> reg(n);
    for (std::size_t t = 0; t < n; ++t) {
        reg[t] = trace.incumbent_test[t] - oracle_min_test;
    }
    return reg;
}

RelativeOvertuning relative_overtuning(const IncumbentTrace& trace,
                                       const std::vector<double>& ot,
                                       double epsilon) {
    if (epsilon <= 0.0) {
        throw std::invalid_argument("epsilon must be positive");
    }
    const std::size_t n = trace.incumbent_test.size();
    if (ot.size() != n) {
        throw std::invalid_argument("ot/trace length mismatch");
    }
    RelativeOvertuning out;
    out.rel_ot.resize(n);
    out.denominator.resize(n);
    const double first_test = trace.incumbent_test.empty() ? 0.0 : trace.incumbent_test[0];
    for (std::size_t t = 0; t < n; ++t) {
        const double denom = first_test - trace.best_incumbent_test_so_far[t];
        out.denominator[t] = denom;
        if (denom > epsilon) {
            out.rel_ot[t] = ot[t] / denom;
        }
    }
    return out;
}

OvertuningReport compute_report(const ScoreTrajectory& traj, double epsilon,
                                std::optional<double> oracle_min_test) {
    const IncumbentTrace trace = incumbent_trace(traj);
    OvertuningReport report;
    report.ot = overtuning(trace);
    report.of = meta_overfitting(trace);
    report.tr = trajectory_test_regret(traj, trace);
    if (oracle_min_test) {
        report.oracle_tr = oracle_test_regret(trace, *oracle_min_test);
    }
    auto rel = relative_overtuning(trace, report.ot, epsilon);
    report.rel_ot = std::move(rel.rel_ot);
    report.denominator = std::move(rel.denominator);
    report.epsilon = epsilon;
    return report;
}

}  // namespace overtune
