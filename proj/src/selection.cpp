#include "overtune/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "overtune/parallel.hpp"
#include "overtune/text.hpp"

namespace overtune {

std::string SelectionRule::name() const {
    switch (kind) {
        case Kind::NaiveArgmin: return "naive";
        case Kind::StopAtBudget: return "stop@" + std::to_string(budget);
        case Kind::Percentile: return "pct@" + fmt_double(k);
    }
    return "unknown";
}

SelectionRule SelectionRule::parse(const std::string& text) {
    SelectionRule rule;
    if (text == "naive") {
        rule.kind = Kind::NaiveArgmin;
        return rule;
    }
    if (text.rfind("stop@", 0) == 0) {
        auto t = parse_int(std::string_view(text).substr(5));
        if (!t || *t < 1) throw std::invalid_argument("bad rule: " + text);
        rule.kind = Kind::StopAtBudget;
        rule.budget = static_cast<std::size_t>(*t);
        return rule;
    }
    if (text.rfind("pct@", 0) == 0) {
        auto k = parse_double(std::string_view(text).substr(4));
        if (!k || *k < 0.0 || *k > 1.0) throw std::invalid_argument("bad rule: " + text);
        rule.kind = Kind::Percentile;
        rule.k = *k;
        return rule;
    }
    throw std::invalid_argument("unknown rule: " + text);
}

SelectionOutcome apply_rule(const ScoreTrajectory& traj, const SelectionRule& rule) {
    check_trajectory(traj);
    const std::size_t total = traj.length();
    const IncumbentTrace trace = incumbent_trace(traj);

    std::size_t budget = total;
    std::size_t chosen = 0;  // 0-based
    switch (rule.kind) {
        case SelectionRule::Kind::NaiveArgmin:
            chosen = trace.incumbent_index[total - 1] - 1;
            break;
        case SelectionRule::Kind::StopAtBudget:
            if (rule.budget < 1 || rule.budget > total) {
                throw std::invalid_argument("budget out of range");
            }
            budget = rule.budget;
            chosen = trace.incumbent_index[budget - 1] - 1;
            break;
        case SelectionRule::Kind::Percentile: {
            if (rule.k < 0.0 || rule.k > 1.0) {
                throw std::invalid_argument("percentile out of range");
            }
            std::vector<std::size_t> order(total);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return traj.val[a] < traj.val[b];  // ties keep evaluation order
            });
            const std::size_t rank = static_cast<std::size_t>(
                std::ceil(rule.k * static_cast<double>(total - 1)));
            chosen = order[rank];
            break;
        }
    }

    SelectionOutcome out;
    out.rule = rule;
    out.chosen_index = chosen + 1;
    out.chosen_val = traj.val[chosen];
    out.chosen_test = traj.test[chosen];
    out.final_ot = out.chosen_test - trace.best_incumbent_test_so_far[budget - 1];
    double best_test = traj.test[0];
    for (std::size_t t = 0; t < budget; ++t) {
        best_test = std::min(best_test, traj.test[t]);
    }
    out.final_tr = out.chosen_test - best_test;
    out.delta_vs_naive_test = out.chosen_test - trace.incumbent_test[total - 1];
    return out;
}

RuleSweepResult rule_sweep(const std::vector<Run>& runs,
                           const std::vector<SelectionRule>& rules,
                           unsigned threads) {
    if (runs.empty()) {
        throw std::invalid_argument("empty corpus");
    }
    struct PerRun {
        std::vector<std::optional<SelectionOutcome>> outcomes;  // per rule
        double naive_test = 0.0;
        double naive_ot = 0.0;
    };
    std::vector<PerRun> per_run(runs.size());
    parallel_for(runs.size(), threads, [&](std::size_t i) {
        PerRun& pr = per_run[i];
        const SelectionOutcome naive =
            apply_rule(runs[i].traj, SelectionRule{});
        pr.naive_test = naive.chosen_test;
        pr.naive_ot = naive.final_ot;
        pr.outcomes.resize(rules.size());
        for (std::size_t r = 0; r < rules.size(); ++r) {
            if (rules[r].kind == SelectionRule::Kind::StopAtBudget &&
                rules[r].budget > runs[i].traj.length()) {
                continue;  // rule not applicable, reported as excluded
            }
            pr.outcomes[r] = apply_rule(runs[i].traj, rules[r]);
        }
    });

    RuleSweepResult result;
    result.summaries.reserve(rules.size());
    for (std::size_t r = 0; r < rules.size(); ++r) {
        RuleSummary summary;
        summary.rule = rules[r];
        double sum_delta = 0.0, sum_ot = 0.0;
        std::size_t wins = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& outcome = per_run[i].outcomes[r];
            if (!outcome) {
                summary.n_excluded += 1;
                continue;
            }
            sum_delta += outcome->delta_vs_naive_test;
            sum_ot += outcome->final_ot;
            if (outcome->chosen_test < per_run[i].naive_test) ++wins;
            summary.n += 1;

            ScatterPoint point;
            point.run_index = i;
            point.rule = rules[r].name();
            point.delta_ot = outcome->final_ot - per_run[i].naive_ot;
            point.delta_test = outcome->delta_vs_naive_test;
            const std::size_t quadrant =
                (point.delta_ot > 0.0 ? 2u : 0u) + (point.delta_test > 0.0 ? 1u : 0u);
            result.quadrants[quadrant] += 1;
            result.scatter.push_back(std::move(point));
        }
        if (summary.n > 0) {
            const double n = static_cast<double>(summary.n);
            summary.mean_delta_test = sum_delta / n;
            summary.mean_final_ot = sum_ot / n;
            summary.win_fraction = static_cast<double>(wins) / n;
        }
        result.summaries.push_back(summary);
    }
    return result;
}

}  // namespace overtune
