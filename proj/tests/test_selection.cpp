#include <doctest.h>

#include "overtune/rng.hpp"
#include "overtune/selection.hpp"
#include "overtune/synthetic.hpp"
#include "reference.hpp"

using namespace overtune;

TEST_CASE("rule text parsing") {
    CHECK(SelectionRule::parse("naive").kind == SelectionRule::Kind::NaiveArgmin);
    auto stop = SelectionRule::parse("stop@17");
    CHECK(stop.kind == SelectionRule::Kind::StopAtBudget);
    CHECK(stop.budget == 17);
    auto pct = SelectionRule::parse("pct@0.25");
    CHECK(pct.kind == SelectionRule::Kind::Percentile);
    CHECK(pct.k == 0.25);
    CHECK_THROWS_AS(SelectionRule::parse("pct@1.5"), std::invalid_argument);
    CHECK_THROWS_AS(SelectionRule::parse("stop@0"), std::invalid_argument);
    CHECK_THROWS_AS(SelectionRule::parse("grid"), std::invalid_argument);
}

TEST_CASE("stop at budget 1 on the two-point run") {
    ScoreTrajectory traj{{0.3, 0.2}, {0.4, 0.35}};
    SelectionRule rule;
    rule.kind = SelectionRule::Kind::StopAtBudget;
    rule.budget = 1;
    auto outcome = apply_rule(traj, rule);
    CHECK(outcome.chosen_index == 1);
    CHECK(outcome.chosen_test == 0.4);
    CHECK(outcome.delta_vs_naive_test == doctest::Approx(0.05));
}

TEST_CASE("percentile nearest-rank selection") {
    ScoreTrajectory traj{{0.5, 0.4, 0.3, 0.2}, {0.1, 0.2, 0.3, 0.4}};
    SelectionRule rule;
    rule.kind = SelectionRule::Kind::Percentile;
    rule.k = 1.0 / 3.0;
    auto outcome = apply_rule(traj, rule);
    // second-best validation config is the third evaluation (val 0.3)
    CHECK(outcome.chosen_index == 3);
    CHECK(outcome.chosen_val == 0.3);

    rule.k = 1.0;
    CHECK(apply_rule(traj, rule).chosen_val == 0.5);  // worst validation
}

TEST_CASE("percentile ties resolve to the earliest evaluation") {
    ScoreTrajectory traj{{0.4, 0.4, 0.4}, {0.3, 0.2, 0.1}};
    SelectionRule rule;
    rule.kind = SelectionRule::Kind::Percentile;
    rule.k = 0.0;
    CHECK(apply_rule(traj, rule).chosen_index == 1);
}

TEST_CASE("degenerate rules equal naive argmin on fuzzed trajectories") {
    Rng rng(606);
    for (int iter = 0; iter < 1000; ++iter) {
        auto traj = reference::random_trajectory(rng, 40);
        auto naive = apply_rule(traj, SelectionRule{});

        SelectionRule pct0;
        pct0.kind = SelectionRule::Kind::Percentile;
        auto p = apply_rule(traj, pct0);
        CHECK(p.chosen_index == naive.chosen_index);

        SelectionRule stop_full;
        stop_full.kind = SelectionRule::Kind::StopAtBudget;
        stop_full.budget = traj.length();
        auto s = apply_rule(traj, stop_full);
        CHECK(s.chosen_index == naive.chosen_index);
        CHECK(s.delta_vs_naive_test == 0.0);

        // definitional consistency of the delta
        CHECK(p.delta_vs_naive_test == p.chosen_test - naive.chosen_test);
    }
}

TEST_CASE("budget beyond the trajectory is an error") {
    ScoreTrajectory traj{{0.5, 0.4}, {0.5, 0.4}};
    SelectionRule rule;
    rule.kind = SelectionRule::Kind::StopAtBudget;
    rule.budget = 3;
    CHECK_THROWS_AS(apply_rule(traj, rule), std::invalid_argument);
    CHECK_THROWS_AS(apply_rule(ScoreTrajectory{}, SelectionRule{}),
                    std::invalid_argument);
}

TEST_CASE("rule sweep") {
    SyntheticSpec spec;
    spec.n_configs = 100;
    spec.trajectory_len = 60;
    spec.surface = SurfaceSpec{SurfaceSpec::Kind::IidUniform, 0.0, 1.0};
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 50; ++s) seeds.push_back(s);

    SUBCASE("naive only gives zero deltas") {
        spec.sigma_indep = 0.2;
        auto runs = sweep_grid({spec}, seeds);
        auto result = rule_sweep(runs, {SelectionRule{}});
        REQUIRE(result.summaries.size() == 1);
        CHECK(result.summaries[0].mean_delta_test == 0.0);
        CHECK(result.summaries[0].win_fraction == 0.0);
        CHECK(result.summaries[0].n == runs.size());
    }
    SUBCASE("zero noise: no rule beats naive on average") {
        auto runs = sweep_grid({spec}, seeds);
        std::vector<SelectionRule> rules;
        rules.push_back(SelectionRule::parse("stop@30"));
        rules.push_back(SelectionRule::parse("pct@0.1"));
        rules.push_back(SelectionRule::parse("pct@0.25"));
        auto result = rule_sweep(runs, rules);
        for (const auto& summary : result.summaries) {
            CHECK(summary.mean_delta_test >= 0.0);
        }
    }
    SUBCASE("high noise: some rule beats naive on mean chosen test") {
        // With validation this noisy, naive selection is essentially
        // random and seeded corpora exist where a conservative rule wins.
        spec.sigma_indep = 5.0;
        std::vector<std::uint64_t> noisy_seeds;
        for (std::uint64_t s = 300; s < 350; ++s) noisy_seeds.push_back(s);
        auto runs = sweep_grid({spec}, noisy_seeds);
        std::vector<SelectionRule> rules;
        for (const char* text :
             {"stop@10", "stop@30", "pct@0.05", "pct@0.1", "pct@0.2"})
            rules.push_back(SelectionRule::parse(text));
        auto result = rule_sweep(runs, rules);
        bool some_rule_wins = false;
        for (const auto& summary : result.summaries) {
            if (summary.mean_delta_test < 0.0) some_rule_wins = true;
        }
        CHECK(some_rule_wins);
    }
    SUBCASE("oversized budgets are excluded per run") {
        spec.sigma_indep = 0.2;
        auto runs = sweep_grid({spec}, seeds);
        auto result = rule_sweep(runs, {SelectionRule::parse("stop@500")});
        CHECK(result.summaries[0].n == 0);
        CHECK(result.summaries[0].n_excluded == runs.size());
    }
    SUBCASE("parallel sweep matches serial") {
        spec.sigma_indep = 0.3;
        auto runs = sweep_grid({spec}, seeds);
        std::vector<SelectionRule> rules = {SelectionRule::parse("pct@0.1"),
                                            SelectionRule::parse("stop@30")};
        auto serial = rule_sweep(runs, rules, 1);
        auto parallel = rule_sweep(runs, rules, 8);
        REQUIRE(serial.summaries.size() == parallel.summaries.size());
        for (std::size_t r = 0; r < serial.summaries.size(); ++r) {
            CHECK(serial.summaries[r].mean_delta_test ==
                  parallel.summaries[r].mean_delta_test);
            CHECK(serial.summaries[r].mean_final_ot ==
                  parallel.summaries[r].mean_final_ot);
        }
    }
}
