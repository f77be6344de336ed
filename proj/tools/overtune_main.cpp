#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "overtune/analysis.hpp"
#include "overtune/ingest.hpp"
#include "overtune/metrics.hpp"
#include "overtune/replication.hpp"
#include "overtune/selection.hpp"
#include "overtune/synthetic.hpp"
#include "overtune/table.hpp"
#include "overtune/text.hpp"

namespace {

using namespace overtune;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitSchema = 2;
constexpr int kExitArgs = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

CorpusFormat format_from_path(const std::string& path) {
    return path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0
               ? CorpusFormat::Jsonl
               : CorpusFormat::Csv;
}

Corpus load_corpus(const std::string& input, const std::string& metric_table_path,
                   MetricTable* table_out = nullptr) {
    if (!std::filesystem::exists(metric_table_path)) {
        throw IoError("metric table not found: " + metric_table_path);
    }
    if (!std::filesystem::exists(input)) {
        throw IoError("input not found: " + input);
    }
    MetricTable table = parse_metric_table(metric_table_path);
    Corpus corpus = parse_corpus(input, format_from_path(input), table);
    if (table_out) *table_out = std::move(table);
    return corpus;
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto part : split(text, ',')) {
        if (!part.empty()) out.emplace_back(part);
    }
    return out;
}

Table::Cell opt_cell(const std::optional<double>& v) {
    if (v) return *v;
    return std::monostate{};
}

void append_key_cells(std::vector<Table::Cell>& row, const RunKey& key) {
    for (const auto& field : run_key_field_names()) {
        row.emplace_back(run_key_field(key, field));
    }
}

std::vector<std::string> key_columns() { return run_key_field_names(); }

// ---- subcommand bodies ----------------------------------------------------

int cmd_validate(const std::string& input, const std::string& metric_table) {
    Corpus corpus = load_corpus(input, metric_table);
    ValidationReport report = validate_corpus(corpus);
    std::cout << "runs: " << report.run_count << "\n";
    std::cout << "rows read: " << corpus.stats.rows_read
              << " kept: " << corpus.stats.rows_kept
              << " dropped: " << corpus.stats.rows_dropped << "\n";
    std::cout << "runs rejected: " << corpus.stats.runs_rejected << "\n";
    for (const auto& w : corpus.stats.warnings) {
        std::cout << "warning: " << w << "\n";
    }
    std::cout << "length histogram:";
    for (const auto& [len, count] : report.length_histogram) {
        std::cout << " " << len << ":" << count;
    }
    std::cout << "\nruns per study:";
    for (const auto& [study, count] : report.runs_per_study) {
        std::cout << " " << study << ":" << count;
    }
    std::cout << "\nduplicates: " << report.duplicates.size() << "\n";
    for (const auto& d : report.duplicates) {
        std::cout << "duplicate run key at iteration " << d.iteration << " (lines "
                  << d.first_line << ", " << d.second_line << "): study=" << d.key.study
                  << " learner=" << d.key.learner << " dataset=" << d.key.dataset
                  << " metric=" << d.key.metric << " resampling=" << d.key.resampling;
        if (d.key.seed) std::cout << " seed=" << *d.key.seed;
        if (d.key.fold) std::cout << " fold=" << *d.key.fold;
        std::cout << "\n";
    }
    return report.ok() ? kExitOk : kExitSchema;
}

int cmd_metrics(const std::string& input, const std::string& metric_table,
                const std::string& output, bool json, double epsilon,
                unsigned threads) {
    Corpus corpus = load_corpus(input, metric_table);
    ensure_output_dir(output);
    auto reports = compute_reports(corpus.runs, epsilon, threads);

    auto columns = key_columns();
    for (const char* c : {"T", "final_ot", "final_of", "final_tr", "final_rel_ot",
                          "rel_ot_defined", "denominator"}) {
        columns.emplace_back(c);
    }
    Table table(columns);
    for (std::size_t i = 0; i < corpus.runs.size(); ++i) {
        const auto& report = reports[i];
        std::vector<Table::Cell> row;
        append_key_cells(row, corpus.runs[i].key);
        row.emplace_back(static_cast<long long>(report.length()));
        row.emplace_back(report.ot.back());
        row.emplace_back(report.of.back());
        row.emplace_back(report.tr.back());
        row.emplace_back(opt_cell(report.rel_ot.back()));
        row.emplace_back(static_cast<long long>(report.rel_ot.back() ? 1 : 0));
        row.emplace_back(report.denominator.back());
        table.add_row(std::move(row));
    }
    table.write(output, "metrics", json);
    std::cout << "metrics: " << corpus.runs.size() << " runs\n";
    return kExitOk;
}

int cmd_ecdf(const std::string& input, const std::string& metric_table,
             const std::string& output, bool json, double epsilon,
             const std::string& group_by, const std::string& pair_factor,
             std::size_t at_iteration, unsigned threads) {
    Corpus corpus = load_corpus(input, metric_table);
    ensure_output_dir(output);
    auto reports = compute_reports(corpus.runs, epsilon, threads);
    const AtTime at = at_iteration ? AtTime::at(at_iteration) : AtTime::final();
    EcdfSummary summary = build_ecdf(reports, at, epsilon);

    Table ecdf({"value", "F"});
    for (std::size_t i = 0; i < summary.values.size(); ++i) {
        ecdf.add_row({summary.values[i],
                      static_cast<double>(i + 1) /
                          static_cast<double>(summary.values.size())});
    }
    ecdf.write(output, "ecdf", json);

    Table stats({"n_total_runs", "n_filtered", "n_values", "fraction_zero",
                 "fraction_severe"});
    stats.add_row({static_cast<long long>(summary.n_total_runs),
                   static_cast<long long>(summary.n_filtered),
                   static_cast<long long>(summary.values.size()),
                   summary.fraction_zero, summary.fraction_severe});
    stats.write(output, "ecdf_summary", json);

    if (!group_by.empty()) {
        const auto fields = split_list(group_by);
        auto groups = group_summaries(corpus.runs, reports, fields, epsilon);
        std::vector<std::string> columns = fields;
        for (const char* c : {"run_count", "n_filtered", "fraction_zero",
                              "fraction_severe", "mean_final_ot", "mean_final_of",
                              "mean_final_tr"}) {
            columns.emplace_back(c);
        }
        Table table(columns);
        for (const auto& g : groups) {
            std::vector<Table::Cell> row;
            for (const auto& v : g.group_values) row.emplace_back(v);
            row.emplace_back(static_cast<long long>(g.run_count));
            row.emplace_back(static_cast<long long>(g.ecdf.n_filtered));
            row.emplace_back(g.ecdf.fraction_zero);
            row.emplace_back(g.ecdf.fraction_severe);
            row.emplace_back(g.mean_final_ot);
            row.emplace_back(g.mean_final_of);
            row.emplace_back(g.mean_final_tr);
            table.add_row(std::move(row));
        }
        table.write(output, "groups", json);
    }

    if (!pair_factor.empty()) {
        // Split the corpus on the two observed values of the factor; the
        // lexicographically smaller value is side A.
        std::vector<std::string> levels;
        for (const auto& run : corpus.runs) {
            const std::string v = run_key_field(run.key, pair_factor);
            if (std::find(levels.begin(), levels.end(), v) == levels.end()) {
                levels.push_back(v);
            }
        }
        if (levels.size() != 2) {
            throw ParseError("pair factor '" + pair_factor + "' has " +
                             std::to_string(levels.size()) + " levels, need exactly 2");
        }
        std::sort(levels.begin(), levels.end());
        std::vector<Run> runs_a, runs_b;
        std::vector<OvertuningReport> reports_a, reports_b;
        for (std::size_t i = 0; i < corpus.runs.size(); ++i) {
            if (run_key_field(corpus.runs[i].key, pair_factor) == levels[0]) {
                runs_a.push_back(corpus.runs[i]);
                reports_a.push_back(reports[i]);
            } else {
                runs_b.push_back(corpus.runs[i]);
                reports_b.push_back(reports[i]);
            }
        }
        PairedSummary paired =
            paired_compare(runs_a, reports_a, runs_b, reports_b, pair_factor);
        std::vector<std::string> columns = key_columns();
        for (const char* c : {"factor", "delta_final_test", "delta_final_ot",
                              "delta_final_of"}) {
            columns.emplace_back(c);
        }
        Table table(columns);
        for (const auto& d : paired.deltas) {
            std::vector<Table::Cell> row;
            append_key_cells(row, d.pairing_key);
            row.emplace_back(pair_factor);
            row.emplace_back(d.delta_final_test);
            row.emplace_back(d.delta_final_ot);
            row.emplace_back(d.delta_final_of);
            table.add_row(std::move(row));
        }
        table.write(output, "pairs", json);
        std::cout << "pairs: " << paired.n_matched << " matched, "
                  << paired.n_unmatched << " unmatched, mean delta test "
                  << fmt_double(paired.mean_delta_test) << "\n";
    }

    std::cout << "ecdf: " << summary.values.size() << " values, "
              << summary.n_filtered << " filtered\n";
    return kExitOk;
}

int cmd_sweep(const std::string& input, const std::string& metric_table,
              const std::string& output, bool json, double epsilon,
              const std::string& grid_text, unsigned threads) {
    Corpus corpus = load_corpus(input, metric_table);
    ensure_output_dir(output);
    auto reports = compute_reports(corpus.runs, epsilon, threads);
    std::vector<std::size_t> grid;
    for (const auto& part : split_list(grid_text)) {
        auto v = parse_int(part);
        if (!v || *v < 1) throw std::invalid_argument("bad grid point: " + part);
        grid.push_back(static_cast<std::size_t>(*v));
    }
    auto points = budget_sweep(reports, grid);
    Table table({"iteration", "mean_ot", "mean_of", "mean_tr", "mean_rel_ot", "n",
                 "n_excluded"});
    for (const auto& p : points) {
        table.add_row({static_cast<long long>(p.iteration), p.mean_ot, p.mean_of,
                       p.mean_tr, opt_cell(p.mean_rel_ot),
                       static_cast<long long>(p.n),
                       static_cast<long long>(p.n_excluded)});
    }
    table.write(output, "sweep", json);
    std::cout << "sweep: " << points.size() << " grid points\n";
    return kExitOk;
}

int cmd_curves(const std::string& input, const std::string& metric_table,
               const std::string& output, bool json, std::size_t replicates,
               double fraction, std::uint64_t seed, std::size_t run_index,
               bool repermute) {
    Corpus corpus = load_corpus(input, metric_table);
    ensure_output_dir(output);
    if (run_index >= corpus.runs.size()) {
        throw std::invalid_argument("run index out of range");
    }
    ReplicateCurves curves = replicate_curves(corpus.runs[run_index].traj, fraction,
                                              replicates, seed, repermute);
    Table table({"iteration", "mean_val", "se_val", "mean_test", "se_test"});
    for (std::size_t i = 0; i < curves.length(); ++i) {
        table.add_row({static_cast<long long>(i + 1), curves.mean_val[i],
                       curves.se_val[i], curves.mean_test[i], curves.se_test[i]});
    }
    table.write(output, "curves", json);
    std::cout << "curves: " << curves.length() << " iterations, " << replicates
              << " replicates\n";
    return kExitOk;
}

int cmd_simulate(const std::string& output, const std::string& surface,
                 std::size_t n_configs, std::size_t trajectory_len,
                 const std::string& sigma_shared_list,
                 const std::string& sigma_indep_list, const std::string& k_folds_list,
                 bool reshuffled, std::uint64_t seed, std::size_t n_seeds) {
    ensure_output_dir(output);
    std::vector<SyntheticSpec> cells;
    for (const auto& ss : split_list(sigma_shared_list)) {
        for (const auto& si : split_list(sigma_indep_list)) {
            for (const auto& kf : split_list(k_folds_list)) {
                SyntheticSpec spec;
                spec.surface = SurfaceSpec::parse(surface);
                spec.n_configs = n_configs;
                spec.trajectory_len = trajectory_len;
                auto vss = parse_double(ss);
                auto vsi = parse_double(si);
                auto vkf = parse_int(kf);
                if (!vss || !vsi || !vkf || *vkf < 1) {
                    throw std::invalid_argument("bad synthetic parameter list");
                }
                spec.sigma_shared = *vss;
                spec.sigma_indep = *vsi;
                spec.k_folds = static_cast<std::size_t>(*vkf);
                spec.reshuffled = reshuffled;
                cells.push_back(spec);
            }
        }
    }
    std::vector<std::uint64_t> seeds;
    for (std::size_t s = 0; s < n_seeds; ++s) seeds.push_back(seed + s);
    auto runs = sweep_grid(cells, seeds);

    Corpus corpus;
    corpus.runs = std::move(runs);
    MetricTable table{{"error", Orientation::Minimize, ""}};
    serialize_corpus_csv(corpus, table, output + "/corpus.csv");
    std::ofstream mt(output + "/metric_table.csv", std::ios::binary);
    if (!mt) throw IoError("cannot write metric table");
    mt << "error,minimize\n";
    std::cout << "simulate: " << corpus.runs.size() << " runs (" << cells.size()
              << " cells x " << seeds.size() << " seeds)\n";
    return kExitOk;
}

int cmd_select(const std::string& input, const std::string& metric_table,
               const std::string& output, bool json, const std::string& rules_text,
               unsigned threads) {
    Corpus corpus = load_corpus(input, metric_table);
    ensure_output_dir(output);
    std::vector<SelectionRule> rules;
    for (const auto& part : split_list(rules_text)) {
        rules.push_back(SelectionRule::parse(part));
    }
    if (rules.empty()) throw std::invalid_argument("no rules given");
    RuleSweepResult result = rule_sweep(corpus.runs, rules, threads);

    Table summary({"rule", "mean_delta_test", "mean_final_ot", "win_fraction", "n",
                   "n_excluded"});
    for (const auto& s : result.summaries) {
        summary.add_row({s.rule.name(), s.mean_delta_test, s.mean_final_ot,
                         s.win_fraction, static_cast<long long>(s.n),
                         static_cast<long long>(s.n_excluded)});
    }
    summary.write(output, "rules", json);

    auto columns = key_columns();
    for (const char* c : {"rule", "delta_ot", "delta_test"}) columns.emplace_back(c);
    Table scatter(columns);
    for (const auto& p : result.scatter) {
        std::vector<Table::Cell> row;
        append_key_cells(row, corpus.runs[p.run_index].key);
        row.emplace_back(p.rule);
        row.emplace_back(p.delta_ot);
        row.emplace_back(p.delta_test);
        scatter.add_row(std::move(row));
    }
    scatter.write(output, "rule_scatter", json);

    std::cout << "select: quadrants (delta_ot<=0/delta_test<=0) " << result.quadrants[0]
              << " (<=0/>0) " << result.quadrants[1] << " (>0/<=0) "
              << result.quadrants[2] << " (>0/>0) " << result.quadrants[3] << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"overtune: quantify overtuning in HPO trajectories"};
    app.require_subcommand(1);

    std::string input, metric_table, output = "out";
    std::string format = "csv";
    double epsilon = kDefaultEpsilon;
    std::uint64_t seed = 42;
    unsigned threads = 1;

    std::string group_by, pair_factor, budget_grid, rules = "naive";
    std::size_t at_iteration = 0, replicates = 100, run_index = 0;
    double subsample_frac = 0.5;
    bool repermute = false;

    std::string surface = "iid_uniform:0:1";
    std::size_t n_configs = 1000, trajectory_len = 500, n_seeds = 1;
    std::string sigma_shared = "0", sigma_indep = "0.1", k_folds = "1";
    bool reshuffled = false;

    auto add_common = [&](CLI::App* cmd, bool needs_input) {
        if (needs_input) {
            cmd->add_option("--input", input, "input corpus (.csv or .jsonl)")->required();
            cmd->add_option("--metric-table", metric_table,
                            "metric orientation table")->required();
        }
        cmd->add_option("--output", output, "output directory");
        cmd->add_option("--format", format, "output format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--epsilon", epsilon, "relative-overtuning denominator threshold");
        cmd->add_option("--seed", seed, "root seed for stochastic subcommands");
        cmd->add_option("--threads", threads, "worker thread bound");
    };

    auto* validate = app.add_subcommand("validate", "check a corpus file");
    add_common(validate, true);

    auto* metrics = app.add_subcommand("metrics", "per-run final overtuning metrics");
    add_common(metrics, true);

    auto* ecdf = app.add_subcommand("ecdf", "pooled relative-overtuning ECDF");
    add_common(ecdf, true);
    ecdf->add_option("--group-by", group_by, "comma-separated run key fields");
    ecdf->add_option("--pair-factor", pair_factor,
                     "run key field toggled between paired corpora");
    ecdf->add_option("--at", at_iteration, "iteration to pool at (default: final)");

    auto* sweep = app.add_subcommand("sweep", "anytime budget sweep");
    add_common(sweep, true);
    sweep->add_option("--budget-grid", budget_grid, "comma-separated iterations")
        ->required();

    auto* curves = app.add_subcommand("curves", "subsampled replicate curves");
    add_common(curves, true);
    curves->add_option("--replicates", replicates, "number of replicates");
    curves->add_option("--subsample-frac", subsample_frac, "subsample fraction in (0,1]");
    curves->add_option("--run-index", run_index, "which run of the corpus to replicate");
    curves->add_flag("--repermute", repermute, "keep subsamples in draw order");

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic corpus");
    add_common(simulate, false);
    simulate->add_option("--surface", surface,
                         "test surface: iid_uniform:lo:hi | iid_normal:mu:sd | "
                         "quadratic_1d:depth:floor");
    simulate->add_option("--n-configs", n_configs, "grid size N");
    simulate->add_option("--trajectory-len", trajectory_len, "trajectory length T");
    simulate->add_option("--sigma-shared", sigma_shared, "shared bias std (comma list)");
    simulate->add_option("--sigma-indep", sigma_indep,
                         "independent noise std (comma list)");
    simulate->add_option("--k-folds", k_folds, "fold counts (comma list)");
    simulate->add_flag("--reshuffled", reshuffled, "redraw the bias per configuration");
    simulate->add_option("--n-seeds", n_seeds, "seeded runs per cell");

    auto* select = app.add_subcommand("select", "counterfactual selection rules");
    add_common(select, true);
    select->add_option("--rules", rules, "comma list: naive | stop@<t> | pct@<k>");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitArgs;
    }

    const bool json = format == "json";
    try {
        if (validate->parsed()) return cmd_validate(input, metric_table);
        if (metrics->parsed())
            return cmd_metrics(input, metric_table, output, json, epsilon, threads);
        if (ecdf->parsed())
            return cmd_ecdf(input, metric_table, output, json, epsilon, group_by,
                            pair_factor, at_iteration, threads);
        if (sweep->parsed())
            return cmd_sweep(input, metric_table, output, json, epsilon, budget_grid,
                             threads);
        if (curves->parsed())
            return cmd_curves(input, metric_table, output, json, replicates,
                              subsample_frac, seed, run_index, repermute);
        if (simulate->parsed())
            return cmd_simulate(output, surface, n_configs, trajectory_len,
                                sigma_shared, sigma_indep, k_folds, reshuffled, seed,
                                n_seeds);
        if (select->parsed())
            return cmd_select(input, metric_table, output, json, rules, threads);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArgs;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitArgs;
}
