#pragma once

#include <optional>
#include <string>
#include <vector>

#include "overtune/ingest.hpp"
#include "overtune/metrics.hpp"

namespace overtune {

// Pooled relative-overtuning distribution at one time point. Runs whose
// test improvement over the first incumbent is <= epsilon are filtered,
// not imputed.
struct EcdfSummary {
    std::vector<double> values;   // sorted, defined rel_ot only
    std::size_t n_total_runs = 0;
    std::size_t n_filtered = 0;
    double fraction_zero = 0.0;
    double fraction_severe = 0.0;  // rel_ot strictly greater than 1.0

    // F(x) = P(value <= x); right-continuous, 0 on an empty summary.
    double fraction_below(double x) const;
};

// Time point for pooling: the final iteration of each run, or a fixed t.
struct AtTime {
    std::optional<std::size_t> iteration;  // nullopt = final
    static AtTime final() { return {}; }
    static AtTime at(std::size_t t) { return {t}; }
};

EcdfSummary build_ecdf(const std::vector<OvertuningReport>& reports, AtTime at,
                       double epsilon);

enum class Severity { None, Mild, Severe };

// none at exactly 0; severe strictly above 1.0; mild in between.
Severity severity_class(double rel_ot);

std::string severity_name(Severity s);

struct GroupSummary {
    std::vector<std::string> group_fields;
    std::vector<std::string> group_values;
    EcdfSummary ecdf;
    double mean_final_ot = 0.0;
    double mean_final_of = 0.0;
    double mean_final_tr = 0.0;
    std::size_t run_count = 0;
};

// Deterministic partition of the run set by the named RunKey fields,
// ordered lexicographically by group key.
std::vector<GroupSummary> group_summaries(const std::vector<Run>& runs,
                                          const std::vector<OvertuningReport>& reports,
                                          const std::vector<std::string>& group_by,
                                          double epsilon);

struct SweepPoint {
    std::size_t iteration = 0;
    double mean_ot = 0.0;
    double mean_of = 0.0;
    double mean_tr = 0.0;
    std::optional<double> mean_rel_ot;  // over defined values only
    std::size_t n = 0;                  // runs long enough for this point
    std::size_t n_excluded = 0;
};

// Anytime view: pooled metric means on a fixed iteration grid. Runs
// shorter than a grid point are excluded there and counted.
std::vector<SweepPoint> budget_sweep(const std::vector<OvertuningReport>& reports,
                                     const std::vector<std::size_t>& grid);

struct PairedDelta {
    RunKey pairing_key;  // the toggled factor field cleared
    double delta_final_test = 0.0;
    double delta_final_ot = 0.0;
    double delta_final_of = 0.0;
};

struct PairedSummary {
    std::string factor;
    std::vector<PairedDelta> deltas;
    double mean_delta_test = 0.0;
    double mean_delta_ot = 0.0;
    double mean_delta_of = 0.0;
    double fraction_test_positive = 0.0;
    std::size_t n_matched = 0;
    std::size_t n_unmatched = 0;
};

// Matches runs of corpus A to runs of corpus B on every key field except
// `factor`; deltas are B minus A on final incumbent test, ot and of.
// Throws if no pair matches.
PairedSummary paired_compare(const std::vector<Run>& runs_a,
                             const std::vector<OvertuningReport>& reports_a,
                             const std::vector<Run>& runs_b,
                             const std::vector<OvertuningReport>& reports_b,
                             const std::string& factor);

// Per-run reports for a corpus; ordering follows the run vector. The
// oracle column stays empty, recorded corpora have no ground truth.
std::vector<OvertuningReport> compute_reports(const std::vector<Run>& runs,
                                              double epsilon,
                                              unsigned threads = 1);

}  // namespace overtune
