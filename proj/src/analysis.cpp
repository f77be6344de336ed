#include "overtune/analysis.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "overtune/parallel.hpp"

namespace overtune {

namespace {

// rel_ot at the chosen time point, recomputed against the requested epsilon.
std::optional<double> rel_ot_at(const OvertuningReport& report, AtTime at,
                                double epsilon) {
    const std::size_t t =
        at.iteration ? *at.iteration - 1 : report.length() - 1;
    if (t >= report.length()) {
        throw std::invalid_argument("requested iteration exceeds trajectory length");
    }
    if (report.denominator[t] > epsilon) {
        return report.ot[t] / report.denominator[t];
    }
    return std::nullopt;
}

}  // namespace

double EcdfSummary::fraction_below(double x) const {
    if (values.empty()) return 0.0;
    const auto it = std::upper_bound(values.begin(), values.end(), x);
    return static_cast<double>(it - values.begin()) /
           static_cast<double>(values.size());
}

EcdfSummary build_ecdf(const std::vector<OvertuningReport>& reports, AtTime at,
                       double epsilon) {
    if (reports.empty()) {
        throw std::invalid_argument("empty report collection");
    }
    EcdfSummary summary;
    summary.n_total_runs = reports.size();
    for (const auto& report : reports) {
        auto v = rel_ot_at(report, at, epsilon);
        if (v) {
            summary.values.push_back(*v);
        } else {
            summary.n_filtered += 1;
        }
    }
    std::sort(summary.values.begin(), summary.values.end());
    if (!summary.values.empty()) {
        const double n = static_cast<double>(summary.values.size());
        std::size_t zero = 0, severe = 0;
        for (double v : summary.values) {
            if (v == 0.0) ++zero;      // ot is an exact difference, ties are exact
            if (v > 1.0) ++severe;
        }
        summary.fraction_zero = static_cast<double>(zero) / n;
        summary.fraction_severe = static_cast<double>(severe) / n;
    }
    return summary;
}

Severity severity_class(double rel_ot) {
    if (rel_ot < 0.0) {
        throw std::invalid_argument("negative relative overtuning");
    }
    if (rel_ot == 0.0) return Severity::None;
    if (rel_ot > 1.0) return Severity::Severe;
    return Severity::Mild;
}

std::string severity_name(Severity s) {
    switch (s) {
        case Severity::None: return "none";
        case Severity::Mild: return "mild";
        case Severity::Severe: return "severe";
    }
    return "unknown";
}

std::vector<GroupSummary> group_summaries(const std::vector<Run>& runs,
                                          const std::vector<OvertuningReport>& reports,
                                          const std::vector<std::string>& group_by,
                                          double epsilon) {
    if (runs.size() != reports.size()) {
        throw std::invalid_argument("runs/reports size mismatch");
    }
    std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::vector<std::string> key;
        key.reserve(group_by.size());
        for (const auto& field : group_by) {
            key.push_back(run_key_field(runs[i].key, field));
        }
        groups[key].push_back(i);
    }
    std::vector<GroupSummary> out;
    out.reserve(groups.size());
    for (const auto& [key, indices] : groups) {
        GroupSummary g;
        g.group_fields = group_by;
        g.group_values = key;
        g.run_count = indices.size();
        std::vector<OvertuningReport> member_reports;
        member_reports.reserve(indices.size());
        double sum_ot = 0.0, sum_of = 0.0, sum_tr = 0.0;
        for (std::size_t i : indices) {
            member_reports.push_back(reports[i]);
            sum_ot += reports[i].ot.back();
            sum_of += reports[i].of.back();
            sum_tr += reports[i].tr.back();
        }
        const double n = static_cast<double>(indices.size());
        g.mean_final_ot = sum_ot / n;
        g.mean_final_of = sum_of / n;
        g.mean_final_tr = sum_tr / n;
        g.ecdf = build_ecdf(member_reports, AtTime::final(), epsilon);
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<SweepPoint> budget_sweep(const std::vector<OvertuningReport>& reports,
                                     const std::vector<std::size_t>& grid) {
    if (grid.empty()) {
        throw std::invalid_argument("empty budget grid");
    }
    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    for (std::size_t iteration : grid) {
        if (iteration < 1) {
            throw std::invalid_argument("grid iterations must be >= 1");
        }
        SweepPoint point;
        point.iteration = iteration;
        double sum_ot = 0.0, sum_of = 0.0, sum_tr = 0.0, sum_rel = 0.0;
        std::size_t n_rel = 0;
        for (const auto& report : reports) {
            if (report.length() < iteration) {
                point.n_excluded += 1;
                continue;
            }
            const std::size_t t = iteration - 1;
            sum_ot += report.ot[t];
            sum_of += report.of[t];
            sum_tr += report.tr[t];
            if (report.rel_ot[t]) {
                sum_rel += *report.rel_ot[t];
                n_rel += 1;
            }
            point.n += 1;
        }
        if (point.n > 0) {
            const double n = static_cast<double>(point.n);
            point.mean_ot = sum_ot / n;
            point.mean_of = sum_of / n;
            point.mean_tr = sum_tr / n;
        }
        if (n_rel > 0) {
            point.mean_rel_ot = sum_rel / static_cast<double>(n_rel);
        }
        out.push_back(point);
    }
    return out;
}

PairedSummary paired_compare(const std::vector<Run>& runs_a,
                             const std::vector<OvertuningReport>& reports_a,
                             const std::vector<Run>& runs_b,
                             const std::vector<OvertuningReport>& reports_b,
                             const std::string& factor) {
    if (runs_a.size() != reports_a.size() || runs_b.size() != reports_b.size()) {
        throw std::invalid_argument("runs/reports size mismatch");
    }
    auto pairing_key = [&](const RunKey& key) {
        RunKey k = key;
        if (factor == "study") k.study.clear();
        else if (factor == "learner") k.learner.clear();
        else if (factor == "dataset") k.dataset.clear();
        else if (factor == "metric") k.metric.clear();
        else if (factor == "resampling") k.resampling.clear();
        else if (factor == "dataset_size") k.dataset_size.reset();
        else if (factor == "seed") k.seed.reset();
        else if (factor == "fold") k.fold.reset();
        else throw std::invalid_argument("unknown pairing factor: " + factor);
        return k;
    };

    std::map<RunKey, std::size_t> b_index;
    for (std::size_t i = 0; i < runs_b.size(); ++i) {
        b_index[pairing_key(runs_b[i].key)] = i;
    }

    PairedSummary summary;
    summary.factor = factor;
    double sum_test = 0.0, sum_ot = 0.0, sum_of = 0.0;
    std::size_t positive = 0;
    for (std::size_t i = 0; i < runs_a.size(); ++i) {
        const RunKey key = pairing_key(runs_a[i].key);
        auto it = b_index.find(key);
        if (it == b_index.end()) {
            summary.n_unmatched += 1;
            continue;
        }
        const auto& ra = reports_a[i];
        const auto& rb = reports_b[it->second];
        const IncumbentTrace ta = incumbent_trace(runs_a[i].traj);
        const IncumbentTrace tb = incumbent_trace(runs_b[it->second].traj);
        PairedDelta delta;
        delta.pairing_key = key;
        delta.delta_final_test = tb.incumbent_test.back() - ta.incumbent_test.back();
        delta.delta_final_ot = rb.ot.back() - ra.ot.back();
        delta.delta_final_of = rb.of.back() - ra.of.back();
        sum_test += delta.delta_final_test;
        sum_ot += delta.delta_final_ot;
        sum_of += delta.delta_final_of;
        if (delta.delta_final_test > 0.0) ++positive;
        summary.deltas.push_back(std::move(delta));
    }
    summary.n_matched = summary.deltas.size();
    if (summary.n_matched == 0) {
        throw std::invalid_argument("no matched pairs");
    }
    const double n = static_cast<double>(summary.n_matched);
    summary.mean_delta_test = sum_test / n;
    summary.mean_delta_ot = sum_ot / n;
    summary.mean_delta_of = sum_of / n;
    summary.fraction_test_positive = static_cast<double>(positive) / n;
    return summary;
}

std::vector<OvertuningReport> compute_reports(const std::vector<Run>& runs,
                                              double epsilon, unsigned threads) {
    std::vector<OvertuningReport> reports(runs.size());
    parallel_for(runs.size(), threads, [&](std::size_t i) {
        reports[i] = compute_report(runs[i].traj, epsilon);
    });
    return reports;
}

}  // namespace overtune
