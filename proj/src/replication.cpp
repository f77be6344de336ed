#include "overtune/replication.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "overtune/rng.hpp"

namespace overtune {

ReplicateCurves replicate_curves(const ScoreTrajectory& traj, double f,
                                 std::size_t n_replicates, std::uint64_t seed,
                                 bool repermute) {
    check_trajectory(traj);
    if (f <= 0.0 || f > 1.0) {
        throw std::invalid_argument("subsample fraction must be in (0, 1]");
    }
    if (n_replicates < 1) {
        throw std::invalid_argument("need at least one replicate");
    }
    const std::size_t total = traj.length();
    const std::size_t m = static_cast<std::size_t>(
        std::floor(f * static_cast<double>(total)));
    if (m < 1) {
        throw std::invalid_argument("empty subsample");
    }

    // Welford per iteration; replicates processed in index order so the
    // result is independent of any caller-side parallelism.
    std::vector<double> mean_v(m, 0.0), m2_v(m, 0.0);
    std::vector<double> mean_t(m, 0.0), m2_t(m, 0.0);

    ScoreTrajectory sub;
    sub.val.resize(m);
    sub.test.resize(m);
    for (std::size_t r = 0; r < n_replicates; ++r) {
        Rng rng = Rng::substream(seed, r);
        auto indices = rng.sample_without_replacement(total, m);
        if (!repermute) {
            std::sort(indices.begin(), indices.end());
        }
        for (std::size_t i = 0; i < m; ++i) {
            sub.val[i] = traj.val[indices[i]];
            sub.test[i] = traj.test[indices[i]];
        }
        const IncumbentTrace trace = incumbent_trace(sub);
        const double count = static_cast<double>(r + 1);
        for (std::size_t i = 0; i < m; ++i) {
            double d = trace.incumbent_val[i] - mean_v[i];
            mean_v[i] += d / count;
            m2_v[i] += d * (trace.incumbent_val[i] - mean_v[i]);
            d = trace.incumbent_test[i] - mean_t[i];
            mean_t[i] += d / count;
            m2_t[i] += d * (trace.incumbent_test[i] - mean_t[i]);
        }
    }

    ReplicateCurves curves;
    curves.n_replicates = n_replicates;
    curves.subsample_fraction = f;
    curves.mean_val = std::move(mean_v);
    curves.mean_test = std::move(mean_t);
    curves.se_val.resize(m, 0.0);
    curves.se_test.resize(m, 0.0);
    if (n_replicates > 1) {
        const double r = static_cast<double>(n_replicates);
        for (std::size_t i = 0; i < m; ++i) {
            curves.se_val[i] = std::sqrt(m2_v[i] / (r - 1.0)) / std::sqrt(r);
            curves.se_test[i] = std::sqrt(m2_t[i] / (r - 1.0)) / std::sqrt(r);
        }
    }
    return curves;
}

}  // namespace overtune
