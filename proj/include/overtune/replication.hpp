#pragma once

#include <cstdint>
#include <vector>

#include "overtune/metrics.hpp"

namespace overtune {

// Aggregated incumbent curves over subsampled trajectory replicates:
// per iteration, mean and standard error of incumbent validation and
// test error across replicates.
struct ReplicateCurves {
    std::vector<double> mean_val;  // non-increasing
    std::vector<double> se_val;
    std::vector<double> mean_test;
    std::vector<double> se_test;
    std::size_t n_replicates = 0;
    double subsample_fraction = 0.0;

    std::size_t length() const { return mean_val.size(); }
};

// Draws R subsamples of floor(f*T) configurations without replacement,
// rebuilds the incumbent series per replicate, and aggregates by
// iteration index. Standard error is sample std (denominator R-1) over
// sqrt(R); zero when R = 1. Replicate r uses the substream (seed, r).
// Subsamples keep the original evaluation order unless repermute is set,
// which keeps them in draw order instead.
ReplicateCurves replicate_curves(const ScoreTrajectory& traj, double f,
                                 std::size_t n_replicates, std::uint64_t seed,
                                 bool repermute = false);

}  // namespace overtune
