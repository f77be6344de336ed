#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "overtune/ingest.hpp"
#include "overtune/metrics.hpp"

namespace overtune {

// Ground-truth test error surface over a finite configuration grid.
struct SurfaceSpec {
    enum class Kind { IidUniform, IidNormal, Quadratic1d };
    Kind kind = Kind::IidUniform;
    // IidUniform: a=lo, b=hi. IidNormal: a=mu, b=sd.
    // Quadratic1d: a=depth, b=floor; test_i = floor + depth*(x_i - 0.5)^2
    // on the grid x_i = i/(N-1).
    double a = 0.0;
    double b = 1.0;

    std::string name() const;
    static SurfaceSpec parse(const std::string& text);
};

// Split-noise model: val_i = test_i + bias + e_i. The bias is one draw
// per run under fixed splits and one draw per configuration when
// reshuffled; e_i ~ Normal(0, sigma_indep^2 / k_folds), modeling the
// variance reduction of averaging k fold estimates. The shared component
// does not average out.
struct SyntheticSpec {
    std::size_t n_configs = 100;
    SurfaceSpec surface;
    double sigma_shared = 0.0;
    double sigma_indep = 0.0;
    std::size_t k_folds = 1;
    bool reshuffled = false;
    std::size_t trajectory_len = 100;
    std::uint64_t seed = 42;
};

struct GeneratedRun {
    ScoreTrajectory traj;
    double oracle_min_test = 0.0;         // exact minimum over the grid
    std::vector<double> true_test;        // all N ground-truth values
    std::vector<std::size_t> config_indices;  // trajectory -> grid position
};

// Surface, bias, noise and trajectory selection use separate substreams
// of the run seed, so cells that differ only in k_folds or sigma share
// the same surface, trajectory and standardized noise draws.
GeneratedRun generate_run(const SyntheticSpec& spec);

// One run per (cell, seed); RunKey fields encode the cell parameters so
// the analysis module can group and pair them like real studies.
std::vector<Run> sweep_grid(const std::vector<SyntheticSpec>& cells,
                            const std::vector<std::uint64_t>& seeds);

RunKey synthetic_run_key(const SyntheticSpec& spec);

}  // namespace overtune
