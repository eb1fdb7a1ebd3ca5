#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gp_pricer/config.hpp"

namespace gp_pricer {

/// Calls fn(0..n−1) on up to `workers` threads (0: hardware concurrency).
/// fn must not throw.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct BenchRow {
    int inventory = 0;
    int horizon = 0;
    double heuristic_s = 0.0;    // mean wall-clock seconds per season
    double model_based_s = 0.0;
    double pct_increase = 0.0;   // (model − heuristic)/heuristic·100
};

/// Per-season runtime of both finite-inventory algorithms for every (C, T)
/// setting. One untimed warm-up phase searches hyperparameters; they are then
/// held fixed so the timed seasons measure fitting, planning and acting only.
std::vector<BenchRow> run_bench(const ExperimentConfig& cfg);

/// Runs the configured mode and writes trace.csv, summary.csv / seasons.csv
/// where applicable, and manifest.json into cfg.output. Returns 0 on success
/// and 1 when any replication failed (outputs for completed work are still
/// written).
int run_experiment(const ExperimentConfig& cfg);

}  // namespace gp_pricer
