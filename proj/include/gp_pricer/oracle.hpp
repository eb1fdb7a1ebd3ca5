#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "gp_pricer/demand.hpp"
#include "gp_pricer/finite.hpp"
#include "gp_pricer/infinite.hpp"

namespace gp_pricer {

struct OracleSolution {
    ValueMatrix value;
    PolicyMatrix policy;
    double optimal_value = 0.0;  // V*(C, 1)
};

/// Transition model built from the environment's exact sale kernel.
TransitionModel true_transition_model(const DemandEnvironment& env, std::span<const double> prices, int max_inventory);

/// Backward induction under the true kernel. Throws Unsupported for
/// continuous-demand environments.
OracleSolution solve_oracle(const DemandEnvironment& env, int max_inventory, int horizon, std::span<const double> prices);

/// After n seasons: n·V*(C,1) − Σ season revenue. Throws ShapeMismatch when a
/// season's length or starting inventory differs from the oracle's.
std::vector<double> cumulative_regret(std::span<const SeasonTrace> seasons, const OracleSolution& oracle);

/// Frobenius distance over the (s, t) cells whose s is not excluded.
double policy_error_norm(const PolicyMatrix& psi, const PolicyMatrix& psi_star, const std::set<int>& exclude_inventory = {});

/// R̄(p*) − max_{t' ≤ t} R̄(p_t') with R̄ the environment's expected revenue and
/// R̄(p*) the trace's reference optimum.
std::vector<double> best_till_now_regret(const InfiniteTrace& trace, const DemandEnvironment& env);

/// (R̄(p*) − R̄(p_t)) / R̄(p*). Throws DegenerateOptimum when R̄(p*) ≤ 0.
std::vector<double> relative_regret(const InfiniteTrace& trace, const DemandEnvironment& env);

/// Expected revenue of one season under ψ from full inventory, by exact forward
/// recursion over the true kernel.
double policy_expected_revenue(const DemandEnvironment& env, const PolicyMatrix& psi);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// The same quantity estimated from `replications` simulated seasons.
MonteCarloEstimate policy_revenue_monte_carlo(const DemandEnvironment& env, const PolicyMatrix& psi,
                                              int replications = 100, std::uint64_t seed = 1);

struct Aggregate {
    double mean = 0.0;
    double variance = 0.0;  // sample variance (n − 1); 0 for a single value
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

Aggregate aggregate(std::span<const double> values);

/// Index-wise aggregate of equally long series.
std::vector<Aggregate> aggregate_series(std::span<const std::vector<double>> series);

}  // namespace gp_pricer
