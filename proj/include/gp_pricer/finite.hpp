#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gp_pricer/acquisition.hpp"
#include "gp_pricer/demand.hpp"
#include "gp_pricer/gp.hpp"
#include "gp_pricer/timing.hpp"

namespace gp_pricer {

struct FiniteRunConfig {
    int seasons = 50;
    int horizon = 20;
    int inventory = 10;
    double price_low = 1.0;
    double price_high = 20.0;
    std::size_t grid_size = 100;
    double kappa = 2.0;
    double decay = 0.05;
    int hyper_refit_every = 1;   // seasons between hyperparameter searches
    int restarts = 5;
    bool refresh_within_season = false;  // heuristic only: refit the posterior after every step
    bool record_policies = true;
    std::optional<double> initial_price;  // seed observation price; defaults to the midpoint
    std::optional<double> noise_floor;    // defaults to default_noise_floor(data)
    std::uint64_t seed = 1;

    void validate() const;
    PriceGrid grid() const { return PriceGrid(price_low, price_high, grid_size); }
    double first_price() const { return initial_price.value_or(0.5 * (price_low + price_high)); }
};

/// Distribution of q ∈ {0..s} from N(μ, σ²) sliced at half-integers. Mass below
/// ½ goes to q = 0 and mass at or above s − ½ goes to q = s.
std::vector<double> gaussian_sale_distribution(double mu, double sigma, int inventory);

/// Sale probabilities P(q | s, p) for every price and every s ∈ [0, C].
class TransitionModel {
public:
    /// Every row starts as a point mass at q = 0.
    TransitionModel(std::vector<double> prices, int max_inventory);

    /// Replaces row (price i, inventory s). The row must have s + 1 nonnegative
    /// entries summing to 1 within 1e-10.
    void set_row(std::size_t price_index, int inventory, std::vector<double> probs);

    std::span<const double> row(std::size_t price_index, int inventory) const;
    std::span<const double> prices() const noexcept { return prices_; }
    int max_inventory() const noexcept { return max_inventory_; }

private:
    std::size_t offset(std::size_t price_index, int inventory) const;

    std::vector<double> prices_;
    int max_inventory_;
    std::vector<double> probs_;  // per price: rows s = 0..C back to back
};

/// Slices N(mean, variance) at each price. Throws DegenerateVariance when a
/// standard deviation falls below `noise_floor`.
TransitionModel build_transition_model(std::span<const double> prices, std::span<const Prediction> demand,
                                       int max_inventory, double noise_floor);

/// Slices the latent demand posterior at each price with its standard
/// deviation raised to at least `noise_floor`.
TransitionModel build_transition_model(const GpPosterior& gp, std::span<const double> prices, int max_inventory,
                                       double noise_floor);

/// V(s, t) for s ∈ [0, C], t ∈ [1, T + 1].
class ValueMatrix {
public:
    ValueMatrix(int max_inventory, int horizon);

    double& operator()(int s, int t) { return v_[index(s, t)]; }
    double operator()(int s, int t) const { return v_[index(s, t)]; }
    int max_inventory() const noexcept { return c_; }
    int horizon() const noexcept { return t_; }

    /// V(·, T+1) = 0, V(0, ·) = 0, V ≥ 0, nondecreasing in s, nonincreasing in t.
    /// `tol` absorbs rounding in the comparisons.
    bool is_monotone(double tol = 1e-9) const;

private:
    std::size_t index(int s, int t) const;

    int c_;
    int t_;
    std::vector<double> v_;
};

/// ψ(s, t): the price posted with s units left at step t, s ∈ [0, C], t ∈ [1, T].
class PolicyMatrix {
public:
    PolicyMatrix(int max_inventory, int horizon, double fill = 0.0);

    double& operator()(int s, int t) { return p_[index(s, t)]; }
    double operator()(int s, int t) const { return p_[index(s, t)]; }
    int max_inventory() const noexcept { return c_; }
    int horizon() const noexcept { return t_; }

private:
    std::size_t index(int s, int t) const;

    int c_;
    int t_;
    std::vector<double> p_;
};

struct DynamicProgram {
    ValueMatrix value;
    PolicyMatrix policy;
};

/// Backward induction over t = T..1 with V(·, T+1) = 0; the lowest price wins ties.
DynamicProgram value_iteration(const TransitionModel& tm, int horizon);

struct SeasonStep {
    int season = 0;
    int t = 0;
    int inventory = 0;   // units on hand before the sale
    double price = 0.0;  // NaN once the season has sold out
    double latent_demand = 0.0;
    int sale = 0;
    double revenue = 0.0;
};

struct SeasonTrace {
    int season = 0;
    std::vector<SeasonStep> steps;  // always `horizon` rows
    double revenue = 0.0;
    std::optional<int> depletion_time;  // step at which inventory reached 0
    PhaseTimes times;
};

struct FiniteRunResult {
    std::vector<SeasonTrace> seasons;
    std::vector<PolicyMatrix> policies;  // one per season when record_policies is set
    std::vector<ValueMatrix> values;     // model-based only
    std::vector<KernelHyperparams> hyperparams;  // one per season
};

/// GP on capped demand min(d, s), CDF-slice transition model and value
/// iteration, re-planned at the start of every season.
FiniteRunResult run_gp_fin_model_based(const DemandEnvironment& env, const FiniteRunConfig& cfg);

/// One-step acquisition with a posterior frozen at the start of each season.
/// The recorded policy matrix holds the heuristic's choice at every (s, t),
/// with ψ(0, t) set to the lowest grid price.
FiniteRunResult run_bo_fin_heuristic(const DemandEnvironment& env, const FiniteRunConfig& cfg);

}  // namespace gp_pricer
