#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "gp_pricer/acquisition.hpp"
#include "gp_pricer/demand.hpp"
#include "gp_pricer/gp.hpp"
#include "gp_pricer/timing.hpp"

namespace gp_pricer {

struct InfiniteRunConfig {
    int horizon = 1000;
    double price_low = 1.0;
    double price_high = 10.0;
    std::size_t grid_size = 200;
    KappaConfig kappa;
    int refit_every = 1;             // hyperparameter search period, in steps
    int restarts = 5;
    std::optional<double> initial_price;  // defaults to the domain midpoint
    std::optional<double> noise_floor;    // defaults to default_noise_floor(data)
    std::uint64_t seed = 1;

    void validate() const;
    PriceGrid grid() const { return PriceGrid(price_low, price_high, grid_size); }
    double first_price() const { return initial_price.value_or(0.5 * (price_low + price_high)); }
};

struct InfiniteStep {
    int t = 0;
    double price = 0.0;
    double demand = 0.0;
    double revenue = 0.0;
    double inst_regret = 0.0;
    double cum_regret = 0.0;
    double best_till_now = 0.0;
    std::size_t gp_points = 0;  // GP training-set size after this step's update
};

struct InfiniteTrace {
    std::vector<InfiniteStep> steps;
    double final_price = 0.0;     // argmax of the final posterior mean over the grid
    double optimal_price = 0.0;   // reference optimum used for regret
    double optimal_revenue = 0.0;
    PhaseTimes times;
};

/// Regret reference: the expected-revenue maximum over the grid plus the
/// configured first price (lowest price on ties).
struct RevenueOptimum {
    double price = 0.0;
    double revenue = 0.0;
};
RevenueOptimum grid_revenue_optimum(const DemandEnvironment& env, const InfiniteRunConfig& cfg);

/// GP-UCB on revenue with every observation kept.
InfiniteTrace run_bo_inf(const DemandEnvironment& env, const InfiniteRunConfig& cfg);

/// Where a bucket's average revenue is placed on the price axis.
enum class BucketRepresentative {
    midpoint,  // midpoint of the bucket's intersection with the domain
    centroid,  // mean of the prices observed in the bucket
};

/// Fixed-width price buckets; B = ceil((p_h − p_l + 1)/b) and
/// g(p) = floor((p − p_l)/b) clamped to [0, B − 1].
class BucketTable {
public:
    BucketTable(double price_low, double price_high, double width,
                BucketRepresentative rep = BucketRepresentative::centroid);

    std::size_t bucket_count() const noexcept { return counts_.size(); }
    std::size_t index(double price) const;
    /// Midpoint of the bucket's intersection with the price domain.
    double midpoint(std::size_t bucket) const;
    /// Mean observed price; throws std::out_of_range on an empty bucket.
    double centroid(std::size_t bucket) const;
    double representative(std::size_t bucket) const;

    void add(double price, double revenue);
    std::size_t count(std::size_t bucket) const { return counts_.at(bucket); }
    double average(std::size_t bucket) const;

    /// (representative, average revenue) for every nonempty bucket.
    TrainingSet training_set() const;

private:
    double low_;
    double high_;
    double width_;
    BucketRepresentative rep_;
    std::vector<std::size_t> counts_;
    std::vector<double> sums_;
    std::vector<double> price_sums_;
};

std::size_t bucket_index(double price, double price_low, double price_high, double width);

/// As run_bo_inf, but the GP sees bucket-average revenue at bucket representatives.
InfiniteTrace run_lightweight_bo_inf(const DemandEnvironment& env, const InfiniteRunConfig& cfg, double bucket_width,
                                     BucketRepresentative rep = BucketRepresentative::centroid);

}  // namespace gp_pricer
