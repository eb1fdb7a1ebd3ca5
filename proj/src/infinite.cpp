#include "gp_pricer/infinite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gp_pricer/errors.hpp"
#include "gp_pricer/rng.hpp"

namespace gp_pricer {

void InfiniteRunConfig::validate() const {
    if (horizon < 1) {
        throw std::invalid_argument("horizon must be >= 1");
    }
    if (refit_every < 1 || restarts < 1) {
        throw std::invalid_argument("refit_every and restarts must be >= 1");
    }
    kappa.validate();
    grid();
    const double p1 = first_price();
    if (!(p1 >= price_low && p1 <= price_high)) {
        throw std::invalid_argument("initial price must lie in the price domain");
    }
}

RevenueOptimum grid_revenue_optimum(const DemandEnvironment& env, const InfiniteRunConfig& cfg) {
    const PriceGrid grid = cfg.grid();
    std::vector<double> prices(grid.points().begin(), grid.points().end());
    prices.push_back(cfg.first_price());
    std::vector<double> revenue(prices.size());
    std::transform(prices.begin(), prices.end(), revenue.begin(),
                   [&](double p) { return env.expected_revenue(p); });
    const std::size_t i = argmax_lowest_price(prices, revenue);
    return {prices[i], revenue[i]};
}

// ---------------------------------------------------------------------------

BucketTable::BucketTable(double price_low, double price_high, double width, BucketRepresentative rep)
    : low_(price_low), high_(price_high), width_(width), rep_(rep) {
    if (!(width > 0.0) || !std::isfinite(width)) {
        throw std::invalid_argument("bucket width must be > 0");
    }
    if (!(price_high > price_low)) {
        throw std::invalid_argument("bucket table needs price_low < price_high");
    }
    const auto n = static_cast<std::size_t>(std::ceil((price_high - price_low + 1.0) / width));
    counts_.assign(std::max<std::size_t>(n, 1), 0);
    sums_.assign(counts_.size(), 0.0);
    price_sums_.assign(counts_.size(), 0.0);
}

std::size_t BucketTable::index(double price) const {
    const double raw = std::floor((price - low_) / width_);
    if (!(raw > 0.0)) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(raw), counts_.size() - 1);
}

double BucketTable::midpoint(std::size_t bucket) const {
    const double lo = std::min(low_ + width_ * static_cast<double>(bucket), high_);
    const double hi = std::min(low_ + width_ * static_cast<double>(bucket + 1), high_);
    return 0.5 * (lo + hi);
}

double BucketTable::centroid(std::size_t bucket) const {
    if (counts_.at(bucket) == 0) {
        throw std::out_of_range("bucket is empty");
    }
    return price_sums_[bucket] / static_cast<double>(counts_[bucket]);
}

double BucketTable::representative(std::size_t bucket) const {
    return rep_ == BucketRepresentative::midpoint ? midpoint(bucket) : centroid(bucket);
}

void BucketTable::add(double price, double revenue) {
    const std::size_t b = index(price);
    counts_[b] += 1;
    sums_[b] += revenue;
    price_sums_[b] += price;
}

double BucketTable::average(std::size_t bucket) const {
    if (counts_.at(bucket) == 0) {
        throw std::out_of_range("bucket is empty");
    }
    return sums_[bucket] / static_cast<double>(counts_[bucket]);
}

TrainingSet BucketTable::training_set() const {
    TrainingSet data;
    for (std::size_t b = 0; b < counts_.size(); ++b) {
        if (counts_[b] > 0) {
            data.add(representative(b), average(b));
        }
    }
    return data;
}

std::size_t bucket_index(double price, double price_low, double price_high, double width) {
    return BucketTable(price_low, price_high, width).index(price);
}

// ---------------------------------------------------------------------------

namespace {

class FullHistory {
public:
    void add(double price, double revenue) { data_.add(price, revenue); }
    const TrainingSet& data() const { return data_; }

private:
    TrainingSet data_;
};

class BucketedHistory {
public:
    BucketedHistory(const InfiniteRunConfig& cfg, double width, BucketRepresentative rep)
        : table_(cfg.price_low, cfg.price_high, width, rep) {}

    void add(double price, double revenue) {
        table_.add(price, revenue);
        data_ = table_.training_set();
    }
    const TrainingSet& data() const { return data_; }

private:
    BucketTable table_;
    TrainingSet data_;
};

template <typename History>
InfiniteTrace run_loop(const DemandEnvironment& env, const InfiniteRunConfig& cfg, History history) {
    cfg.validate();
    const PriceGrid grid = cfg.grid();
    const RevenueOptimum best = grid_revenue_optimum(env, cfg);

    InfiniteTrace trace;
    trace.optimal_price = best.price;
    trace.optimal_revenue = best.revenue;
    trace.steps.reserve(static_cast<std::size_t>(cfg.horizon));

    Rng rng = make_rng(cfg.seed, 0);
    const std::uint64_t search_stream = split_seed(cfg.seed, 1);
    std::optional<KernelHyperparams> hp;
    double cum_regret = 0.0;
    double best_seen = -std::numeric_limits<double>::infinity();

    auto refresh_hyperparams = [&](int t) {
        const TrainingSet& data = history.data();
        HyperparamSearch search;
        search.bounds = default_bounds(data, cfg.price_low, cfg.price_high);
        search.restarts = cfg.restarts;
        search.noise_floor = cfg.noise_floor.value_or(default_noise_floor(data));
        search.initial = hp;
        search.seed = split_seed(search_stream, static_cast<std::uint64_t>(t));
        hp = optimize_hyperparams(data, search);
    };

    try {
        for (int t = 1; t <= cfg.horizon; ++t) {
            double price = cfg.first_price();
            if (t > 1) {
                Stopwatch fit_clock;
                const TrainingSet& data = history.data();
                if ((t - 2) % cfg.refit_every == 0) {
                    refresh_hyperparams(t);
                }
                const GpPosterior gp = GpPosterior::fit(data, *hp, data.target_mean());
                trace.times.fit += fit_clock.lap();
                price = ucb_select(gp, grid, kappa_at(t, cfg.kappa)).price;
                trace.times.plan += fit_clock.lap();
            }

            Stopwatch act_clock;
            InfiniteStep step;
            step.t = t;
            step.price = price;
            step.demand = env.sample(price, rng);
            step.revenue = price * step.demand;
            history.add(price, step.revenue);

            const double expected = env.expected_revenue(price);
            step.inst_regret = best.revenue - expected;
            cum_regret += step.inst_regret;
            step.cum_regret = cum_regret;
            best_seen = std::max(best_seen, expected);
            step.best_till_now = best.revenue - best_seen;
            step.gp_points = history.data().size();
            trace.steps.push_back(step);
            trace.times.act += act_clock.lap();
        }

        const TrainingSet& data = history.data();
        const KernelHyperparams final_hp = hp.value_or(bounds_midpoint(default_bounds(data, cfg.price_low, cfg.price_high)));
        const GpPosterior gp = GpPosterior::fit(data, final_hp, data.target_mean());
        const auto preds = gp.predict(grid.points());
        std::vector<double> means(preds.size());
        std::transform(preds.begin(), preds.end(), means.begin(), [](const Prediction& p) { return p.mean; });
        trace.final_price = grid[argmax_lowest_price(grid.points(), means)];
    } catch (const Error& e) {
        throw RunAborted<InfiniteTrace>(e.what(), std::move(trace));
    }
    return trace;
}

}  // namespace

InfiniteTrace run_bo_inf(const DemandEnvironment& env, const InfiniteRunConfig& cfg) {
    return run_loop(env, cfg, FullHistory{});
}

InfiniteTrace run_lightweight_bo_inf(const DemandEnvironment& env, const InfiniteRunConfig& cfg, double bucket_width,
                                     BucketRepresentative rep) {
    return run_loop(env, cfg, BucketedHistory(cfg, bucket_width, rep));
}

}  // namespace gp_pricer
