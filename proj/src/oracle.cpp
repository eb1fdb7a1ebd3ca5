#include "gp_pricer/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gp_pricer/errors.hpp"
#include "gp_pricer/rng.hpp"

namespace gp_pricer {

TransitionModel true_transition_model(const DemandEnvironment& env, std::span<const double> prices, int max_inventory) {
    TransitionModel tm(std::vector<double>(prices.begin(), prices.end()), max_inventory);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        for (int s = 1; s <= max_inventory; ++s) {
            tm.set_row(i, s, true_sale_kernel(env, s, prices[i]));
        }
    }
    return tm;
}

OracleSolution solve_oracle(const DemandEnvironment& env, int max_inventory, int horizon, std::span<const double> prices) {
    if (!env.supports_integer_demand()) {
        throw Unsupported("oracle needs an exact sale kernel; '" + env.name() + "' has none");
    }
    DynamicProgram dp = value_iteration(true_transition_model(env, prices, max_inventory), horizon);
    const double v = dp.value(max_inventory, 1);
    return {std::move(dp.value), std::move(dp.policy), v};
}

std::vector<double> cumulative_regret(std::span<const SeasonTrace> seasons, const OracleSolution& oracle) {
    const int horizon = oracle.value.horizon();
    const int inventory = oracle.value.max_inventory();
    std::vector<double> out;
    out.reserve(seasons.size());
    double collected = 0.0;
    for (std::size_t n = 0; n < seasons.size(); ++n) {
        const SeasonTrace& season = seasons[n];
        if (season.steps.size() != static_cast<std::size_t>(horizon) || season.steps.front().inventory != inventory) {
            throw ShapeMismatch("season trace does not match the oracle's (C, T)");
        }
        collected += season.revenue;
        out.push_back(static_cast<double>(n + 1) * oracle.optimal_value - collected);
    }
    return out;
}

double policy_error_norm(const PolicyMatrix& psi, const PolicyMatrix& psi_star, const std::set<int>& exclude_inventory) {
    if (psi.max_inventory() != psi_star.max_inventory() || psi.horizon() != psi_star.horizon()) {
        throw ShapeMismatch("policy matrices differ in shape");
    }
    double sum = 0.0;
    for (int s = 0; s <= psi.max_inventory(); ++s) {
        if (exclude_inventory.contains(s)) {
            continue;
        }
        for (int t = 1; t <= psi.horizon(); ++t) {
            const double d = psi(s, t) - psi_star(s, t);
            sum += d * d;
        }
    }
    return std::sqrt(sum);
}

std::vector<double> best_till_now_regret(const InfiniteTrace& trace, const DemandEnvironment& env) {
    std::vector<double> out;
    out.reserve(trace.steps.size());
    double best = -std::numeric_limits<double>::infinity();
    for (const InfiniteStep& step : trace.steps) {
        best = std::max(best, env.expected_revenue(step.price));
        out.push_back(trace.optimal_revenue - best);
    }
    return out;
}

std::vector<double> relative_regret(const InfiniteTrace& trace, const DemandEnvironment& env) {
    if (!(trace.optimal_revenue > 0.0)) {
        throw DegenerateOptimum("relative regret needs a positive optimal expected revenue");
    }
    std::vector<double> out;
    out.reserve(trace.steps.size());
    for (const InfiniteStep& step : trace.steps) {
        out.push_back((trace.optimal_revenue - env.expected_revenue(step.price)) / trace.optimal_revenue);
    }
    return out;
}

double policy_expected_revenue(const DemandEnvironment& env, const PolicyMatrix& psi) {
    const int c = psi.max_inventory();
    const int horizon = psi.horizon();
    // W(s) holds the expected revenue still to come from step t + 1 with s units.
    std::vector<double> next(static_cast<std::size_t>(c) + 1, 0.0);
    std::vector<double> cur(next.size(), 0.0);
    for (int t = horizon; t >= 1; --t) {
        cur[0] = 0.0;
        for (int s = 1; s <= c; ++s) {
            const double p = psi(s, t);
            const auto probs = true_sale_kernel(env, s, p);
            double v = 0.0;
            for (int q = 0; q <= s; ++q) {
                v += probs[static_cast<std::size_t>(q)] * (p * q + next[static_cast<std::size_t>(s - q)]);
            }
            cur[static_cast<std::size_t>(s)] = v;
        }
        std::swap(cur, next);
    }
    return next[static_cast<std::size_t>(c)];
}

MonteCarloEstimate policy_revenue_monte_carlo(const DemandEnvironment& env, const PolicyMatrix& psi, int replications,
                                              std::uint64_t seed) {
    if (replications < 1) {
        throw std::invalid_argument("replications must be >= 1");
    }
    std::vector<double> revenue(static_cast<std::size_t>(replications));
    for (int r = 0; r < replications; ++r) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
        int stock = psi.max_inventory();
        double total = 0.0;
        for (int t = 1; t <= psi.horizon() && stock > 0; ++t) {
            const double p = psi(stock, t);
            const int sale = static_cast<int>(std::min<double>(stock, env.sample(p, rng)));
            total += p * sale;
            stock -= sale;
        }
        revenue[static_cast<std::size_t>(r)] = total;
    }
    const Aggregate a = aggregate(revenue);
    return {a.mean, std::sqrt(a.variance / static_cast<double>(a.count))};
}

Aggregate aggregate(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("aggregate of an empty series");
    }
    Aggregate a;
    a.count = values.size();
    a.min = *std::min_element(values.begin(), values.end());
    a.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    a.mean = std::clamp(sum / static_cast<double>(a.count), a.min, a.max);
    double m2 = 0.0;
    for (double v : values) {
        m2 += (v - a.mean) * (v - a.mean);
    }
    a.variance = a.count > 1 ? m2 / static_cast<double>(a.count - 1) : 0.0;
    return a;
}

std::vector<Aggregate> aggregate_series(std::span<const std::vector<double>> series) {
    if (series.empty()) {
        return {};
    }
    const std::size_t len = series.front().size();
    for (const auto& s : series) {
        if (s.size() != len) {
            throw ShapeMismatch("series differ in length");
        }
    }
    std::vector<Aggregate> out;
    out.reserve(len);
    std::vector<double> column(series.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t r = 0; r < series.size(); ++r) {
            column[r] = series[r][i];
        }
        out.push_back(aggregate(column));
    }
    return out;
}

}  // namespace gp_pricer
