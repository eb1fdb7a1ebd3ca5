#include "gp_pricer/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gp_pricer {

PriceGrid::PriceGrid(double low, double high, std::size_t num_points) : low_(low), high_(high) {
    if (!(low > 0.0) || !(high > low) || !std::isfinite(high)) {
        throw std::invalid_argument("price grid needs 0 < low < high");
    }
    if (num_points < 2) {
        throw std::invalid_argument("price grid needs at least two points");
    }
    points_.resize(num_points);
    const double step = (high - low) / static_cast<double>(num_points - 1);
    for (std::size_t i = 0; i < num_points; ++i) {
        points_[i] = low + step * static_cast<double>(i);
    }
    points_.back() = high;
}

void KappaConfig::validate() const {
    if (!std::isfinite(constant_value) || constant_value < 0.0) {
        throw std::invalid_argument("kappa constant must be finite and >= 0");
    }
    if (!std::isfinite(schedule_scale) || !(schedule_scale > 0.0)) {
        throw std::invalid_argument("kappa schedule scale must be > 0");
    }
}

double kappa_at(int t, const KappaConfig& cfg) {
    if (t < 1) {
        throw std::invalid_argument("kappa_at: t must be >= 1");
    }
    if (cfg.mode == KappaConfig::Mode::constant) {
        return cfg.constant_value;
    }
    const double td = static_cast<double>(t);
    return cfg.schedule_scale * std::sqrt(std::log1p(td) * std::log(std::numbers::e + td * td));
}

std::size_t argmax_lowest_price(std::span<const double> prices, std::span<const double> scores) {
    if (prices.empty() || prices.size() != scores.size()) {
        throw std::invalid_argument("argmax needs matching, nonempty price and score lists");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < prices.size(); ++i) {
        if (scores[i] > scores[best] || (scores[i] == scores[best] && prices[i] < prices[best])) {
            best = i;
        }
    }
    return best;
}

Selection ucb_select(const GpPosterior& gp, std::span<const double> candidates, double kappa) {
    if (!(kappa >= 0.0)) {
        throw std::invalid_argument("ucb_select: kappa must be >= 0");
    }
    const auto preds = gp.predict(candidates);
    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        scores[i] = preds[i].mean + kappa * preds[i].stddev();
    }
    const std::size_t i = argmax_lowest_price(candidates, scores);
    return {candidates[i], scores[i]};
}

Selection ucb_select(const GpPosterior& gp, const PriceGrid& grid, double kappa) {
    return ucb_select(gp, grid.points(), kappa);
}

Selection finite_heuristic_select(const HeuristicInputs& in, int inventory, int t, int horizon, double kappa,
                                  double decay) {
    if (t < 1 || t > horizon) {
        throw std::invalid_argument("finite_heuristic_select: need 1 <= t <= T");
    }
    if (inventory < 0 || !(decay >= 0.0) || !(kappa >= 0.0)) {
        throw std::invalid_argument("finite_heuristic_select: invalid inventory, kappa or decay");
    }
    if (in.prices.size() != in.demand.size()) {
        throw std::invalid_argument("finite_heuristic_select: prices and predictions differ in length");
    }
    const double remaining = static_cast<double>(horizon - t + 1);
    const double bonus = kappa * std::exp(-decay * static_cast<double>(t));
    const double stock = static_cast<double>(inventory);
    std::vector<double> scores(in.prices.size());
    for (std::size_t i = 0; i < in.prices.size(); ++i) {
        const double demand = std::max(in.demand[i].mean, 0.0) * remaining;
        scores[i] = in.prices[i] * std::min(stock, demand) + bonus * in.demand[i].stddev();
    }
    const std::size_t i = argmax_lowest_price(in.prices, scores);
    return {in.prices[i], scores[i]};
}

Selection finite_heuristic_select(const GpPosterior& gp, int inventory, int t, int horizon, double kappa,
                                  double decay, const PriceGrid& grid) {
    const auto preds = gp.predict(grid.points());
    return finite_heuristic_select(HeuristicInputs{grid.points(), preds}, inventory, t, horizon, kappa, decay);
}

}  // namespace gp_pricer
