#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gp_pricer/gp.hpp"

namespace gp_pricer {

/// Evenly spaced prices including both endpoints.
class PriceGrid {
public:
    PriceGrid(double low, double high, std::size_t num_points);

    double low() const noexcept { return low_; }
    double high() const noexcept { return high_; }
    std::size_t size() const noexcept { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    std::span<const double> points() const noexcept { return points_; }

private:
    double low_;
    double high_;
    std::vector<double> points_;
};

struct KappaConfig {
    enum class Mode { constant, sqrt_log_schedule };

    Mode mode = Mode::constant;
    double constant_value = 2.0;
    double schedule_scale = 1.0;

    void validate() const;
};

/// Exploration weight at step t ≥ 1. The schedule is
/// scale·sqrt(log(1+t)·log(e+t²)), nondecreasing in t.
double kappa_at(int t, const KappaConfig& cfg);

struct Selection {
    double price = 0.0;
    double score = 0.0;
};

/// Index of the largest score; ties resolve to the lowest price.
std::size_t argmax_lowest_price(std::span<const double> prices, std::span<const double> scores);

/// Maximizes μ(p) + κσ(p) over the candidates. Lowest price wins ties.
Selection ucb_select(const GpPosterior& gp, std::span<const double> candidates, double kappa);
Selection ucb_select(const GpPosterior& gp, const PriceGrid& grid, double kappa);

/// Time-decaying acquisition for finite inventory, evaluated from precomputed
/// posterior moments of demand at each grid price:
///   α(p) = p·min(s, max(μ(p), 0)·(T − t + 1)) + κ·e^(−decay·t)·σ(p)
struct HeuristicInputs {
    std::span<const double> prices;
    std::span<const Prediction> demand;  // latent posterior of demand at each price
};

Selection finite_heuristic_select(const HeuristicInputs& in, int inventory, int t, int horizon, double kappa,
                                  double decay);
Selection finite_heuristic_select(const GpPosterior& gp, int inventory, int t, int horizon, double kappa,
                                  double decay, const PriceGrid& grid);

}  // namespace gp_pricer
