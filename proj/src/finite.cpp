#include "gp_pricer/finite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "gp_pricer/errors.hpp"
#include "gp_pricer/rng.hpp"

namespace gp_pricer {

void FiniteRunConfig::validate() const {
    if (seasons < 1 || horizon < 1 || inventory < 1) {
        throw std::invalid_argument("seasons, horizon and inventory must be >= 1");
    }
    if (hyper_refit_every < 1 || restarts < 1) {
        throw std::invalid_argument("hyper_refit_every and restarts must be >= 1");
    }
    if (!(kappa >= 0.0) || !(decay >= 0.0)) {
        throw std::invalid_argument("kappa and decay must be >= 0");
    }
    grid();
    const double p1 = first_price();
    if (!(p1 >= price_low && p1 <= price_high)) {
        throw std::invalid_argument("initial price must lie in the price domain");
    }
}

// ---------------------------------------------------------------------------

namespace {

// Φ(z) and 1 − Φ(z), each evaluated on the side where it keeps precision.
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

constexpr double kRowTolerance = 1e-10;

}  // namespace

std::vector<double> gaussian_sale_distribution(double mu, double sigma, int inventory) {
    if (inventory < 0) {
        throw std::invalid_argument("inventory must be >= 0");
    }
    if (!(sigma > 0.0) || !std::isfinite(mu)) {
        throw DegenerateVariance("sale distribution needs finite mean and positive standard deviation");
    }
    std::vector<double> probs(static_cast<std::size_t>(inventory) + 1, 0.0);
    if (inventory == 0) {
        probs[0] = 1.0;
        return probs;
    }
    // Probability of the interval [a, b) under N(mu, sigma²), using whichever
    // tail keeps the subtraction small.
    auto slice = [&](double a, double b) {
        const double za = (a - mu) / sigma;
        const double zb = (b - mu) / sigma;
        if (za >= 0.0) {
            return normal_sf(za) - normal_sf(zb);
        }
        return normal_cdf(zb) - normal_cdf(za);
    };
    probs[0] = normal_cdf((0.5 - mu) / sigma);
    for (int q = 1; q < inventory; ++q) {
        probs[static_cast<std::size_t>(q)] = std::max(0.0, slice(q - 0.5, q + 0.5));
    }
    probs.back() = normal_sf((inventory - 0.5 - mu) / sigma);
    // Absorb the rounding residue at the endpoint that carries the most mass.
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    auto heaviest = std::max_element(probs.begin(), probs.end());
    *heaviest = std::max(0.0, *heaviest + (1.0 - total));
    return probs;
}

// ---------------------------------------------------------------------------

TransitionModel::TransitionModel(std::vector<double> prices, int max_inventory)
    : prices_(std::move(prices)), max_inventory_(max_inventory) {
    if (prices_.empty()) {
        throw std::invalid_argument("transition model needs at least one price");
    }
    if (max_inventory < 0) {
        throw std::invalid_argument("max inventory must be >= 0");
    }
    const std::size_t per_price = static_cast<std::size_t>(max_inventory + 1) * (max_inventory + 2) / 2;
    probs_.assign(prices_.size() * per_price, 0.0);
    for (std::size_t i = 0; i < prices_.size(); ++i) {
        for (int s = 0; s <= max_inventory; ++s) {
            probs_[offset(i, s)] = 1.0;
        }
    }
}

std::size_t TransitionModel::offset(std::size_t price_index, int inventory) const {
    if (price_index >= prices_.size() || inventory < 0 || inventory > max_inventory_) {
        throw std::out_of_range("transition model index out of range");
    }
    const std::size_t per_price = static_cast<std::size_t>(max_inventory_ + 1) * (max_inventory_ + 2) / 2;
    const auto s = static_cast<std::size_t>(inventory);
    return price_index * per_price + s * (s + 1) / 2;
}

void TransitionModel::set_row(std::size_t price_index, int inventory, std::vector<double> probs) {
    const std::size_t at = offset(price_index, inventory);
    if (probs.size() != static_cast<std::size_t>(inventory) + 1) {
        throw ShapeMismatch("transition row for inventory s needs s + 1 entries");
    }
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument("transition probabilities must be nonnegative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kRowTolerance) {
        throw std::invalid_argument("transition row must sum to 1");
    }
    std::copy(probs.begin(), probs.end(), probs_.begin() + static_cast<std::ptrdiff_t>(at));
}

std::span<const double> TransitionModel::row(std::size_t price_index, int inventory) const {
    return {probs_.data() + offset(price_index, inventory), static_cast<std::size_t>(inventory) + 1};
}

TransitionModel build_transition_model(std::span<const double> prices, std::span<const Prediction> demand,
                                       int max_inventory, double noise_floor) {
    if (prices.size() != demand.size()) {
        throw ShapeMismatch("one demand prediction per price is required");
    }
    TransitionModel tm(std::vector<double>(prices.begin(), prices.end()), max_inventory);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        const double sigma = demand[i].stddev();
        if (!(sigma >= noise_floor)) {
            throw DegenerateVariance("posterior standard deviation below the noise floor");
        }
        for (int s = 1; s <= max_inventory; ++s) {
            tm.set_row(i, s, gaussian_sale_distribution(demand[i].mean, sigma, s));
        }
    }
    return tm;
}

TransitionModel build_transition_model(const GpPosterior& gp, std::span<const double> prices, int max_inventory,
                                       double noise_floor) {
    std::vector<Prediction> preds = gp.predict(prices);
    for (Prediction& p : preds) {
        p.variance = std::max(p.variance, noise_floor * noise_floor);
    }
    return build_transition_model(prices, preds, max_inventory, noise_floor);
}

// ---------------------------------------------------------------------------

ValueMatrix::ValueMatrix(int max_inventory, int horizon) : c_(max_inventory), t_(horizon) {
    if (max_inventory < 0 || horizon < 1) {
        throw std::invalid_argument("value matrix needs C >= 0 and T >= 1");
    }
    v_.assign(static_cast<std::size_t>(c_ + 1) * static_cast<std::size_t>(t_ + 1), 0.0);
}

std::size_t ValueMatrix::index(int s, int t) const {
    if (s < 0 || s > c_ || t < 1 || t > t_ + 1) {
        throw std::out_of_range("value matrix index out of range");
    }
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(t_ + 1) + static_cast<std::size_t>(t - 1);
}

bool ValueMatrix::is_monotone(double tol) const {
    for (int s = 0; s <= c_; ++s) {
        if ((*this)(s, t_ + 1) != 0.0) {
            return false;
        }
        for (int t = 1; t <= t_ + 1; ++t) {
            const double v = (*this)(s, t);
            if (v < -tol || (s == 0 && v != 0.0)) {
                return false;
            }
            if (s > 0 && v < (*this)(s - 1, t) - tol) {
                return false;
            }
            if (t > 1 && v > (*this)(s, t - 1) + tol) {
                return false;
            }
        }
    }
    return true;
}

PolicyMatrix::PolicyMatrix(int max_inventory, int horizon, double fill) : c_(max_inventory), t_(horizon) {
    if (max_inventory < 0 || horizon < 1) {
        throw std::invalid_argument("policy matrix needs C >= 0 and T >= 1");
    }
    p_.assign(static_cast<std::size_t>(c_ + 1) * static_cast<std::size_t>(t_), fill);
}

std::size_t PolicyMatrix::index(int s, int t) const {
    if (s < 0 || s > c_ || t < 1 || t > t_) {
        throw std::out_of_range("policy matrix index out of range");
    }
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(t_) + static_cast<std::size_t>(t - 1);
}

DynamicProgram value_iteration(const TransitionModel& tm, int horizon) {
    const int c = tm.max_inventory();
    const auto prices = tm.prices();
    const double lowest = *std::min_element(prices.begin(), prices.end());
    DynamicProgram dp{ValueMatrix(c, horizon), PolicyMatrix(c, horizon, lowest)};
    for (int t = horizon; t >= 1; --t) {
        for (int s = 1; s <= c; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            double best_price = lowest;
            for (std::size_t i = 0; i < prices.size(); ++i) {
                const auto row = tm.row(i, s);
                double value = 0.0;
                for (int q = 0; q <= s; ++q) {
                    value += row[static_cast<std::size_t>(q)] * (prices[i] * q + dp.value(s - q, t + 1));
                }
                if (value > best || (value == best && prices[i] < best_price)) {
                    best = value;
                    best_price = prices[i];
                }
            }
            dp.value(s, t) = best;
            dp.policy(s, t) = best_price;
        }
    }
    return dp;
}

// ---------------------------------------------------------------------------

namespace {

using PriceRule = std::function<double(int inventory, int t)>;

// Posts prices from `rule` until the season ends or sells out. Sales feed the
// data set as capped demand min(d, s).
SeasonTrace execute_season(const DemandEnvironment& env, const FiniteRunConfig& cfg, int season, const PriceRule& rule,
                           Rng& rng, TrainingSet& data, const std::function<void()>& after_step = {}) {
    SeasonTrace trace;
    trace.season = season;
    trace.steps.reserve(static_cast<std::size_t>(cfg.horizon));
    int stock = cfg.inventory;
    for (int t = 1; t <= cfg.horizon; ++t) {
        SeasonStep step;
        step.season = season;
        step.t = t;
        step.inventory = stock;
        if (stock == 0) {
            step.price = std::numeric_limits<double>::quiet_NaN();
            step.latent_demand = std::numeric_limits<double>::quiet_NaN();
            trace.steps.push_back(step);
            continue;
        }
        step.price = rule(stock, t);
        step.latent_demand = env.sample(step.price, rng);
        step.sale = static_cast<int>(std::min<double>(stock, step.latent_demand));
        step.revenue = step.price * step.sale;
        data.add(step.price, static_cast<double>(step.sale));
        stock -= step.sale;
        trace.revenue += step.revenue;
        if (stock == 0) {
            trace.depletion_time = t;
        }
        trace.steps.push_back(step);
        if (after_step) {
            after_step();
        }
    }
    return trace;
}

struct Learner {
    const FiniteRunConfig& cfg;
    std::uint64_t search_stream;
    std::optional<KernelHyperparams> hp;
    double floor = 0.0;

    // Hyperparameter search on the configured season cadence, then a fit.
    GpPosterior fit(const TrainingSet& data, int season) {
        if (!hp || (season - 1) % cfg.hyper_refit_every == 0) {
            HyperparamSearch search;
            search.bounds = default_bounds(data, cfg.price_low, cfg.price_high);
            search.restarts = cfg.restarts;
            floor = cfg.noise_floor.value_or(default_noise_floor(data));
            search.noise_floor = floor;
            search.initial = hp;
            search.seed = split_seed(search_stream, static_cast<std::uint64_t>(season));
            hp = optimize_hyperparams(data, search);
        }
        return GpPosterior::fit(data, *hp, data.target_mean());
    }
};

TrainingSet seed_observation(const DemandEnvironment& env, const FiniteRunConfig& cfg, Rng& rng) {
    TrainingSet data;
    const double p1 = cfg.first_price();
    const double d1 = env.sample(p1, rng);
    data.add(p1, std::min<double>(cfg.inventory, d1));
    return data;
}

void require_integer_demand(const DemandEnvironment& env) {
    if (!env.supports_integer_demand()) {
        throw Unsupported("finite-inventory runs need integer demand; '" + env.name() + "' is continuous");
    }
}

}  // namespace

FiniteRunResult run_gp_fin_model_based(const DemandEnvironment& env, const FiniteRunConfig& cfg) {
    cfg.validate();
    require_integer_demand(env);
    const PriceGrid grid = cfg.grid();
    Rng rng = make_rng(cfg.seed, 0);
    Learner learner{cfg, split_seed(cfg.seed, 1), std::nullopt};
    TrainingSet data = seed_observation(env, cfg, rng);

    FiniteRunResult result;
    try {
        for (int n = 1; n <= cfg.seasons; ++n) {
            Stopwatch clock;
            PhaseTimes times;
            const GpPosterior gp = learner.fit(data, n);
            times.fit = clock.lap();
            const TransitionModel tm = build_transition_model(gp, grid.points(), cfg.inventory, learner.floor);
            DynamicProgram dp = value_iteration(tm, cfg.horizon);
            times.plan = clock.lap();
            const PolicyMatrix& psi = dp.policy;
            SeasonTrace season = execute_season(
                env, cfg, n, [&](int s, int t) { return psi(s, t); }, rng, data);
            times.act = clock.lap();
            season.times = times;
            result.seasons.push_back(std::move(season));
            result.hyperparams.push_back(*learner.hp);
            if (cfg.record_policies) {
                result.policies.push_back(std::move(dp.policy));
                result.values.push_back(std::move(dp.value));
            }
        }
    } catch (const Error& e) {
        throw RunAborted<FiniteRunResult>(e.what(), std::move(result));
    }
    return result;
}

FiniteRunResult run_bo_fin_heuristic(const DemandEnvironment& env, const FiniteRunConfig& cfg) {
    cfg.validate();
    require_integer_demand(env);
    const PriceGrid grid = cfg.grid();
    Rng rng = make_rng(cfg.seed, 0);
    Learner learner{cfg, split_seed(cfg.seed, 1), std::nullopt};
    TrainingSet data = seed_observation(env, cfg, rng);

    FiniteRunResult result;
    try {
        for (int n = 1; n <= cfg.seasons; ++n) {
            Stopwatch clock;
            PhaseTimes times;
            std::vector<Prediction> preds = learner.fit(data, n).predict(grid.points());
            times.fit = clock.lap();

            auto rule = [&](int s, int t) {
                return finite_heuristic_select(HeuristicInputs{grid.points(), preds}, s, t, cfg.horizon, cfg.kappa,
                                               cfg.decay)
                    .price;
            };
            std::function<void()> refresh;
            if (cfg.refresh_within_season) {
                refresh = [&] { preds = GpPosterior::fit(data, *learner.hp, data.target_mean()).predict(grid.points()); };
            }
            if (cfg.record_policies) {
                PolicyMatrix psi(cfg.inventory, cfg.horizon, grid.low());
                for (int t = 1; t <= cfg.horizon; ++t) {
                    for (int s = 1; s <= cfg.inventory; ++s) {
                        psi(s, t) = rule(s, t);
                    }
                }
                result.policies.push_back(std::move(psi));
            }
            clock.lap();
            SeasonTrace season = execute_season(env, cfg, n, rule, rng, data, refresh);
            times.act = clock.lap();
            season.times = times;
            result.seasons.push_back(std::move(season));
            result.hyperparams.push_back(*learner.hp);
        }
    } catch (const Error& e) {
        throw RunAborted<FiniteRunResult>(e.what(), std::move(result));
    }
    return result;
}

}  // namespace gp_pricer
