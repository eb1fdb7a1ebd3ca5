#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gp_pricer/errors.hpp"
#include "gp_pricer/finite.hpp"
#include "gp_pricer/oracle.hpp"
#include "test_oracles.hpp"

using namespace gp_pricer;

namespace {

FiniteRunConfig small_run(int seasons, std::uint64_t seed = 5) {
    FiniteRunConfig cfg;
    cfg.seasons = seasons;
    cfg.horizon = 10;
    cfg.inventory = 5;
    cfg.grid_size = 40;
    cfg.restarts = 3;
    cfg.seed = seed;
    return cfg;
}

void expect_season_invariants(const FiniteRunResult& r, const FiniteRunConfig& cfg) {
    ASSERT_EQ(r.seasons.size(), static_cast<std::size_t>(cfg.seasons));
    for (const auto& season : r.seasons) {
        ASSERT_EQ(season.steps.size(), static_cast<std::size_t>(cfg.horizon));
        int stock = cfg.inventory;
        double total = 0.0;
        for (const auto& step : season.steps) {
            EXPECT_EQ(step.inventory, stock);
            if (stock == 0) {
                EXPECT_TRUE(std::isnan(step.price));
                EXPECT_EQ(step.sale, 0);
                EXPECT_EQ(step.revenue, 0.0);
                continue;
            }
            EXPECT_GE(step.price, cfg.price_low);
            EXPECT_LE(step.price, cfg.price_high);
            EXPECT_EQ(step.sale, std::min<int>(stock, static_cast<int>(step.latent_demand)));
            EXPECT_DOUBLE_EQ(step.revenue, step.price * step.sale);
            stock -= step.sale;
            EXPECT_GE(stock, 0);
            total += step.revenue;
            if (stock == 0) {
                EXPECT_EQ(season.depletion_time, step.t);
            }
        }
        if (stock > 0) {
            EXPECT_FALSE(season.depletion_time.has_value());
        }
        EXPECT_NEAR(season.revenue, total, 1e-9);
        EXPECT_LE(season.revenue, cfg.price_high * cfg.inventory + 1e-9);
    }
}

}  // namespace

TEST(SaleDistribution, StandardNormalLowerTail) {
    const auto d = gaussian_sale_distribution(0.0, 1.0, 3);
    EXPECT_NEAR(d[0], 0.6914624612740131, 1e-15);
    EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-15);
}

TEST(SaleDistribution, NoStock) {
    EXPECT_EQ(gaussian_sale_distribution(4.0, 1.0, 0), std::vector<double>{1.0});
}

TEST(SaleDistribution, LargeMeanFoldsIntoTop) {
    const auto d = gaussian_sale_distribution(50.0, 1.0, 4);
    EXPECT_NEAR(d.back(), 1.0, 1e-6);
}

TEST(SaleDistribution, RowsSumToOneAcrossTails) {
    for (int s = 0; s <= 30; ++s) {
        for (double sigma : {1e-3, 0.05, 0.5, 1.0, 3.0, 25.0}) {
            for (double z : {-10.0, -3.0, -0.5, 0.0, 0.5, 3.0, 10.0}) {
                for (double centre : {0.0, 0.5 * s, double(s)}) {
                    const auto d = gaussian_sale_distribution(centre + z * sigma, sigma, s);
                    ASSERT_EQ(d.size(), static_cast<std::size_t>(s) + 1);
                    EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-10);
                    for (double p : d) EXPECT_GE(p, 0.0);
                }
            }
        }
    }
}

TEST(SaleDistribution, RejectsDegenerateSigma) {
    EXPECT_THROW(gaussian_sale_distribution(1.0, 0.0, 3), DegenerateVariance);
}

TEST(TransitionModel, RowValidation) {
    TransitionModel tm({1.0, 2.0}, 2);
    EXPECT_EQ(tm.row(0, 0).size(), 1u);
    EXPECT_EQ(tm.row(1, 2)[0], 1.0);
    EXPECT_THROW(tm.set_row(0, 2, {0.5, 0.5}), ShapeMismatch);
    EXPECT_THROW(tm.set_row(0, 1, {0.6, 0.5}), std::invalid_argument);
    EXPECT_THROW(tm.set_row(0, 1, {1.1, -0.1}), std::invalid_argument);
    tm.set_row(0, 1, {0.25, 0.75});
    EXPECT_EQ(tm.row(0, 1)[1], 0.75);
}

TEST(TransitionModel, FromPredictionsChecksFloor) {
    const std::vector<double> prices{1.0, 2.0};
    const std::vector<Prediction> demand{{1.0, 0.25}, {0.5, 1e-8}};
    EXPECT_THROW(build_transition_model(prices, demand, 3, 0.01), DegenerateVariance);
    const std::vector<Prediction> ok{{1.0, 0.25}, {0.5, 0.04}};
    const auto tm = build_transition_model(prices, ok, 3, 0.01);
    const auto expected = gaussian_sale_distribution(0.5, 0.2, 2);
    const auto row = tm.row(1, 2);
    for (std::size_t q = 0; q < row.size(); ++q) EXPECT_DOUBLE_EQ(row[q], expected[q]);
}

TEST(TransitionModel, FromPosteriorFloorsLatentStd) {
    TrainingSet d;
    for (int i = 0; i < 50; ++i) d.add(1.0, 1.0);
    KernelHyperparams hp;
    hp.amplitude_sq = 1.0;
    hp.lengthscale = 1.0;
    hp.noise_var = 1e-6;
    const auto gp = GpPosterior::fit(d, hp, 1.0);
    const std::vector<double> prices{1.0};
    const auto tm = build_transition_model(gp, prices, 2, 0.3);
    const auto expected = gaussian_sale_distribution(gp.predict(1.0).mean, 0.3, 2);
    for (std::size_t q = 0; q < 3; ++q) EXPECT_DOUBLE_EQ(tm.row(0, 2)[q], expected[q]);
}

TEST(ValueIteration, OneStepDeterministic) {
    const std::vector<double> prices{1.0, 2.0, 3.0, 4.0};
    const std::vector<int> demand{4, 3, 1, 0};
    const int c = 3;
    TransitionModel tm(prices, c);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        for (int s = 1; s <= c; ++s) {
            std::vector<double> row(static_cast<std::size_t>(s) + 1, 0.0);
            row[static_cast<std::size_t>(std::min(s, demand[i]))] = 1.0;
            tm.set_row(i, s, row);
        }
    }
    const auto dp = value_iteration(tm, 1);
    for (int s = 1; s <= c; ++s) {
        double best = 0.0;
        for (std::size_t i = 0; i < prices.size(); ++i) best = std::max(best, prices[i] * std::min(s, demand[i]));
        EXPECT_DOUBLE_EQ(dp.value(s, 1), best);
    }
    EXPECT_EQ(dp.policy(1, 1), 3.0);  // one unit: the highest price that still sells
    EXPECT_EQ(dp.policy(3, 1), 2.0);  // 2·3 beats 1·3 and 3·1
}

TEST(ValueIteration, MatchesTreeEnumerationSmall) {
    std::mt19937_64 rng(21);
    const std::vector<double> prices{2.0, 5.0};
    for (int rep = 0; rep < 10; ++rep) {
        const auto k = oracle::random_free_kernel(rng, prices.size(), 2);
        const auto dp = value_iteration(oracle::to_model(k, prices, 2), 2);
        for (int s = 0; s <= 2; ++s) {
            for (int t = 1; t <= 2; ++t) {
                const auto ref = oracle::expectimax(k, prices, s, t, 2);
                EXPECT_NEAR(dp.value(s, t), ref.value, 1e-12);
                if (s > 0) {
                    EXPECT_EQ(dp.policy(s, t), ref.price);
                }
            }
        }
        EXPECT_NEAR(dp.value(2, 1), oracle::best_policy_by_enumeration(k, prices, 2, 2), 1e-12);
    }
}

TEST(ValueIteration, NoSalesGivesZero) {
    const std::vector<double> prices{3.0, 1.0, 2.0};
    TransitionModel tm(prices, 4);
    const auto dp = value_iteration(tm, 5);
    for (int s = 0; s <= 4; ++s) {
        for (int t = 1; t <= 5; ++t) {
            EXPECT_EQ(dp.value(s, t), 0.0);
            EXPECT_EQ(dp.policy(s, t), 1.0);
        }
        EXPECT_EQ(dp.value(s, 6), 0.0);
    }
}

TEST(ValueIteration, InvariantToPriceOrder) {
    std::mt19937_64 rng(8);
    std::vector<double> prices{1.0, 2.5, 4.0, 7.0, 9.0};
    const auto k = oracle::random_capped_kernel(rng, prices.size(), 4);
    const auto a = value_iteration(oracle::to_model(k, prices, 4), 6);
    std::vector<std::size_t> order{3, 0, 4, 2, 1};
    std::vector<double> shuffled;
    oracle::Kernel ks;
    for (std::size_t i : order) {
        shuffled.push_back(prices[i]);
        ks.push_back(k[i]);
    }
    const auto b = value_iteration(oracle::to_model(ks, shuffled, 4), 6);
    for (int s = 0; s <= 4; ++s) {
        for (int t = 1; t <= 6; ++t) {
            EXPECT_NEAR(a.value(s, t), b.value(s, t), 1e-12);
            EXPECT_EQ(a.policy(s, t), b.policy(s, t));
        }
    }
}

TEST(ValueIteration, MonotoneForCappedKernels) {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> prices{1.0, 3.0, 6.0, 10.0};
        const auto k = oracle::random_capped_kernel(rng, prices.size(), 6);
        const auto dp = value_iteration(oracle::to_model(k, prices, 6), 8);
        EXPECT_TRUE(dp.value.is_monotone());
    }
}

TEST(ValueMatrix, MonotonicityCheckDetectsViolations) {
    ValueMatrix v(2, 2);
    v(1, 1) = 2.0;
    v(2, 1) = 3.0;
    v(1, 2) = 1.0;
    v(2, 2) = 1.5;
    EXPECT_TRUE(v.is_monotone());
    v(2, 2) = 3.5;
    EXPECT_FALSE(v.is_monotone());
    v(2, 2) = 1.5;
    v(2, 1) = 1.0;
    EXPECT_FALSE(v.is_monotone());
}

TEST(ModelBased, BootstrapSeasonWellFormed) {
    FiniteBernoulliDemand env(FiniteBernoulliDemand::Variant::logit);
    const auto cfg = small_run(1);
    const auto r = run_gp_fin_model_based(env, cfg);
    expect_season_invariants(r, cfg);
    ASSERT_EQ(r.policies.size(), 1u);
    ASSERT_EQ(r.values.size(), 1u);
    EXPECT_TRUE(r.values[0].is_monotone());
}

TEST(ModelBased, SeasonsWellFormedAndDeterministic) {
    PoissonWtpDemand env(2.0, 10.0);
    auto cfg = small_run(6, 9);
    cfg.price_high = 30.0;
    const auto a = run_gp_fin_model_based(env, cfg);
    expect_season_invariants(a, cfg);
    const auto b = run_gp_fin_model_based(env, cfg);
    for (std::size_t n = 0; n < a.seasons.size(); ++n) {
        for (std::size_t t = 0; t < a.seasons[n].steps.size(); ++t) {
            const auto& x = a.seasons[n].steps[t];
            const auto& y = b.seasons[n].steps[t];
            EXPECT_TRUE(x.price == y.price || (std::isnan(x.price) && std::isnan(y.price)));
            EXPECT_EQ(x.sale, y.sale);
        }
    }
    for (const auto& v : a.values) EXPECT_TRUE(v.is_monotone());
}

TEST(Heuristic, SeasonsWellFormedWithLowestPriceAtZeroStock) {
    FiniteBernoulliDemand env(FiniteBernoulliDemand::Variant::step_misspec);
    const auto cfg = small_run(5);
    const auto r = run_bo_fin_heuristic(env, cfg);
    expect_season_invariants(r, cfg);
    ASSERT_EQ(r.policies.size(), 5u);
    for (int t = 1; t <= cfg.horizon; ++t) EXPECT_EQ(r.policies[0](0, t), cfg.price_low);
}

TEST(Heuristic, NonBindingStockGivesConstantPriceWithinSeason) {
    PoissonWtpDemand env(5.0, 30.0);
    FiniteRunConfig cfg;
    cfg.seasons = 4;
    cfg.horizon = 10;
    cfg.inventory = 100;  // far above 2·arrival_rate·T
    cfg.price_high = 60.0;
    cfg.grid_size = 60;
    cfg.kappa = 0.0;
    cfg.restarts = 3;
    const auto r = run_bo_fin_heuristic(env, cfg);
    for (const auto& season : r.seasons) {
        for (const auto& step : season.steps) EXPECT_EQ(step.price, season.steps.front().price);
    }
}

TEST(Heuristic, PoissonWtpRevenueImprovesAcrossSeasons) {
    PoissonWtpDemand env(5.0, 30.0);
    FiniteRunConfig cfg;
    cfg.seasons = 50;
    cfg.horizon = 100;
    cfg.inventory = 80;
    cfg.price_high = 100.0;
    cfg.record_policies = false;
    // Single seasons are noisy; pool a few seeds.
    double early = 0.0;
    double late = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        cfg.seed = seed;
        const auto r = run_bo_fin_heuristic(env, cfg);
        for (int n = 0; n < 10; ++n) early += r.seasons[static_cast<std::size_t>(n)].revenue / 40.0;
        for (int n = 39; n < 50; ++n) late += r.seasons[static_cast<std::size_t>(n)].revenue / 44.0;
    }
    EXPECT_GT(late, early);
    EXPECT_GT(late, 0.8 * solve_oracle(env, cfg.inventory, cfg.horizon, cfg.grid().points()).optimal_value);
}
