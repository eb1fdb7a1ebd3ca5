#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gp_pricer/rng.hpp"

namespace gp_pricer {

/// Stochastic demand at a posted price. Implementations hold no mutable state;
/// all randomness comes from the caller's generator.
class DemandEnvironment {
public:
    virtual ~DemandEnvironment() = default;

    /// One nonnegative demand realization at `price`.
    virtual double sample(double price, Rng& rng) const = 0;

    /// E[D(price)], matching the distribution of sample().
    virtual double mean_demand(double price) const = 0;

    double expected_revenue(double price) const { return price * mean_demand(price); }

    /// True when demand takes nonnegative integer values and demand_pmf() is exact.
    virtual bool supports_integer_demand() const { return false; }

    /// Pr(D(price) = k). Throws Unsupported for continuous environments.
    virtual double demand_pmf(int k, double price) const;

    virtual std::string name() const = 0;
};

/// D(p) = Σ a_i pⁱ + ε, ε ~ N(0, (c·max|D_det|)²), clamped at 0.
class PolynomialDemand final : public DemandEnvironment {
public:
    /// `coefficients[i]` multiplies pⁱ. max|D_det| is taken over `scan_points`
    /// evenly spaced prices in [price_low, price_high].
    PolynomialDemand(std::vector<double> coefficients, double noise_scale, double price_low, double price_high,
                     int scan_points = 1001);

    double deterministic(double price) const;
    double noise_std() const noexcept { return noise_std_; }

    double sample(double price, Rng& rng) const override;
    double mean_demand(double price) const override;
    std::string name() const override { return "polynomial"; }

private:
    std::vector<double> coefficients_;
    double noise_std_;
};

enum class DemandFamily { normal, poisson, bernoulli };
enum class Link { identity, exp, logistic };

double apply_link(Link link, double x);

/// E[D(p)] = h(a0 + a1·p) with a Normal, Poisson or Bernoulli distribution.
class MomentStructuredDemand final : public DemandEnvironment {
public:
    MomentStructuredDemand(DemandFamily family, Link link, double a0, double a1, double sigma = 0.0);

    /// h(a0 + a1·p); throws InvalidLink outside the family's support.
    double link_mean(double price) const;

    double sample(double price, Rng& rng) const override;
    double mean_demand(double price) const override;
    bool supports_integer_demand() const override { return family_ != DemandFamily::normal; }
    double demand_pmf(int k, double price) const override;
    std::string name() const override;

    DemandFamily family() const noexcept { return family_; }

private:
    DemandFamily family_;
    Link link_;
    double a0_;
    double a1_;
    double sigma_;
};

/// Single-unit Bernoulli demand on [1, 20] with three purchase-probability curves.
class FiniteBernoulliDemand final : public DemandEnvironment {
public:
    enum class Variant { logit, step_misspec, log_complex };

    explicit FiniteBernoulliDemand(Variant variant) : variant_(variant) {}

    /// Purchase probability. LogComplex throws DomainError outside (0, 20).
    double probability(double price) const;

    double sample(double price, Rng& rng) const override;
    double mean_demand(double price) const override { return probability(price); }
    bool supports_integer_demand() const override { return true; }
    double demand_pmf(int k, double price) const override;
    std::string name() const override;

private:
    Variant variant_;
};

/// Poisson(arrival_rate) customers per step, each buying when an exponential
/// willingness to pay with median `sigma` is at least the price.
class PoissonWtpDemand final : public DemandEnvironment {
public:
    explicit PoissonWtpDemand(double arrival_rate = 5.0, double sigma = 30.0);

    double purchase_probability(double price) const;

    double sample(double price, Rng& rng) const override;
    double mean_demand(double price) const override;
    bool supports_integer_demand() const override { return true; }
    double demand_pmf(int k, double price) const override;
    std::string name() const override { return "poisson_wtp"; }

private:
    double arrival_rate_;
    double sigma_;
};

/// round(max(0, −0.02(p − 60)² + ε)/10), ε ~ Uniform(0, 50).
class ScarcityDemand final : public DemandEnvironment {
public:
    double sample(double price, Rng& rng) const override;
    double mean_demand(double price) const override;
    bool supports_integer_demand() const override { return true; }
    double demand_pmf(int k, double price) const override;
    std::string name() const override { return "scarcity"; }
};

/// Distribution of the realized sale q = min(s, D(p)) over q ∈ {0..s}:
/// P(q) = Pr(D = q) for q < s and P(s) = Pr(D ≥ s). Throws Unsupported for
/// continuous-demand environments.
std::vector<double> true_sale_kernel(const DemandEnvironment& env, int inventory, double price);

}  // namespace gp_pricer
