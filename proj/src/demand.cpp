#include "gp_pricer/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gp_pricer/errors.hpp"

namespace gp_pricer {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// E[max(0, X)] for X ~ N(m, s²).
double clamped_normal_mean(double m, double s) {
    if (s <= 0.0) {
        return std::max(m, 0.0);
    }
    const double z = m / s;
    return m * normal_cdf(z) + s * normal_pdf(z);
}

double poisson_pmf(int k, double mean) {
    if (k < 0) {
        return 0.0;
    }
    if (mean <= 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    const double kd = static_cast<double>(k);
    return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

double bernoulli_pmf(int k, double prob) {
    if (k == 0) {
        return 1.0 - prob;
    }
    return k == 1 ? prob : 0.0;
}

double checked_price(double price) {
    if (!std::isfinite(price)) {
        throw DomainError("price must be finite");
    }
    return price;
}

}  // namespace

double DemandEnvironment::demand_pmf(int, double) const {
    throw Unsupported("environment '" + name() + "' has no exact integer demand distribution");
}

// ---------------------------------------------------------------------------
// Polynomial

PolynomialDemand::PolynomialDemand(std::vector<double> coefficients, double noise_scale, double price_low,
                                   double price_high, int scan_points)
    : coefficients_(std::move(coefficients)), noise_std_(0.0) {
    if (coefficients_.empty()) {
        throw std::invalid_argument("polynomial demand needs at least one coefficient");
    }
    if (!(noise_scale >= 0.0 && noise_scale <= 1.0)) {
        throw std::invalid_argument("polynomial noise scale must lie in [0, 1]");
    }
    if (!(price_high > price_low) || scan_points < 2) {
        throw std::invalid_argument("polynomial demand needs a valid scan domain");
    }
    double max_abs = 0.0;
    for (int i = 0; i < scan_points; ++i) {
        const double p = price_low + (price_high - price_low) * i / (scan_points - 1);
        max_abs = std::max(max_abs, std::abs(deterministic(p)));
    }
    noise_std_ = noise_scale * max_abs;
}

double PolynomialDemand::deterministic(double price) const {
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
        acc = acc * price + *it;
    }
    return acc;
}

double PolynomialDemand::sample(double price, Rng& rng) const {
    double d = deterministic(checked_price(price));
    if (noise_std_ > 0.0) {
        d += std::normal_distribution<double>(0.0, noise_std_)(rng);
    }
    return std::max(d, 0.0);
}

double PolynomialDemand::mean_demand(double price) const {
    return clamped_normal_mean(deterministic(checked_price(price)), noise_std_);
}

// ---------------------------------------------------------------------------
// Moment-structured

double apply_link(Link link, double x) {
    switch (link) {
        case Link::identity:
            return x;
        case Link::exp:
            return std::exp(x);
        case Link::logistic:
            return logistic(x);
    }
    return x;
}

MomentStructuredDemand::MomentStructuredDemand(DemandFamily family, Link link, double a0, double a1, double sigma)
    : family_(family), link_(link), a0_(a0), a1_(a1), sigma_(sigma) {
    if (!std::isfinite(a0) || !std::isfinite(a1) || !(sigma >= 0.0)) {
        throw std::invalid_argument("moment-structured demand needs finite a0, a1 and sigma >= 0");
    }
}

double MomentStructuredDemand::link_mean(double price) const {
    const double m = apply_link(link_, a0_ + a1_ * checked_price(price));
    if (family_ == DemandFamily::poisson && !(m > 0.0)) {
        throw InvalidLink("Poisson mean must be positive");
    }
    if (family_ == DemandFamily::bernoulli && !(m > 0.0 && m < 1.0)) {
        throw InvalidLink("Bernoulli probability must lie in (0, 1)");
    }
    return m;
}

double MomentStructuredDemand::sample(double price, Rng& rng) const {
    const double m = link_mean(price);
    switch (family_) {
        case DemandFamily::normal: {
            const double d = sigma_ > 0.0 ? std::normal_distribution<double>(m, sigma_)(rng) : m;
            return std::max(d, 0.0);
        }
        case DemandFamily::poisson:
            return static_cast<double>(std::poisson_distribution<long long>(m)(rng));
        case DemandFamily::bernoulli:
            return std::bernoulli_distribution(m)(rng) ? 1.0 : 0.0;
    }
    return 0.0;
}

double MomentStructuredDemand::mean_demand(double price) const {
    const double m = link_mean(price);
    return family_ == DemandFamily::normal ? clamped_normal_mean(m, sigma_) : m;
}

double MomentStructuredDemand::demand_pmf(int k, double price) const {
    switch (family_) {
        case DemandFamily::poisson:
            return poisson_pmf(k, link_mean(price));
        case DemandFamily::bernoulli:
            return bernoulli_pmf(k, link_mean(price));
        case DemandFamily::normal:
            break;
    }
    return DemandEnvironment::demand_pmf(k, price);
}

std::string MomentStructuredDemand::name() const {
    switch (family_) {
        case DemandFamily::normal:
            return "moment_normal";
        case DemandFamily::poisson:
            return "moment_poisson";
        case DemandFamily::bernoulli:
            return "moment_bernoulli";
    }
    return "moment";
}

// ---------------------------------------------------------------------------
// Finite Bernoulli

double FiniteBernoulliDemand::probability(double price) const {
    checked_price(price);
    switch (variant_) {
        case Variant::logit:
            return logistic(2.0 - 0.4 * price);
        case Variant::step_misspec:
            return price <= 10.0 ? 0.8 : 0.2;
        case Variant::log_complex:
            if (!(price > 0.0 && price < 20.0)) {
                throw DomainError("log_complex demand is defined for prices in (0, 20)");
            }
            return logistic(2.0 - 0.4 * price + 0.1 * std::log(price / (20.0 - price)));
    }
    return 0.0;
}

double FiniteBernoulliDemand::sample(double price, Rng& rng) const {
    return std::bernoulli_distribution(probability(price))(rng) ? 1.0 : 0.0;
}

double FiniteBernoulliDemand::demand_pmf(int k, double price) const { return bernoulli_pmf(k, probability(price)); }

std::string FiniteBernoulliDemand::name() const {
    switch (variant_) {
        case Variant::logit:
            return "bernoulli_logit";
        case Variant::step_misspec:
            return "bernoulli_step_misspec";
        case Variant::log_complex:
            return "bernoulli_log_complex";
    }
    return "bernoulli";
}

// ---------------------------------------------------------------------------
// Poisson arrivals with exponential willingness to pay

PoissonWtpDemand::PoissonWtpDemand(double arrival_rate, double sigma) : arrival_rate_(arrival_rate), sigma_(sigma) {
    if (!(arrival_rate > 0.0) || !(sigma > 0.0)) {
        throw std::invalid_argument("Poisson WTP demand needs positive arrival rate and sigma");
    }
}

double PoissonWtpDemand::purchase_probability(double price) const {
    if (!(checked_price(price) >= 0.0)) {
        throw DomainError("price must be >= 0");
    }
    return std::exp(-price * std::numbers::ln2 / sigma_);
}

double PoissonWtpDemand::sample(double price, Rng& rng) const {
    const double buy = purchase_probability(price);
    const long long arrivals = std::poisson_distribution<long long>(arrival_rate_)(rng);
    if (arrivals == 0) {
        return 0.0;
    }
    return static_cast<double>(std::binomial_distribution<long long>(arrivals, buy)(rng));
}

double PoissonWtpDemand::mean_demand(double price) const { return arrival_rate_ * purchase_probability(price); }

double PoissonWtpDemand::demand_pmf(int k, double price) const { return poisson_pmf(k, mean_demand(price)); }

// ---------------------------------------------------------------------------
// Scarcity

namespace {

constexpr double kScarcityNoiseWidth = 50.0;

// Rounded demand is round(max(0, u)) with u ~ Uniform(lo, lo + 5), lo ≤ 0.
double scarcity_lower(double price) {
    const double a = -0.02 * (price - 60.0) * (price - 60.0);
    return a / 10.0;
}

}  // namespace

double ScarcityDemand::sample(double price, Rng& rng) const {
    if (!(checked_price(price) >= 0.0)) {
        throw DomainError("price must be >= 0");
    }
    const double eps = std::uniform_real_distribution<double>(0.0, kScarcityNoiseWidth)(rng);
    const double a = -0.02 * (price - 60.0) * (price - 60.0);
    return std::round(std::max(0.0, a + eps) / 10.0);
}

double ScarcityDemand::demand_pmf(int k, double price) const {
    if (!(checked_price(price) >= 0.0)) {
        throw DomainError("price must be >= 0");
    }
    if (k < 0) {
        return 0.0;
    }
    const double lo = scarcity_lower(price);
    const double width = kScarcityNoiseWidth / 10.0;
    const double hi = lo + width;
    // round(max(0,u)) = 0 iff u < 0.5; = k iff u ∈ [k − ½, k + ½).
    const double a = k == 0 ? -std::numeric_limits<double>::infinity() : k - 0.5;
    const double b = k + 0.5;
    const double overlap = std::max(0.0, std::min(b, hi) - std::max(a, lo));
    return overlap / width;
}

double ScarcityDemand::mean_demand(double price) const {
    double mean = 0.0;
    for (int k = 1; k <= 5; ++k) {
        mean += k * demand_pmf(k, price);
    }
    return mean;
}

// ---------------------------------------------------------------------------

std::vector<double> true_sale_kernel(const DemandEnvironment& env, int inventory, double price) {
    if (!env.supports_integer_demand()) {
        throw Unsupported("environment '" + env.name() + "' has no exact sale kernel");
    }
    if (inventory < 0) {
        throw std::invalid_argument("inventory must be >= 0");
    }
    std::vector<double> probs(static_cast<std::size_t>(inventory) + 1, 0.0);
    double below = 0.0;
    for (int q = 0; q < inventory; ++q) {
        probs[static_cast<std::size_t>(q)] = env.demand_pmf(q, price);
        below += probs[static_cast<std::size_t>(q)];
    }
    probs.back() = std::max(0.0, 1.0 - below);
    return probs;
}

}  // namespace gp_pricer
