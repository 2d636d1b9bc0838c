#include "prosumer/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "prosumer/errors.hpp"

namespace prosumer {

std::optional<double> UtilitySpec::antideriv(double) const { return std::nullopt; }

double UtilitySpec::inverse_deriv(double eta) const {
    if (!(eta > 0.0)) throw DomainError("inverse_deriv: eta must be positive");
    double width = std::max(1.0, d_min());
    double lo = -width;
    double hi = width;
    for (int i = 0; i < 200 && deriv(lo) < eta; ++i) lo -= (width *= 2.0);
    width = std::max(1.0, d_min());
    for (int i = 0; i < 200 && deriv(hi) > eta; ++i) hi += (width *= 2.0);
    if (deriv(lo) < eta || deriv(hi) > eta)
        throw DomainError("inverse_deriv: marginal does not reach eta");
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (deriv(mid) > eta ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::optional<double> UtilitySpec::modified_peak(int) const { return std::nullopt; }

bool UtilitySpec::saturates(double) const { return false; }

ExponentialUtility::ExponentialUtility(double beta, double d_min)
    : beta_(beta), d_min_(d_min), rate_(beta / (5.0 * d_min)), floor_(std::exp(-beta / 5.0)) {
    if (!(beta > 0.0) || !(d_min > 0.0))
        throw DomainError("ExponentialUtility: beta and d_min must be positive");
}

double ExponentialUtility::decay(double q) const {
    return std::exp(std::clamp(-rate_ * q, -kExponentClamp, kExponentClamp));
}

double ExponentialUtility::value(double q) const {
    // Exact zero at the inelastic demand rather than a rounding residue.
    if (q == d_min_) return 0.0;
    return floor_ - decay(q);
}

double ExponentialUtility::deriv(double q) const { return rate_ * decay(q); }

double ExponentialUtility::deriv2(double q) const { return -rate_ * rate_ * decay(q); }

std::optional<double> ExponentialUtility::antideriv(double q) const {
    return floor_ * q + decay(q) / rate_;
}

double ExponentialUtility::inverse_deriv(double eta) const {
    if (!(eta > 0.0)) throw DomainError("inverse_deriv: eta must be positive");
    return -std::log(eta / rate_) / rate_;
}

std::optional<double> ExponentialUtility::modified_peak(int n) const {
    return 1.0 / rate_ - (n - 1) * d_min_;
}

bool ExponentialUtility::saturates(double q) const { return std::abs(rate_ * q) > kExponentClamp; }

double default_eps_price(int n_prosumers, double d_min) { return 1e-9 * n_prosumers * d_min; }

MarketConfig MarketConfig::make(double d_min, double s_max, std::vector<double> betas) {
    MarketConfig config;
    config.n_prosumers = static_cast<int>(betas.size());
    config.d_min = d_min;
    config.s_max = s_max;
    config.betas = std::move(betas);
    config.eps_price = default_eps_price(config.n_prosumers, d_min);
    config.validate();
    return config;
}

void MarketConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid market config: " + what); };
    if (n_prosumers < 2) fail("n_prosumers must be at least 2");
    if (!(d_min > 0.0) || !std::isfinite(d_min)) fail("d_min must be positive");
    if (!(s_max > 0.0) || !std::isfinite(s_max)) fail("s_max must be positive");
    if (betas.size() != static_cast<std::size_t>(n_prosumers)) {
        std::ostringstream msg;
        msg << "betas has " << betas.size() << " entries, expected " << n_prosumers;
        fail(msg.str());
    }
    for (double b : betas)
        if (!(b > 0.0) || !std::isfinite(b)) fail("every beta must be positive");
    if (!(eps_price > 0.0)) fail("eps_price must be positive");
    if (!(tol_root > 0.0)) fail("tol_root must be positive");
    if (!(tol_kkt > 0.0)) fail("tol_kkt must be positive");
}

ExponentialUtility MarketConfig::utility(std::size_t i) const { return {betas.at(i), d_min}; }

std::vector<ExponentialUtility> MarketConfig::utilities() const {
    std::vector<ExponentialUtility> out;
    out.reserve(betas.size());
    for (double b : betas) out.emplace_back(b, d_min);
    return out;
}

double quantity_from_bid(double theta, double price, double d_min) {
    if (price < 0.0) throw DomainError("quantity_from_bid: negative price");
    if (price == 0.0) {
        if (theta != 0.0) throw DomainError("quantity_from_bid: nonzero bid at zero price");
        return d_min;
    }
    return d_min + theta / price;
}

double clearing_price(std::span<const double> thetas, double d_min) {
    double total = std::accumulate(thetas.begin(), thetas.end(), 0.0);
    if (total > 0.0) throw InvalidBids("clearing_price: bids sum to a positive value");
    if (total == 0.0) return 0.0;
    return -total / (static_cast<double>(thetas.size()) * d_min);
}

BidProfile clear_market(std::span<const double> thetas, double d_min) {
    BidProfile profile;
    profile.thetas.assign(thetas.begin(), thetas.end());
    profile.price = clearing_price(thetas, d_min);
    profile.quantities.reserve(thetas.size());
    for (double t : thetas) profile.quantities.push_back(quantity_from_bid(t, profile.price, d_min));
    return profile;
}

double integrate_utility(const UtilitySpec& spec, double a, double b) {
    auto fa = spec.antideriv(a);
    auto fb = spec.antideriv(b);
    if (fa && fb) return *fb - *fa;
    if (a == b) return 0.0;
    auto f = [&spec](double z) { return spec.value(z); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-10);
}

namespace {

double misreport_scale(const UtilitySpec& spec, int n) {
    if (n < 2) throw DomainError("modified utility needs at least two prosumers");
    return (n - 1) * spec.d_min();
}

}  // namespace

double modified_utility(const UtilitySpec& spec, int n, double q) {
    const double m = misreport_scale(spec, n);
    return (1.0 + q / m) * spec.value(q) - integrate_utility(spec, spec.d_min(), q) / m;
}

double modified_utility_deriv(const UtilitySpec& spec, int n, double q) {
    const double m = misreport_scale(spec, n);
    return (1.0 + q / m) * spec.deriv(q);
}

double modified_utility_deriv2(const UtilitySpec& spec, int n, double q) {
    const double m = misreport_scale(spec, n);
    return spec.deriv2(q) * (1.0 + q / m) + spec.deriv(q) / m;
}

}  // namespace prosumer
