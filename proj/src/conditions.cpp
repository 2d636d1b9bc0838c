#include "prosumer/conditions.hpp"

#include <algorithm>
#include <numeric>

#include "prosumer/errors.hpp"

namespace prosumer {

namespace {

void require_length(std::span<const double> v, const MarketConfig& config, const char* what) {
    if (v.size() != static_cast<std::size_t>(config.n_prosumers))
        throw DomainError(std::string(what) + ": length does not match n_prosumers");
}

bool all_true(const std::vector<bool>& v) {
    return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

}  // namespace

std::vector<bool> check_rivals_negative(std::span<const double> thetas) {
    const double total = std::accumulate(thetas.begin(), thetas.end(), 0.0);
    const bool all_zero = std::all_of(thetas.begin(), thetas.end(), [](double t) { return t == 0.0; });
    std::vector<bool> out;
    out.reserve(thetas.size());
    for (double t : thetas) out.push_back(!all_zero && total - t < 0.0);
    return out;
}

std::vector<BidIntervalCheck> bid_interval_bounds(std::span<const double> thetas, const MarketConfig& config,
                                                  std::span<const double> quantities) {
    require_length(thetas, config, "bid_interval_bounds");
    require_length(quantities, config, "bid_interval_bounds");
    const double total = std::accumulate(thetas.begin(), thetas.end(), 0.0);
    const double half_scale = 0.5 * config.n_prosumers * config.d_min;
    std::vector<BidIntervalCheck> out(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const auto u = config.utility(i);
        const double slope = u.deriv(quantities[i]);
        if (slope == 0.0) throw DomainError("bid_interval_bounds: vanishing marginal utility");
        const double rivals = total - thetas[i];
        auto& c = out[i];
        c.lower = -rivals * (half_scale * u.deriv2(quantities[i]) / slope + 1.0);
        c.upper = -rivals - config.eps_price;
        // With a non-negative rival sum the interval is empty.
        c.lower_ok = rivals < 0.0 && c.lower <= thetas[i];
        c.upper_ok = rivals < 0.0 && thetas[i] <= c.upper;
    }
    return out;
}

std::vector<bool> check_bid_interval(std::span<const double> thetas, const MarketConfig& config,
                                     std::span<const double> quantities) {
    std::vector<bool> out;
    for (const auto& c : bid_interval_bounds(thetas, config, quantities)) out.push_back(c.ok());
    return out;
}

std::vector<bool> check_concavity_bound(std::span<const double> quantities, const MarketConfig& config) {
    require_length(quantities, config, "check_concavity_bound");
    const double shift = (config.n_prosumers - 1) * config.d_min;
    std::vector<bool> out;
    out.reserve(quantities.size());
    for (std::size_t i = 0; i < quantities.size(); ++i) {
        const auto u = config.utility(i);
        const double curv = u.deriv2(quantities[i]);
        if (curv == 0.0) throw DomainError("check_concavity_bound: vanishing second derivative");
        out.push_back(quantities[i] >= -shift - u.deriv(quantities[i]) / curv);
    }
    return out;
}

std::vector<double> exponential_thresholds(const MarketConfig& config) {
    std::vector<double> out;
    out.reserve(config.betas.size());
    for (double b : config.betas) out.push_back(5.0 * config.d_min / b - config.d_min * (config.n_prosumers - 1));
    return out;
}

std::vector<bool> check_exponential_bound(std::span<const double> quantities, const MarketConfig& config) {
    require_length(quantities, config, "check_exponential_bound");
    const auto thresholds = exponential_thresholds(config);
    std::vector<bool> out;
    out.reserve(quantities.size());
    for (std::size_t i = 0; i < quantities.size(); ++i) out.push_back(quantities[i] >= thresholds[i]);
    return out;
}

std::vector<bool> check_curvature(std::span<const double> quantities, const MarketConfig& config) {
    require_length(quantities, config, "check_curvature");
    std::vector<bool> out;
    out.reserve(quantities.size());
    for (std::size_t i = 0; i < quantities.size(); ++i) {
        out.push_back(modified_utility_deriv2(config.utility(i), config.n_prosumers, quantities[i]) <= 0.0);
    }
    return out;
}

ConditionReport check_conditions(std::span<const double> thetas, std::span<const double> quantities,
                                 const MarketConfig& config) {
    ConditionReport r;
    r.rivals_negative = check_rivals_negative(thetas);
    r.bid_interval = check_bid_interval(thetas, config, quantities);
    r.concavity_bound = check_concavity_bound(quantities, config);
    r.exponential_bound = check_exponential_bound(quantities, config);
    r.curvature = check_curvature(quantities, config);
    r.all_ok = all_true(r.rivals_negative) && all_true(r.bid_interval) && all_true(r.concavity_bound) &&
               all_true(r.exponential_bound) && all_true(r.curvature);
    return r;
}

}  // namespace prosumer
