#pragma once

#include <span>
#include <vector>

#include "prosumer/market.hpp"

namespace prosumer {

/// Per-prosumer existence/uniqueness checks evaluated at one candidate
/// equilibrium (bids plus the quantities they induce).
struct ConditionReport {
    /// sum_{j != i} theta_j < 0. Fails for everyone at theta == 0.
    std::vector<bool> rivals_negative;
    /// Bid lies in the interval where the strategic payoff is concave in
    /// theta_i and the price stays at least eps above zero.
    std::vector<bool> bid_interval;
    /// q_i >= -(N-1) d_min - S'(q_i)/S''(q_i).
    std::vector<bool> concavity_bound;
    /// The same bound specialised to the exponential family:
    /// q_i >= 5 d_min / beta_i - (N-1) d_min.
    std::vector<bool> exponential_bound;
    /// S~''(q_i) <= 0, evaluated directly.
    std::vector<bool> curvature;
    bool all_ok = false;
};

std::vector<bool> check_rivals_negative(std::span<const double> thetas);

/// Both sides of the admissible bid interval; `quantities` must be the
/// quantities induced by `thetas` at their clearing price.
struct BidIntervalCheck {
    double lower = 0.0;  // payoff-concavity bound
    double upper = 0.0;  // -sum_{j != i} theta_j - eps
    bool lower_ok = false;
    bool upper_ok = false;
    bool ok() const { return lower_ok && upper_ok; }
};

std::vector<BidIntervalCheck> bid_interval_bounds(std::span<const double> thetas, const MarketConfig& config,
                                                  std::span<const double> quantities);

std::vector<bool> check_bid_interval(std::span<const double> thetas, const MarketConfig& config,
                                     std::span<const double> quantities);

std::vector<bool> check_concavity_bound(std::span<const double> quantities, const MarketConfig& config);

std::vector<bool> check_exponential_bound(std::span<const double> quantities, const MarketConfig& config);

/// 5 d_min / beta_i - (N-1) d_min for each prosumer.
std::vector<double> exponential_thresholds(const MarketConfig& config);

std::vector<bool> check_curvature(std::span<const double> quantities, const MarketConfig& config);

ConditionReport check_conditions(std::span<const double> thetas, std::span<const double> quantities,
                                 const MarketConfig& config);

}  // namespace prosumer
