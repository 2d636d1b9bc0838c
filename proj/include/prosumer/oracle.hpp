#pragma once

#include <cstddef>
#include <span>

#include "prosumer/market.hpp"
#include "prosumer/solver.hpp"

namespace prosumer {

// Slow verifiers that share nothing with the dual solver beyond the utility
// functions: a best-response search over the price-anticipating payoff and a
// brute-force grid over balanced allocations.

/// S_i(Q(theta_i, p(theta))) - p(theta) Q(theta_i, p(theta)).
/// Throws DomainError when sum(theta) >= 0 (price not positive).
double strategic_payoff(std::size_t i, std::span<const double> thetas, const MarketConfig& config);

struct BestResponseResult {
    std::size_t prosumer_index = 0;
    double theta_star = 0.0;
    double payoff_star = 0.0;
    double payoff_at_candidate = 0.0;
    /// payoff_star - payoff_at_candidate; negative only by search error.
    double gap = 0.0;
    double theta_lower = 0.0;
    double theta_upper = 0.0;
    /// The capacity fixed point did not converge and a wide static lower
    /// bound was searched instead.
    bool static_lower_bound = false;
};

inline constexpr int kBestResponseGrid = 100000;

/// Maximizes prosumer i's payoff over theta_i with the rivals' bids in
/// `thetas` held fixed. The candidate bid is thetas[i]. The search interval
/// runs from the capacity bound theta >= p(theta)(-s_max - d_min) up to the
/// rivals' sum minus eps; a dense grid locates the best bracket, golden-section
/// search refines it. Throws UnboundedPayoff when the rivals' bids sum to a
/// non-negative value.
BestResponseResult best_response(std::size_t i, std::span<const double> thetas, const MarketConfig& config,
                                 int grid_points = kBestResponseGrid);

/// Objective of the chosen program: sum_i S_i(q_i) or sum_i S~_i(q_i).
double program_objective(const MarketConfig& config, Program program, std::span<const double> quantities);

/// Exhaustive grid maximization of the program over
/// {sum q = 0, -s_max <= q_i <= (N-1) s_max} for N in {2, 3}: one grid of
/// `grid_points` per free dimension, then `refinements` re-grids of the same
/// density around the incumbent. Throws TooLarge for N > 3.
Allocation brute_force_program(const MarketConfig& config, Program program, int grid_points, int refinements = 4);

}  // namespace prosumer
