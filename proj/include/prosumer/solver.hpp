#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "prosumer/market.hpp"

namespace prosumer {

/// Which welfare program is maximized: the true utilities (competitive
/// equilibrium) or the modified utilities (Nash equilibrium allocation).
enum class Program { True, Modified };

std::string_view to_string(Program program);

/// q with S'(q) == eta, clipped below at -s_max.
double marginal_inverse_true(const UtilitySpec& spec, double eta, double s_max);

struct ModifiedResponse {
    double quantity = 0.0;
    /// The modified utility is not concave at `quantity`.
    bool non_concave = false;
};

/// Maximizer of S~(q) - eta q over [-s_max, q_upper].
///
/// Right of the peak of S~' the marginal is strictly decreasing and the
/// stationary point is found by safeguarded Newton. When -s_max lies left of
/// the peak the Lagrangian is compared across every stationary point and both
/// endpoints; ties go to the larger q.
ModifiedResponse marginal_inverse_modified(const UtilitySpec& spec, int n, double eta, double s_max,
                                           double q_upper);

/// Interval of the balance multiplier on which the excess demand changes sign.
struct DualBracket {
    double eta_lo = 0.0;
    double eta_hi = 0.0;
    double excess_lo = 0.0;  // >= 0
    double excess_hi = 0.0;  // <= 0
};

struct SolveResult {
    Program program = Program::True;
    Allocation allocation;
    std::vector<double> thetas;
    /// mu for the competitive program, p(theta~) for the modified one.
    double price = 0.0;
    /// True welfare sum_i S_i(q_i), whatever program produced q.
    double welfare_true = 0.0;
    bool converged = false;
    int iterations = 0;
    /// sum_i q_i at the returned multiplier.
    double excess = 0.0;
    DualBracket bracket;
    /// Set when some prosumer's modified utility is not concave at its
    /// quantity; the first-order solution is returned but carries no
    /// equilibrium guarantee.
    bool non_concave = false;
    std::vector<bool> non_concave_at;
};

/// Excess demand sum_i q_i(eta) of the per-prosumer responses.
double excess_demand(const MarketConfig& config, Program program, double eta);

/// Closed-form starting bracket widened until the excess changes sign.
/// Throws BracketFailure with the last evaluated values.
DualBracket find_bracket(const MarketConfig& config, Program program);

/// Maximizes sum_i S_i (True) or sum_i S~_i (Modified) subject to balance and
/// supply capacity by bisection on the balance multiplier.
SolveResult solve_dual(const MarketConfig& config, Program program);

/// theta_i = price (q_i - d_min).
std::vector<double> recover_bids(const Allocation& allocation, double d_min);

/// sum_i S_i(q_i) with the true utilities.
double welfare(const MarketConfig& config, std::span<const double> quantities);

}  // namespace prosumer
