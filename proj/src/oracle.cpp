#include "prosumer/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "prosumer/errors.hpp"

namespace prosumer {

namespace {

constexpr int kFixedPointIterations = 100;
constexpr double kStaticBoundFactor = 1e3;

double utility_term(const UtilitySpec& u, int n, Program program, double q) {
    return program == Program::True ? u.value(q) : modified_utility(u, n, q);
}

double program_marginal(const UtilitySpec& u, int n, Program program, double q) {
    return program == Program::True ? u.deriv(q) : modified_utility_deriv(u, n, q);
}

// Maximum of f on [a, b] by golden-section search.
template <class F>
double golden_section_max(F&& f, double a, double b) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a));
         ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 >= f2 ? x1 : x2;
}

}  // namespace

double strategic_payoff(std::size_t i, std::span<const double> thetas, const MarketConfig& config) {
    if (i >= thetas.size()) throw DomainError("strategic_payoff: prosumer index out of range");
    const double total = std::accumulate(thetas.begin(), thetas.end(), 0.0);
    if (!(total < 0.0)) throw DomainError("strategic_payoff: price is not positive (bids sum to >= 0)");
    const double price = -total / (static_cast<double>(thetas.size()) * config.d_min);
    const double q = config.d_min + thetas[i] / price;
    return config.utility(i).value(q) - price * q;
}

BestResponseResult best_response(std::size_t i, std::span<const double> thetas, const MarketConfig& config,
                                 int grid_points) {
    if (i >= thetas.size()) throw DomainError("best_response: prosumer index out of range");
    if (grid_points < 3) throw DomainError("best_response: grid needs at least 3 points");
    const double rivals = std::accumulate(thetas.begin(), thetas.end(), 0.0) - thetas[i];
    if (!(rivals < 0.0))
        throw UnboundedPayoff("best_response: rivals' bids sum to a non-negative value; payoff has no maximum");

    std::vector<double> profile(thetas.begin(), thetas.end());
    auto payoff = [&](double theta) {
        profile[i] = theta;
        return strategic_payoff(i, profile, config);
    };
    const double n_d = config.n_prosumers * config.d_min;
    auto price_at = [&](double theta) { return -(theta + rivals) / n_d; };

    BestResponseResult r;
    r.prosumer_index = i;
    r.theta_upper = -rivals - config.eps_price;

    // theta >= p(theta)(-s_max - d_min) depends on theta through the price.
    double lower = r.theta_upper;
    bool converged = false;
    for (int it = 0; it < kFixedPointIterations; ++it) {
        const double next = price_at(lower) * (-config.s_max - config.d_min);
        if (std::abs(next - lower) <= 1e-14 * std::max(1.0, std::abs(next))) {
            lower = next;
            converged = true;
            break;
        }
        lower = next;
    }
    if (!converged) {
        lower = kStaticBoundFactor * rivals;
        r.static_lower_bound = true;
    }
    r.theta_lower = lower;

    const double step = (r.theta_upper - lower) / (grid_points - 1);
    int best_k = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_points; ++k) {
        const double theta = k == grid_points - 1 ? r.theta_upper : lower + k * step;
        const double v = payoff(theta);
        if (v > best_value) {
            best_value = v;
            best_k = k;
        }
    }
    const double a = lower + std::max(0, best_k - 1) * step;
    const double b = best_k + 1 >= grid_points ? r.theta_upper : lower + (best_k + 1) * step;
    double theta_star = golden_section_max(payoff, a, b);
    double value_star = payoff(theta_star);
    const double grid_theta = best_k == grid_points - 1 ? r.theta_upper : lower + best_k * step;
    if (best_value > value_star) {
        theta_star = grid_theta;
        value_star = best_value;
    }

    r.theta_star = theta_star;
    r.payoff_star = value_star;
    r.payoff_at_candidate = payoff(thetas[i]);
    r.gap = r.payoff_star - r.payoff_at_candidate;
    return r;
}

double program_objective(const MarketConfig& config, Program program, std::span<const double> quantities) {
    if (quantities.size() != static_cast<std::size_t>(config.n_prosumers))
        throw DomainError("program_objective: quantity vector length does not match n_prosumers");
    double total = 0.0;
    for (std::size_t i = 0; i < quantities.size(); ++i) {
        total += utility_term(config.utility(i), config.n_prosumers, program, quantities[i]);
    }
    return total;
}

Allocation brute_force_program(const MarketConfig& config, Program program, int grid_points, int refinements) {
    config.validate();
    const int n = config.n_prosumers;
    if (n > 3) throw TooLarge("brute_force_program: at most 3 prosumers can be enumerated");
    if (grid_points < 1000) throw DomainError("brute_force_program: need at least 1000 grid points per dimension");

    const auto utilities = config.utilities();
    const double lo = -config.s_max;
    const double hi = config.q_upper();
    auto term = [&](int i, double q) { return utility_term(utilities[i], n, program, q); };
    auto feasible = [&](double q) { return q >= lo && q <= hi; };
    auto grid = [&](double a, double b, int k) { return k == grid_points - 1 ? b : a + (b - a) * k / (grid_points - 1); };

    std::vector<double> best(n, 0.0);
    // Box for the free coordinates (all but the last prosumer).
    std::vector<double> box_lo(n - 1, lo);
    std::vector<double> box_hi(n - 1, hi);

    for (int level = 0; level <= refinements; ++level) {
        double best_value = -std::numeric_limits<double>::infinity();
        if (n == 2) {
            for (int k = 0; k < grid_points; ++k) {
                const double q1 = grid(box_lo[0], box_hi[0], k);
                const double q2 = -q1;
                if (!feasible(q2)) continue;
                const double v = term(0, q1) + term(1, q2);
                if (v > best_value) {
                    best_value = v;
                    best = {q1, q2};
                }
            }
        } else {
            // q2 is gridded over its feasible range given q1, so allocations
            // with the third prosumer on a bound are enumerated exactly.
            for (int a = 0; a < grid_points; ++a) {
                const double q1 = grid(box_lo[0], box_hi[0], a);
                const double f1 = term(0, q1);
                const double a2 = std::max(box_lo[1], -q1 - hi);
                const double b2 = std::min(box_hi[1], -q1 - lo);
                if (a2 > b2) continue;
                for (int b = 0; b < grid_points; ++b) {
                    const double q2 = grid(a2, b2, b);
                    const double q3 = std::clamp(-q1 - q2, lo, hi);
                    const double v = f1 + term(1, q2) + term(2, q3);
                    if (v > best_value) {
                        best_value = v;
                        best = {q1, q2, q3};
                    }
                }
            }
        }
        if (!std::isfinite(best_value)) throw DomainError("brute_force_program: no feasible grid point");
        for (int d = 0; d < n - 1; ++d) {
            const double half = 2.0 * (box_hi[d] - box_lo[d]) / (grid_points - 1);
            box_lo[d] = std::max(lo, best[d] - half);
            box_hi[d] = std::min(hi, best[d] + half);
        }
    }

    Allocation out;
    out.quantities = best;
    out.kkt_residuals.assign(n, 0.0);
    out.at_capacity.resize(n);
    double price_sum = 0.0;
    int interior = 0;
    for (int i = 0; i < n; ++i) {
        out.at_capacity[i] = std::abs(best[i] - lo) <= config.tol_root;
        if (!out.at_capacity[i]) {
            price_sum += program_marginal(utilities[i], n, program, best[i]);
            ++interior;
        }
    }
    out.dual_price = interior > 0 ? price_sum / interior : 0.0;
    for (int i = 0; i < n; ++i) {
        if (!out.at_capacity[i])
            out.kkt_residuals[i] = std::abs(program_marginal(utilities[i], n, program, best[i]) - out.dual_price);
    }
    return out;
}

}  // namespace prosumer
