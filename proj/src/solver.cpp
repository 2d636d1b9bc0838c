#include "prosumer/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "prosumer/errors.hpp"

namespace prosumer {

namespace {

constexpr int kMaxNewton = 200;
constexpr int kMaxBisection = 400;
constexpr int kBracketWidenings = 40;
constexpr int kScanPoints = 512;

double lagrangian(const UtilitySpec& spec, int n, double eta, double q) {
    return modified_utility(spec, n, q) - eta * q;
}

// Root of S~'(q) = eta on [lo, hi] where S~' is strictly decreasing.
double decreasing_branch_root(const UtilitySpec& spec, int n, double eta, double lo, double hi) {
    auto h = [&](double q) { return modified_utility_deriv(spec, n, q) - eta; };
    if (h(lo) <= 0.0) return lo;
    if (h(hi) >= 0.0) return hi;
    // The unmodified inverse is a good start: the multiplier is close to 1 near q = 0.
    double x = std::clamp(spec.inverse_deriv(eta), lo, hi);
    if (x <= lo || x >= hi) x = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxNewton; ++it) {
        const double hx = h(x);
        if (hx == 0.0) return x;
        (hx > 0.0 ? lo : hi) = x;
        const double slope = modified_utility_deriv2(spec, n, x);
        double next = slope < 0.0 ? x - hx / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return next;
        x = next;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

// Bisection on a sign change of S~' - eta inside [lo, hi].
double bisect_marginal(const UtilitySpec& spec, int n, double eta, double lo, double hi) {
    const double sign_lo = modified_utility_deriv(spec, n, lo) - eta;
    for (int it = 0; it < kMaxBisection; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double hm = modified_utility_deriv(spec, n, mid) - eta;
        ((hm > 0.0) == (sign_lo > 0.0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct Candidate {
    double q;
    double value;
};

// Larger Lagrangian wins; exact ties go to the larger quantity.
double best_candidate(std::span<const Candidate> candidates) {
    Candidate best = candidates.front();
    for (const Candidate& c : candidates.subspan(1)) {
        if (c.value > best.value || (c.value == best.value && c.q > best.q)) best = c;
    }
    return best.q;
}

ModifiedResponse enumerate_response(const UtilitySpec& spec, int n, double eta, double s_max, double q_upper) {
    // No closed-form peak: scan for sign changes and compare every stationary point.
    std::vector<Candidate> candidates;
    auto push = [&](double q) { candidates.push_back({q, lagrangian(spec, n, eta, q)}); };
    push(-s_max);
    push(q_upper);
    const double step = (q_upper + s_max) / kScanPoints;
    double prev_q = -s_max;
    double prev_h = modified_utility_deriv(spec, n, prev_q) - eta;
    for (int k = 1; k <= kScanPoints; ++k) {
        const double q = k == kScanPoints ? q_upper : -s_max + k * step;
        const double h = modified_utility_deriv(spec, n, q) - eta;
        if ((prev_h > 0.0) != (h > 0.0)) push(bisect_marginal(spec, n, eta, prev_q, q));
        prev_q = q;
        prev_h = h;
    }
    const double q = best_candidate(candidates);
    return {q, modified_utility_deriv2(spec, n, q) > 0.0};
}

double marginal(const UtilitySpec& spec, int n, Program program, double q) {
    return program == Program::True ? spec.deriv(q) : modified_utility_deriv(spec, n, q);
}

// Largest marginal over [-s_max, q_upper].
double peak_marginal(const UtilitySpec& spec, int n, Program program, double s_max, double q_upper) {
    if (program == Program::True) return spec.deriv(-s_max);
    if (auto peak = spec.modified_peak(n)) {
        return modified_utility_deriv(spec, n, std::clamp(*peak, -s_max, q_upper));
    }
    double best = 0.0;
    for (int k = 0; k <= kScanPoints; ++k) {
        const double q = -s_max + (q_upper + s_max) * k / kScanPoints;
        best = std::max(best, modified_utility_deriv(spec, n, q));
    }
    return best;
}

struct Responses {
    std::vector<double> quantities;
    std::vector<bool> non_concave;
    double excess = 0.0;
};

Responses respond(const MarketConfig& config, std::span<const ExponentialUtility> utilities, Program program,
                  double eta) {
    const double upper = config.q_upper();
    Responses out;
    out.quantities.reserve(utilities.size());
    out.non_concave.reserve(utilities.size());
    for (const auto& u : utilities) {
        if (program == Program::True) {
            out.quantities.push_back(std::min(marginal_inverse_true(u, eta, config.s_max), upper));
            out.non_concave.push_back(false);
        } else {
            const auto r = marginal_inverse_modified(u, config.n_prosumers, eta, config.s_max, upper);
            out.quantities.push_back(r.quantity);
            out.non_concave.push_back(r.non_concave);
        }
    }
    out.excess = std::accumulate(out.quantities.begin(), out.quantities.end(), 0.0);
    return out;
}

DualBracket bracket_for(const MarketConfig& config, std::span<const ExponentialUtility> utilities,
                        Program program) {
    const double upper = config.q_upper();
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& u : utilities) {
        lo = std::min(lo, marginal(u, config.n_prosumers, program, upper));
        hi = std::max(hi, peak_marginal(u, config.n_prosumers, program, config.s_max, upper));
    }
    DualBracket b{lo / 10.0, hi * 10.0, 0.0, 0.0};
    b.excess_lo = respond(config, utilities, program, b.eta_lo).excess;
    for (int i = 0; i < kBracketWidenings && b.excess_lo < 0.0; ++i) {
        b.eta_lo /= 10.0;
        b.excess_lo = respond(config, utilities, program, b.eta_lo).excess;
    }
    b.excess_hi = respond(config, utilities, program, b.eta_hi).excess;
    for (int i = 0; i < kBracketWidenings && b.excess_hi > 0.0; ++i) {
        b.eta_hi *= 10.0;
        b.excess_hi = respond(config, utilities, program, b.eta_hi).excess;
    }
    if (!(b.excess_lo >= 0.0) || !(b.excess_hi <= 0.0) || !(b.eta_lo < b.eta_hi)) {
        std::ostringstream msg;
        msg << "no sign change of excess demand (" << to_string(program) << "): eta in [" << b.eta_lo << ", "
            << b.eta_hi << "], excess [" << b.excess_lo << ", " << b.excess_hi << "]";
        throw BracketFailure(msg.str());
    }
    return b;
}

}  // namespace

std::string_view to_string(Program program) { return program == Program::True ? "true" : "modified"; }

double marginal_inverse_true(const UtilitySpec& spec, double eta, double s_max) {
    if (!(eta > 0.0)) throw DomainError("marginal_inverse_true: eta must be positive");
    return std::max(spec.inverse_deriv(eta), -s_max);
}

ModifiedResponse marginal_inverse_modified(const UtilitySpec& spec, int n, double eta, double s_max,
                                           double q_upper) {
    if (!(eta > 0.0)) throw DomainError("marginal_inverse_modified: eta must be positive");
    if (!(q_upper > -s_max)) throw DomainError("marginal_inverse_modified: empty interval");
    const auto peak = spec.modified_peak(n);
    if (!peak) return enumerate_response(spec, n, eta, s_max, q_upper);

    const double lower = -s_max;
    const double start = std::clamp(*peak, lower, q_upper);
    const double stationary = decreasing_branch_root(spec, n, eta, start, q_upper);
    if (lower >= *peak) return {stationary, false};

    // Left of the peak S~' increases, so its stationary points there are
    // minima of the Lagrangian; only the left endpoint can compete.
    const Candidate candidates[] = {{lower, lagrangian(spec, n, eta, lower)},
                                    {stationary, lagrangian(spec, n, eta, stationary)}};
    const double q = best_candidate(candidates);
    return {q, q < *peak};
}

double excess_demand(const MarketConfig& config, Program program, double eta) {
    const auto utilities = config.utilities();
    return respond(config, utilities, program, eta).excess;
}

DualBracket find_bracket(const MarketConfig& config, Program program) {
    config.validate();
    const auto utilities = config.utilities();
    return bracket_for(config, utilities, program);
}

SolveResult solve_dual(const MarketConfig& config, Program program) {
    config.validate();
    const auto utilities = config.utilities();
    const int n = config.n_prosumers;

    SolveResult result;
    result.program = program;
    result.bracket = bracket_for(config, utilities, program);

    double lo = result.bracket.eta_lo;
    double hi = result.bracket.eta_hi;
    double best_eta = std::abs(result.bracket.excess_lo) <= std::abs(result.bracket.excess_hi) ? lo : hi;
    double best_abs = std::min(std::abs(result.bracket.excess_lo), std::abs(result.bracket.excess_hi));
    const double stop = config.tol_root * 1e-3;

    int it = 0;
    for (; it < kMaxBisection && best_abs > stop; ++it) {
        // Geometric steps while the bracket spans decades, arithmetic after.
        const double mid = hi > 2.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double e = respond(config, utilities, program, mid).excess;
        if (std::abs(e) < best_abs || (std::abs(e) == best_abs && mid < best_eta)) {
            best_abs = std::abs(e);
            best_eta = mid;
        }
        (e > 0.0 ? lo : hi) = mid;
    }
    result.iterations = it;

    Responses r = respond(config, utilities, program, best_eta);
    result.excess = r.excess;
    result.price = best_eta;

    Allocation& a = result.allocation;
    a.quantities = std::move(r.quantities);
    a.dual_price = best_eta;
    a.kkt_residuals.resize(n);
    a.at_capacity.resize(n);
    const double upper = config.q_upper();
    bool kkt_ok = true;
    for (int i = 0; i < n; ++i) {
        const double q = a.quantities[i];
        const double m = marginal(utilities[i], n, program, q);
        a.at_capacity[i] = std::abs(q + config.s_max) <= config.tol_root;
        double residual;
        if (a.at_capacity[i]) {
            residual = std::max(0.0, m - best_eta);
        } else if (std::abs(q - upper) <= config.tol_root) {
            residual = std::max(0.0, best_eta - m);
        } else {
            residual = std::abs(m - best_eta);
        }
        a.kkt_residuals[i] = residual;
        kkt_ok = kkt_ok && residual <= config.tol_kkt;
    }

    result.non_concave_at = std::move(r.non_concave);
    result.non_concave = std::any_of(result.non_concave_at.begin(), result.non_concave_at.end(),
                                     [](bool b) { return b; });
    result.converged = std::abs(result.excess) <= config.tol_root && kkt_ok;
    result.thetas = recover_bids(a, config.d_min);
    result.welfare_true = welfare(config, a.quantities);
    return result;
}

std::vector<double> recover_bids(const Allocation& allocation, double d_min) {
    if (!(allocation.dual_price > 0.0)) throw DomainError("recover_bids: dual price must be positive");
    std::vector<double> thetas;
    thetas.reserve(allocation.quantities.size());
    for (double q : allocation.quantities) thetas.push_back(allocation.dual_price * (q - d_min));
    return thetas;
}

double welfare(const MarketConfig& config, std::span<const double> quantities) {
    if (quantities.size() != static_cast<std::size_t>(config.n_prosumers))
        throw DomainError("welfare: quantity vector length does not match n_prosumers");
    double total = 0.0;
    for (std::size_t i = 0; i < quantities.size(); ++i) total += config.utility(i).value(quantities[i]);
    return total;
}

}  // namespace prosumer
