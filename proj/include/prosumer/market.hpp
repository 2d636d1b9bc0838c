#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace prosumer {

/// Per-prosumer utility/cost function S(q) of the net position q.
///
/// Admissible functions are twice differentiable, strictly increasing, strictly
/// concave and vanish at the inelastic demand: value(d_min()) == 0. Values on
/// (0, d_min) are expected to be non-positive (a prosuming cost); the contract
/// records this sign convention but does not check it.
class UtilitySpec {
public:
    virtual ~UtilitySpec() = default;

    virtual double d_min() const = 0;
    virtual double value(double q) const = 0;
    virtual double deriv(double q) const = 0;
    virtual double deriv2(double q) const = 0;

    /// Exact antiderivative of value(), if the family has one in closed form.
    virtual std::optional<double> antideriv(double q) const;

    /// The q with deriv(q) == eta. The default brackets and bisects on the
    /// strictly decreasing marginal.
    virtual double inverse_deriv(double eta) const;

    /// Location of the maximum of the modified marginal
    /// (1 + q/((n-1) d_min)) * deriv(q), when known in closed form. The
    /// modified utility is concave to the right of this point.
    virtual std::optional<double> modified_peak(int n) const;

    /// True when evaluating at q clamps an internal exponent.
    virtual bool saturates(double q) const;
};

/// S(q) = exp(-beta/5) - exp(-beta q / (5 d_min)).
///
/// Exponents are clamped to +-700 so evaluation never overflows; saturates()
/// reports when the clamp is active. The unclamped range is
/// q > -700 * 5 d_min / beta, which for the case-study parameters
/// (beta <= 3, d_min >= 0.7) covers q > -800, far beyond -N s_max.
class ExponentialUtility final : public UtilitySpec {
public:
    ExponentialUtility(double beta, double d_min);

    double beta() const noexcept { return beta_; }
    double d_min() const override { return d_min_; }
    /// beta / (5 d_min), the decay rate of the marginal.
    double rate() const noexcept { return rate_; }

    double value(double q) const override;
    double deriv(double q) const override;
    double deriv2(double q) const override;
    std::optional<double> antideriv(double q) const override;
    double inverse_deriv(double eta) const override;
    std::optional<double> modified_peak(int n) const override;
    bool saturates(double q) const override;

private:
    double decay(double q) const;  // exp(-rate q), clamped

    double beta_;
    double d_min_;
    double rate_;
    double floor_;  // exp(-beta/5) == decay(d_min)
};

inline constexpr double kExponentClamp = 700.0;

/// Default eps of the price-continuity margin: scale-aware in N d_min.
double default_eps_price(int n_prosumers, double d_min);

struct MarketConfig {
    int n_prosumers = 0;
    double d_min = 0.0;
    double s_max = 0.0;
    std::vector<double> betas;
    double eps_price = 0.0;
    double tol_root = 1e-10;
    double tol_kkt = 1e-8;

    /// Builds a config with the default eps_price and validates it.
    static MarketConfig make(double d_min, double s_max, std::vector<double> betas);

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;

    /// Implicit per-prosumer upper bound: everyone else at capacity.
    double q_upper() const { return (n_prosumers - 1) * s_max; }

    ExponentialUtility utility(std::size_t i) const;
    std::vector<ExponentialUtility> utilities() const;
};

/// Net quantity committed by a bid at a given price: d_min + theta / price,
/// with Q(0, 0) = d_min.
double quantity_from_bid(double theta, double price, double d_min);

/// Uniform price balancing the bids: -sum(theta) / (N d_min), zero for the
/// all-zero profile. Throws InvalidBids when sum(theta) > 0.
double clearing_price(std::span<const double> thetas, double d_min);

struct BidProfile {
    std::vector<double> thetas;
    double price = 0.0;
    std::vector<double> quantities;
};

/// Clears the market for a bid vector. With all bids zero the price is zero
/// and every prosumer keeps its inelastic demand.
BidProfile clear_market(std::span<const double> thetas, double d_min);

struct Allocation {
    std::vector<double> quantities;
    double dual_price = 0.0;
    std::vector<double> kkt_residuals;
    std::vector<bool> at_capacity;
};

// Modified (strategically misreported) utility:
//   S~(q) = (1 + q/m) S(q) - (1/m) int_{d_min}^{q} S(z) dz,   m = (n-1) d_min.
// The two sign cases of the integral bound collapse into this one expression.

/// int_a^b S(z) dz. Uses the closed-form antiderivative when the family has
/// one and adaptive Gauss-Kronrod quadrature (tol 1e-10) otherwise.
double integrate_utility(const UtilitySpec& spec, double a, double b);

double modified_utility(const UtilitySpec& spec, int n, double q);

/// (1 + q/((n-1) d_min)) S'(q).
double modified_utility_deriv(const UtilitySpec& spec, int n, double q);

/// S''(q) (1 + q/m) + S'(q)/m.
double modified_utility_deriv2(const UtilitySpec& spec, int n, double q);

}  // namespace prosumer
