#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "prosumer/errors.hpp"
#include "prosumer/market.hpp"
#include "prosumer/solver.hpp"
#include "support/numeric_oracles.hpp"

namespace prosumer {
namespace {

using testing::adaptive_simpson;
using testing::central_difference;

// Exponential utility with the closed forms hidden, so the generic fallbacks run.
class OpaqueUtility final : public UtilitySpec {
public:
    OpaqueUtility(double beta, double d_min) : inner_(beta, d_min) {}
    double d_min() const override { return inner_.d_min(); }
    double value(double q) const override { return inner_.value(q); }
    double deriv(double q) const override { return inner_.deriv(q); }
    double deriv2(double q) const override { return inner_.deriv2(q); }

private:
    ExponentialUtility inner_;
};

TEST(QuantityFromBid, ZeroBidConventions) {
    EXPECT_EQ(quantity_from_bid(0.0, 0.0, 4.0), 4.0);
    EXPECT_EQ(quantity_from_bid(0.0, 2.0, 4.0), 4.0);
    EXPECT_EQ(quantity_from_bid(-1.0, 1.0, 1.0), 0.0);
}

TEST(QuantityFromBid, RejectsUndefinedQuantities) {
    EXPECT_THROW(quantity_from_bid(1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(quantity_from_bid(0.0, -1.0, 1.0), DomainError);
}

TEST(ClearingPrice, Examples) {
    EXPECT_EQ(clearing_price(std::vector<double>(5, 0.0), 3.0), 0.0);
    EXPECT_DOUBLE_EQ(clearing_price(std::vector<double>{-1.0, -1.0}, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(clearing_price(std::vector<double>{1.0, -3.0}, 1.0), 1.0);
}

TEST(ClearingPrice, PositiveSumIsInvalid) {
    EXPECT_THROW(clearing_price(std::vector<double>{1.0, -0.5}, 1.0), InvalidBids);
}

TEST(ClearMarket, AllZeroBidsKeepInelasticDemand) {
    const auto p = clear_market(std::vector<double>(3, 0.0), 2.0);
    EXPECT_EQ(p.price, 0.0);
    for (double q : p.quantities) EXPECT_EQ(q, 2.0);
}

TEST(BidRoundTrip, QuantityRecoveredFromBid) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> qd(-10.0, 10.0), pd(0.01, 10.0), dd(0.1, 5.0);
    for (int t = 0; t < 10000; ++t) {
        const double q = qd(rng), p = pd(rng), d = dd(rng);
        EXPECT_NEAR(quantity_from_bid(p * (q - d), p, d), q, 1e-12);
    }
}

TEST(BidRoundTrip, BalancedAllocationReproducesPrice) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> qd(-3.0, 3.0), pd(0.01, 10.0), dd(0.1, 5.0);
    for (int t = 0; t < 2000; ++t) {
        const int n = 2 + t % 10;
        const double p = pd(rng), d = dd(rng);
        std::vector<double> q(n);
        double sum = 0.0;
        for (int i = 0; i + 1 < n; ++i) sum += (q[i] = qd(rng));
        q[n - 1] = -sum;
        std::vector<double> thetas;
        for (double qi : q) thetas.push_back(p * (qi - d));
        EXPECT_NEAR(clearing_price(thetas, d), p, 1e-12 * std::max(1.0, p));
    }
}

TEST(ExponentialUtility, ValueExamples) {
    EXPECT_EQ(ExponentialUtility(2.5, 4.0).value(4.0), 0.0);
    EXPECT_NEAR(ExponentialUtility(2.5, 4.0).value(0.0), -0.3934693402873665764, 1e-15);
    EXPECT_NEAR(ExponentialUtility(0.6, 1.0).value(-1.0), -0.2405764148622181560, 1e-15);
}

TEST(ExponentialUtility, DerivativeExamples) {
    const ExponentialUtility u(2.5, 4.0);
    EXPECT_NEAR(u.deriv(4.0), 0.07581633246407917795, 1e-16);
    const double fd = central_difference([&](double q) { return u.value(q); }, 1.0, 1e-6);
    EXPECT_NEAR(fd / u.deriv(1.0), 1.0, 1e-6);
}

TEST(ExponentialUtility, IncreasingAndConcaveOnGrid) {
    for (double beta : {0.3, 0.6, 1.0, 2.5, 5.0}) {
        for (double d : {0.5, 1.0, 4.0}) {
            const ExponentialUtility u(beta, d);
            double prev = -INFINITY;
            for (int k = 0; k <= 400; ++k) {
                const double q = -20.0 + 0.1 * k;
                EXPECT_GT(u.deriv(q), 0.0);
                EXPECT_LT(u.deriv2(q), 0.0);
                EXPECT_GE(u.value(q), prev);
                prev = u.value(q);
            }
        }
    }
}

TEST(ExponentialUtility, AntiderivativeMatchesFiniteDifference) {
    const ExponentialUtility u(1.3, 2.0);
    for (double q : {-3.0, -1.0, 0.0, 0.5, 2.0, 7.0}) {
        const double fd = central_difference([&](double z) { return *u.antideriv(z); }, q, 1e-5);
        EXPECT_NEAR(fd, u.value(q), 1e-8);
    }
}

TEST(ExponentialUtility, ClampsExtremeExponents) {
    const ExponentialUtility u(2.5, 0.5);  // rate 1
    EXPECT_FALSE(u.saturates(-699.0));
    EXPECT_TRUE(u.saturates(-800.0));
    EXPECT_TRUE(std::isfinite(u.value(-1e6)));
    EXPECT_TRUE(std::isfinite(u.deriv(-1e6)));
}

TEST(ExponentialUtility, InverseDerivative) {
    const ExponentialUtility u(2.5, 4.0);
    for (double q : {-3.0, 0.0, 4.0, 11.0}) EXPECT_NEAR(u.inverse_deriv(u.deriv(q)), q, 1e-12);
    EXPECT_THROW(u.inverse_deriv(0.0), DomainError);
}

TEST(ModifiedUtility, VanishesAtInelasticDemand) {
    for (double beta : {0.6, 2.5}) {
        for (double d : {1.0, 4.0}) EXPECT_EQ(modified_utility(ExponentialUtility(beta, d), 11, d), 0.0);
    }
}

TEST(ModifiedUtility, MatchesQuadratureOfDefinition) {
    const ExponentialUtility u(2.5, 4.0);
    // High-precision quadrature of the defining integral, frozen.
    EXPECT_NEAR(modified_utility(u, 11, 0.0), -0.41151014237357654932, 1e-8);
    EXPECT_NEAR(modified_utility(u, 11, -3.0), -0.84837548381905305238, 1e-8);
    EXPECT_NEAR(modified_utility(u, 11, 30.0), 0.74263025320720568962, 1e-8);

    // Live adaptive-Simpson route on both integral branches.
    const double m = 10.0 * 4.0;
    auto s = [&](double z) { return u.value(z); };
    for (double q : {-3.0, -1.0, 0.0, 2.0, 4.0, 6.0, 25.0}) {
        const double integral = q < 4.0 ? -adaptive_simpson(s, q, 4.0, 1e-13) : adaptive_simpson(s, 4.0, q, 1e-13);
        const double expected = (1.0 + q / m) * u.value(q) - integral / m;
        EXPECT_NEAR(modified_utility(u, 11, q), expected, 1e-10) << "q=" << q;
    }
}

TEST(ModifiedUtility, ContinuousAcrossInelasticDemand) {
    const ExponentialUtility u(2.5, 4.0);
    EXPECT_LT(std::abs(modified_utility(u, 11, 4.0 - 1e-9) - modified_utility(u, 11, 4.0 + 1e-9)), 1e-7);
}

TEST(ModifiedUtility, DerivativeExamples) {
    const ExponentialUtility u(2.5, 4.0);
    EXPECT_DOUBLE_EQ(modified_utility_deriv(u, 11, 0.0), u.deriv(0.0));
    EXPECT_EQ(modified_utility_deriv(u, 11, -40.0), 0.0);
    const double fd = central_difference([&](double q) { return modified_utility(u, 11, q); }, 2.0, 1e-5);
    EXPECT_NEAR(fd / modified_utility_deriv(u, 11, 2.0), 1.0, 1e-6);
    EXPECT_THROW(modified_utility(u, 1, 0.0), DomainError);
}

TEST(ModifiedUtility, DerivativeMatchesCentralDifferencesOnGrid) {
    struct Case {
        double beta, d, s;
    };
    for (const Case& c : {Case{2.5, 4.0, 3.0}, Case{0.6, 1.0, 4.5}, Case{2.0, 0.7, 0.7}}) {
        const ExponentialUtility u(c.beta, c.d);
        const int n = 11;
        const double lo = -c.s, hi = (n - 1) * c.s;
        for (int k = 0; k < 100; ++k) {
            const double q = lo + (hi - lo) * k / 99.0;
            const double exact = modified_utility_deriv(u, n, q);
            const double fd = central_difference([&](double z) { return modified_utility(u, n, z); }, q, 1e-4);
            EXPECT_LE(std::abs(fd - exact), 1e-6 * std::max(std::abs(exact), 1e-3)) << "q=" << q;
        }
    }
}

TEST(ModifiedUtility, MarginalDecreasingExactlyRightOfPeak) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> bd(0.3, 5.0), dd(0.5, 5.0), ud(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const ExponentialUtility u(bd(rng), dd(rng));
        const int n = 2 + t % 12;
        const double peak = 5.0 * u.d_min() / u.beta() - (n - 1) * u.d_min();
        ASSERT_NEAR(*u.modified_peak(n), peak, 1e-9 * std::max(1.0, std::abs(peak)));
        const double span = 10.0 * u.d_min();
        double a = peak + span * ud(rng), b = peak + span * ud(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-6) continue;
        // Right of the peak: strengthened concavity, strictly decreasing marginal.
        EXPECT_LT(modified_utility_deriv(u, n, b), modified_utility_deriv(u, n, a));
        // Mirror pair left of the peak: the marginal increases, the region is sharp.
        const double a2 = 2.0 * peak - b, b2 = 2.0 * peak - a;
        EXPECT_GT(modified_utility_deriv(u, n, b2), modified_utility_deriv(u, n, a2));
    }
}

TEST(GenericUtility, FallbacksAgreeWithClosedForms) {
    const ExponentialUtility closed(0.9, 1.5);
    const OpaqueUtility opaque(0.9, 1.5);
    EXPECT_FALSE(opaque.antideriv(0.0).has_value());
    for (double q : {-2.0, 0.0, 1.5, 6.0}) {
        EXPECT_NEAR(modified_utility(opaque, 6, q), modified_utility(closed, 6, q), 1e-9);
    }
    for (double eta : {0.01, 0.12, 0.5}) EXPECT_NEAR(opaque.inverse_deriv(eta), closed.inverse_deriv(eta), 1e-9);
    for (double eta : {0.05, 0.1, 0.2}) {
        const auto a = marginal_inverse_modified(opaque, 6, eta, 3.0, 15.0);
        const auto b = marginal_inverse_modified(closed, 6, eta, 3.0, 15.0);
        EXPECT_NEAR(a.quantity, b.quantity, 1e-8) << "eta=" << eta;
        EXPECT_EQ(a.non_concave, b.non_concave);
    }
}

TEST(MarketConfig, ValidationRejectsBadValues) {
    EXPECT_NO_THROW(MarketConfig::make(4.0, 3.0, {1.0, 2.0}));
    EXPECT_THROW(MarketConfig::make(4.0, 3.0, {1.0}), ConfigError);
    EXPECT_THROW(MarketConfig::make(0.0, 3.0, {1.0, 2.0}), ConfigError);
    EXPECT_THROW(MarketConfig::make(4.0, -1.0, {1.0, 2.0}), ConfigError);
    EXPECT_THROW(MarketConfig::make(4.0, 3.0, {1.0, -2.0}), ConfigError);
    auto c = MarketConfig::make(4.0, 3.0, {1.0, 2.0});
    EXPECT_DOUBLE_EQ(c.eps_price, 1e-9 * 2 * 4.0);
    c.betas.push_back(3.0);
    EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace prosumer
