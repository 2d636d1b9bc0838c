#include <cmath>

#include <gtest/gtest.h>

#include "prosumer/errors.hpp"
#include "prosumer/oracle.hpp"
#include "support/numeric_oracles.hpp"

namespace prosumer {
namespace {

using testing::case_study_betas;

TEST(StrategicPayoff, Examples) {
    const auto config = MarketConfig::make(1.0, 1.0, {2.0, 2.0});
    EXPECT_NEAR(strategic_payoff(0, std::vector<double>{-1.0, -1.0}, config), -0.32967995396436069926, 1e-15);

    // Zero bid: the prosumer buys its inelastic demand at the clearing price.
    const std::vector<double> thetas{0.0, -2.0};
    const double p = 2.0 / 2.0;
    EXPECT_NEAR(strategic_payoff(0, thetas, config), -p * 1.0, 1e-15);
}

TEST(StrategicPayoff, SymmetricEquilibriumPaysNothing) {
    const auto config = MarketConfig::make(4.0, 3.0, std::vector<double>(11, 2.5));
    const double mu = config.utility(0).deriv(0.0);
    const std::vector<double> thetas(11, -mu * 4.0);
    EXPECT_NEAR(strategic_payoff(3, thetas, config), config.utility(3).value(0.0), 1e-14);
}

TEST(StrategicPayoff, NonPositivePriceThrows) {
    const auto config = MarketConfig::make(1.0, 1.0, {2.0, 2.0});
    EXPECT_THROW(strategic_payoff(0, std::vector<double>{1.0, -1.0}, config), DomainError);
    EXPECT_THROW(strategic_payoff(0, std::vector<double>{0.0, 0.0}, config), DomainError);
}

TEST(StrategicPayoff, GrowsWithoutBoundWhenRivalsBidPositive) {
    const auto config = MarketConfig::make(1.0, 3.0, case_study_betas(0.5));
    std::vector<double> thetas(11, 0.1);  // rivals of prosumer 0 sum to +1
    thetas[0] = -2.0;
    const double start = strategic_payoff(0, thetas, config);
    double prev = start;
    for (double theta = -4.0; theta > -1e7; theta *= 2.0) {
        thetas[0] = theta;
        const double v = strategic_payoff(0, thetas, config);
        EXPECT_GT(v, prev);
        prev = v;
    }
    EXPECT_GT(prev, start + 1e3);
}

TEST(BestResponse, NashBidsAreBestResponses) {
    const auto config = MarketConfig::make(4.0, 1.5, case_study_betas(1.9));
    const auto nash = solve_dual(config, Program::Modified);
    ASSERT_TRUE(nash.converged);
    for (std::size_t i = 0; i < nash.thetas.size(); ++i) {
        const auto br = best_response(i, nash.thetas, config);
        EXPECT_LE(br.gap, 1e-6) << "prosumer " << i;
        EXPECT_GE(br.gap, -1e-12);
        EXPECT_GE(br.theta_star, br.theta_lower);
        EXPECT_LE(br.theta_star, br.theta_upper);
        EXPECT_FALSE(br.static_lower_bound);
    }
}

TEST(BestResponse, PerturbedBidIsNotBestResponse) {
    const auto config = MarketConfig::make(4.0, 1.5, case_study_betas(1.9));
    auto thetas = solve_dual(config, Program::Modified).thetas;
    thetas[0] *= 0.9;  // +10% on a negative bid
    EXPECT_GT(best_response(0, thetas, config).gap, 1e-6);
}

TEST(BestResponse, TwoProsumerSymmetricFixedPoint) {
    // beta large enough that the symmetric bids sit inside the payoff-concave interval.
    const auto config = MarketConfig::make(2.0, 0.3, {12.0, 12.0});
    const double mu = config.utility(0).deriv(0.0);
    const std::vector<double> thetas{-mu * 2.0, -mu * 2.0};
    EXPECT_NEAR(best_response(0, thetas, config).theta_star, -mu * 2.0, 1e-5);
}

TEST(BestResponse, NonNegativeRivalsAreUnbounded) {
    const auto config = MarketConfig::make(1.0, 1.0, {2.0, 2.0});
    EXPECT_THROW(best_response(0, std::vector<double>{-1.0, 0.0}, config), UnboundedPayoff);
}

TEST(BruteForce, TwoProsumerSymmetricIsZero) {
    const auto config = MarketConfig::make(4.0, 1.0, {6.0, 6.0});
    for (Program p : {Program::True, Program::Modified}) {
        const auto a = brute_force_program(config, p, 1001);
        EXPECT_NEAR(a.quantities[0], 0.0, 1e-6);
        EXPECT_NEAR(a.quantities[1], 0.0, 1e-6);
    }
}

TEST(BruteForce, AgreesWithDualSolver) {
    const auto two = MarketConfig::make(4.0, 3.0, {2.0, 3.0});
    const auto a = brute_force_program(two, Program::True, 1000);
    const auto r = solve_dual(two, Program::True);
    EXPECT_NEAR(a.quantities[0], r.allocation.quantities[0], 1e-4);

    // Concave regime for the modified program with three prosumers.
    const auto three = MarketConfig::make(2.0, 0.5, {3.0, 4.0, 6.0});
    for (Program p : {Program::True, Program::Modified}) {
        const auto b = brute_force_program(three, p, 1000, 3);
        const auto s = solve_dual(three, p);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(b.quantities[i], s.allocation.quantities[i], 1e-4) << to_string(p);
    }
}

TEST(BruteForce, RejectsLargeOrCoarse) {
    EXPECT_THROW(brute_force_program(MarketConfig::make(1.0, 1.0, {1.0, 1.0, 1.0, 1.0}), Program::True, 1000),
                 TooLarge);
    EXPECT_THROW(brute_force_program(MarketConfig::make(1.0, 1.0, {1.0, 1.0}), Program::True, 10), DomainError);
}

TEST(ProgramObjective, SumsTermsOfTheProgram) {
    const auto config = MarketConfig::make(4.0, 3.0, {2.0, 3.0});
    const std::vector<double> q{-1.0, 1.0};
    EXPECT_DOUBLE_EQ(program_objective(config, Program::True, q), welfare(config, q));
    EXPECT_DOUBLE_EQ(program_objective(config, Program::Modified, q),
                     modified_utility(config.utility(0), 2, -1.0) + modified_utility(config.utility(1), 2, 1.0));
}

}  // namespace
}  // namespace prosumer
