#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "basket/model.hpp"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"

using namespace basket;

TEST(Partitions, FourArmSettingHasEightClasses) {
    const auto parts = enumerate_partitions(fixture::four_arm());
    ASSERT_EQ(parts.size(), 8u);
    EXPECT_EQ(parts.front().n_sensitive(), 0u);
    EXPECT_EQ(parts.back().n_sensitive(), 4u);
}

TEST(Partitions, SharedRatesGiveJPlusOne) {
    EXPECT_EQ(enumerate_partitions(fixture::three_arm()).size(), 4u);
}

TEST(Partitions, DistinctRatesGiveTwoToTheJ) {
    TrialSpec s{{fixture::arm(0.05, 0.2), fixture::arm(0.1, 0.3)}};
    EXPECT_EQ(enumerate_partitions(s).size(), 4u);
}

TEST(Partitions, RepresentativesPutSensitiveArmsFirst) {
    const auto parts = enumerate_partitions(fixture::four_arm());
    // one sensitive arm: either the first rare arm or the distinct fourth arm
    std::vector<std::string> labels;
    for (const auto& p : parts) labels.push_back(p.label());
    const std::vector<std::string> expected{"{}",      "{1}",     "{4}",       "{1,2}",
                                            "{1,4}",   "{1,2,3}", "{1,2,4}", "{1,2,3,4}"};
    EXPECT_EQ(labels, expected);
}

TEST(Partitions, CanonicalIndexMapsEquivalentAssignments) {
    const auto spec = fixture::four_arm();
    const auto parts = enumerate_partitions(spec);
    Partition third_only{{false, false, true, false}};
    EXPECT_EQ(canonical_index(spec, parts, third_only), 1u);
    Partition two_and_four{{false, true, false, true}};
    EXPECT_EQ(parts[canonical_index(spec, parts, two_and_four)].label(), "{1,4}");
}

TEST(Partitions, CountMatchesBruteForceOnRandomSpecs) {
    std::mt19937_64 rng(11);
    const std::vector<std::pair<double, double>> pairs{{0.05, 0.2}, {0.1, 0.3}, {0.15, 0.3}};
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t J = 2 + rng() % 5;
        TrialSpec s;
        for (std::size_t j = 0; j < J; ++j) {
            const auto& pr = pairs[rng() % pairs.size()];
            s.arms.push_back(fixture::arm(pr.first, pr.second));
        }
        const auto n = enumerate_partitions(s).size();
        EXPECT_EQ(n, oracle::count_partitions(fixture::p0s(s), fixture::p1s(s)));
        EXPECT_GE(n, J + 1);
        EXPECT_LE(n, std::size_t{1} << J);
    }
}

TEST(ThetaOffset, Examples) {
    EXPECT_DOUBLE_EQ(theta_offset(0.05, 0.05), 0.0);
    EXPECT_NEAR(theta_offset(0.20, 0.05), 1.55815, 1e-5);
    EXPECT_NEAR(inv_theta_offset(0.0, 0.15), 0.15, 1e-15);
    EXPECT_THROW(theta_offset(0.0, 0.05), InvalidArgument);
}

TEST(ThetaOffset, PositiveWhenTargetExceedsNull) {
    for (double p0 = 0.01; p0 < 0.9; p0 += 0.07)
        for (double p1 = p0 + 0.01; p1 < 0.99; p1 += 0.05) EXPECT_GT(theta_offset(p1, p0), 0.0);
}

TEST(ThetaOffset, RoundTrip) {
    for (double t = -8; t <= 8; t += 0.5) EXPECT_NEAR(theta_offset(inv_theta_offset(t, 0.15), 0.15), t, 1e-9);
}

namespace {
UtilitySpec two_region(std::size_t G) { return UtilitySpec{TwoRegion{1, 2, 0.2}, equal_weights(G)}; }
}  // namespace

TEST(Utility, AllInsensitiveBelowChangePoint) {
    const std::vector<double> none, g{0.1, 0.1, 0.1, 0.1};
    EXPECT_NEAR(utility(Partition{{false, false, false, false}}, none, g, two_region(8)), -0.4, 1e-12);
}

TEST(Utility, OneSensitiveOneInsensitive) {
    const std::vector<double> r{0.8}, g{0.3};
    EXPECT_NEAR(utility(Partition{{true, false}}, r, g, two_region(4)), 0.3, 1e-12);
}

TEST(Utility, AllSensitiveZeroPower) {
    const std::vector<double> r{0, 0, 0, 0}, none;
    EXPECT_DOUBLE_EQ(utility(Partition{{true, true, true, true}}, r, none, two_region(8)), 0.0);
}

TEST(Utility, RejectsMismatchedRates) {
    const std::vector<double> r{0.5}, g{0.1, 0.1};
    EXPECT_THROW(utility(Partition{{true, false}}, r, g, two_region(4)), InvalidArgument);
}

TEST(Utility, MonotoneInEveryRateForAllVariants) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<UtilitySpec> specs{
        {TwoRegion{1, 2, 0.2}, equal_weights(4)},
        {ThreeRegion{1, 1.5, 3, 0.1, 0.25}, equal_weights(4)},
        {CostBenefit{{1.0, 2.0, 0.5}, 1.0, 4.0, 0.15}, equal_weights(4)},
    };
    const Partition part{{true, false, true}};
    for (const auto& spec : specs) {
        for (int k = 0; k < 200; ++k) {
            std::vector<double> r{u(rng), u(rng)}, g{u(rng)};
            const double base = utility(part, r, g, spec);
            auto r2 = r;
            r2[k % 2] = std::min(1.0, r2[k % 2] + 0.05);
            EXPECT_GE(utility(part, r2, g, spec), base - 1e-12);
            auto g2 = g;
            g2[0] = std::min(1.0, g2[0] + 0.05);
            EXPECT_LE(utility(part, r, g2, spec), base + 1e-12);
        }
    }
}

TEST(Utility, TwoRegionContinuousAtChangePoint) {
    const auto spec = two_region(4);
    const Partition part{{false, true}};
    const std::vector<double> r{0.5};
    for (double eps : {1e-6, 1e-9}) {
        const std::vector<double> lo{0.2 - eps}, hi{0.2 + eps};
        EXPECT_NEAR(utility(part, r, lo, spec), utility(part, r, hi, spec), 10 * eps);
    }
}

TEST(MeanUtility, Examples) {
    const std::vector<double> ones(8, 1.0);
    EXPECT_NEAR(mean_utility(ones, equal_weights(8)), 1.0, 1e-15);
    const std::vector<double> u{2, 0}, w{0.5, 0.5};
    EXPECT_DOUBLE_EQ(mean_utility(u, w), 1.0);
    const std::vector<double> eight{1, 2, 3, 4, 5, 6, 7, -8};
    EXPECT_NEAR(mean_utility(eight, equal_weights(8)), 20.0 / 8.0, 1e-15);
}

TEST(SigmaMax, FourArmSetting) {
    const auto spec = fixture::four_arm();
    const double t = theta_offset(0.2, 0.05);
    const double three_sens = (3 * std::pow(t - 0.75 * t, 2) + std::pow(0.75 * t, 2)) / 3.0;
    EXPECT_NEAR(three_sens, 0.60696, 1e-5);
    const double s = empirical_sigma_max(spec);
    EXPECT_GE(s, three_sens - 1e-12);
    EXPECT_NEAR(s, oracle::sigma_max_sq(fixture::p0s(spec), fixture::p1s(spec)), 1e-12);
}

TEST(SigmaMax, MatchesBruteForceOnRandomSpecs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.02, 0.5);
    for (int k = 0; k < 40; ++k) {
        const std::size_t J = 2 + rng() % 4;
        TrialSpec s;
        for (std::size_t j = 0; j < J; ++j) {
            const double p0 = u(rng);
            s.arms.push_back(fixture::arm(p0, p0 + 0.1 + 0.3 * u(rng)));
        }
        EXPECT_NEAR(empirical_sigma_max(s), oracle::sigma_max_sq(fixture::p0s(s), fixture::p1s(s)), 1e-12);
    }
}

TEST(Priors, InverseGammaRoundTrip) {
    const auto a = ScaledInvChiSq::from_inverse_gamma(2, 8);
    EXPECT_DOUBLE_EQ(a.v0, 4.0);
    EXPECT_DOUBLE_EQ(a.sigma0_sq, 4.0);
    const auto b = ScaledInvChiSq::from_inverse_gamma(1, 1.44);
    EXPECT_DOUBLE_EQ(b.v0, 2.0);
    EXPECT_NEAR(b.sigma0_sq, 1.44, 1e-15);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.01, 50);
    for (int k = 0; k < 100; ++k) {
        const ScaledInvChiSq s{u(rng), u(rng)};
        const auto back = ScaledInvChiSq::from_inverse_gamma(s.shape(), s.scale());
        EXPECT_NEAR(back.v0, s.v0, 1e-12 * s.v0);
        EXPECT_NEAR(back.sigma0_sq, s.sigma0_sq, 1e-12 * s.sigma0_sq);
    }
}

TEST(Priors, Validation) {
    EXPECT_THROW(PriorSpec::inverse_gamma(0, 1).validate(), InvalidArgument);
    EXPECT_THROW(PriorSpec::half_cauchy(-1).validate(), InvalidArgument);
    EXPECT_NO_THROW(PriorSpec::half_cauchy(1.5).validate());
    EXPECT_EQ(PriorSpec::inverse_gamma(2, 8).describe(), "IG(2,8)");
}

TEST(Validation, TrialAndUtility) {
    TrialSpec one{{fixture::arm(0.05, 0.2)}};
    EXPECT_THROW(one.validate(), InvalidArgument);
    TrialSpec bad{{fixture::arm(0.2, 0.05), fixture::arm(0.05, 0.2)}};
    EXPECT_THROW(bad.validate(), InvalidArgument);
    TrialSpec looks{{fixture::arm(0.05, 0.2, 20, {10, 15}), fixture::arm(0.05, 0.2)}};
    EXPECT_THROW(looks.validate(), InvalidArgument);
    UtilitySpec u{ThreeRegion{1, 1, 1, 0.3, 0.2}, equal_weights(4)};
    EXPECT_THROW(u.validate(2), InvalidArgument);
    UtilitySpec w{TwoRegion{}, {0.5, 0.6}};
    EXPECT_THROW(w.validate(2), InvalidArgument);
    EXPECT_THROW((HyperPrior{0.0, 0.0}).validate(), InvalidArgument);
}
