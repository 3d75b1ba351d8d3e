#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "basket/designs.hpp"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"

using namespace basket;

TEST(Bop2Cutoff, Examples) {
    for (int n : {1, 10, 20}) EXPECT_NEAR(bop2_cutoff(n, 20, 0.7, 0.0), 0.3, 1e-15);
    EXPECT_NEAR(bop2_cutoff(20, 20, 0.715, 0.32), 0.285, 1e-15);
    EXPECT_NEAR(bop2_cutoff(10, 20, 0.715, 0.32), 1 - 0.715 * std::pow(0.5, 0.32), 1e-15);
    EXPECT_THROW(bop2_cutoff(0, 20, 0.7, 0.3), InvalidArgument);
}

TEST(Bop2Cutoff, NonincreasingInSampleSizeAndZeta) {
    for (double delta : {0.0, 0.32, 1.0, 3.0})
        for (int n = 1; n < 30; ++n) EXPECT_LE(bop2_cutoff(n + 1, 30, 0.7, delta), bop2_cutoff(n, 30, 0.7, delta));
    for (double z = 0.05; z < 0.95; z += 0.05) EXPECT_LT(bop2_cutoff(10, 20, z + 0.01, 0.32), bop2_cutoff(10, 20, z, 0.32));
}

TEST(StoppingPolicyTest, Validation) {
    EXPECT_THROW(StoppingPolicy::uniform(2, 1.0, 0.3).validate(2), InvalidArgument);
    EXPECT_THROW(StoppingPolicy::uniform(2, 0.7, -0.1).validate(2), InvalidArgument);
    EXPECT_THROW(StoppingPolicy::uniform(2, 0.7, 0.3).validate(3), InvalidArgument);
    EXPECT_NO_THROW(StoppingPolicy::uniform(2, 0.7, 0.3).validate(2));
}

TEST(Independent, FutilityMatchesIncompleteBetaOracle) {
    const auto spec = fixture::uniform_arms(2);
    auto design = fixture::design(DesignKind::Independent, 2);
    const auto out = independent_analyze({{10, 10}, {0, 3}}, spec, design);
    EXPECT_NEAR(out[0].futility_prob, oracle::beta_tail(0.1, 10.1, 0.05, false), 1e-8);
    EXPECT_NEAR(out[1].futility_prob, oracle::beta_tail(3.1, 7.1, 0.05, false), 1e-8);
}

TEST(StoppingRules, StatusFollowsCutoff) {
    const auto spec = fixture::uniform_arms(2);
    const auto policy = StoppingPolicy::uniform(2, 0.7, 0.0);  // cutoff 0.3 everywhere
    ArmProbabilities probs{{0.3, 0.31}, {0, 0}};
    auto interim = apply_stopping_rules({{10, 10}, {1, 1}}, spec, policy, probs);
    EXPECT_EQ(interim[0].status, ArmStatus::continuing);  // tie continues
    EXPECT_EQ(interim[1].status, ArmStatus::stopped_futile);
    auto final_look = apply_stopping_rules({{20, 20}, {1, 1}}, spec, policy, probs);
    EXPECT_EQ(final_look[0].status, ArmStatus::final_effective);
    EXPECT_EQ(final_look[1].status, ArmStatus::final_not_effective);
    EXPECT_TRUE(claims_effective(final_look[0].status));
    EXPECT_FALSE(claims_effective(final_look[1].status));
}

TEST(StoppingRules, OptionalSuperiority) {
    const auto spec = fixture::uniform_arms(2);
    auto policy = StoppingPolicy::uniform(2, 0.7, 0.0);
    policy.superiority_cutoff = {0.9, 0.9};
    ArmProbabilities probs{{0.01, 0.01}, {0.95, 0.5}};
    const auto d = apply_stopping_rules({{10, 10}, {6, 6}}, spec, policy, probs);
    EXPECT_EQ(d[0].status, ArmStatus::stopped_superior);
    EXPECT_EQ(d[1].status, ArmStatus::continuing);
}

TEST(ClusterArms, ThresholdExamples) {
    const auto spec = fixture::uniform_arms(2);
    const BetaParams bp{0.1, 0.1};
    // full sample: threshold 0.5
    for (int x = 0; x <= 20; ++x) {
        const auto part = cluster_arms({{20, 20}, {x, x}}, spec, 2.0, bp);
        const double prob = beta_tail_prob(beta_binomial_posterior(x, 20, 0.1, 0.1), 0.125, Tail::greater);
        EXPECT_EQ(part.sensitive[0], prob > 0.5) << x;
    }
    // half sample with omega 2: threshold 0.125
    for (int x = 0; x <= 10; ++x) {
        const auto part = cluster_arms({{10, 10}, {x, x}}, spec, 2.0, bp);
        const double prob = beta_tail_prob(beta_binomial_posterior(x, 10, 0.1, 0.1), 0.125, Tail::greater);
        EXPECT_EQ(part.sensitive[0], prob > 0.125) << x;
    }
    EXPECT_TRUE(cluster_arms({{0, 0}, {0, 0}}, spec, 2.0, bp).sensitive[0]);
}

TEST(ModelLikelihood, Examples) {
    const auto spec = fixture::four_arm();
    for (const auto& part : enumerate_partitions(spec))
        EXPECT_DOUBLE_EQ(model_likelihood({{0, 0, 0, 0}, {0, 0, 0, 0}}, part, spec), 1.0);
    const TrialSpec two{{fixture::arm(0.05, 0.2), fixture::arm(0.05, 0.2)}};
    const double l = model_likelihood({{10, 0}, {2, 0}}, Partition{{true, false}}, two);
    EXPECT_NEAR(l, 45 * 0.04 * std::pow(0.8, 8), 1e-14);
    // flipping one arm scales by that arm's pmf ratio
    const ObservedData d{{10, 10, 10, 10}, {2, 0, 1, 3}};
    const double a = model_likelihood(d, Partition{{true, false, false, true}}, spec);
    const double b = model_likelihood(d, Partition{{false, false, false, true}}, spec);
    EXPECT_NEAR(a / b, oracle::binom_pmf(10, 2, 0.2) / oracle::binom_pmf(10, 2, 0.05), 1e-10);
}

TEST(BmaWeights, MatchNaiveArithmetic) {
    const auto spec = fixture::four_arm();
    const auto parts = enumerate_partitions(spec);
    std::vector<std::vector<bool>> raw;
    for (const auto& p : parts) raw.push_back(p.sensitive);
    const auto prior = equal_weights(parts.size());
    const ObservedData d{{20, 20, 20, 20}, {4, 4, 4, 6}};
    const auto w = bma_weights(d, spec, parts, prior);
    const auto ref = oracle::bma_weights_naive(d.n, d.x, fixture::p0s(spec), fixture::p1s(spec), raw, prior);
    double sum = 0;
    for (std::size_t g = 0; g < w.size(); ++g) {
        EXPECT_NEAR(w[g], ref[g], 1e-10);
        sum += w[g];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(BmaWeights, NoDataReturnsPrior) {
    const auto spec = fixture::four_arm();
    const auto parts = enumerate_partitions(spec);
    const std::vector<double> prior{0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    const auto w = bma_weights({{0, 0, 0, 0}, {0, 0, 0, 0}}, spec, parts, prior);
    for (std::size_t g = 0; g < w.size(); ++g) EXPECT_NEAR(w[g], prior[g], 1e-15);
}

TEST(BmaWeights, SumToOneOnRandomData) {
    const auto spec = fixture::four_arm();
    const auto parts = enumerate_partitions(spec);
    std::mt19937_64 rng(17);
    for (int k = 0; k < 200; ++k) {
        ObservedData d{{}, {}};
        for (int j = 0; j < 4; ++j) {
            const int n = static_cast<int>(rng() % 21);
            d.n.push_back(n);
            d.x.push_back(n ? static_cast<int>(rng() % (n + 1)) : 0);
        }
        const auto w = bma_weights(d, spec, parts, equal_weights(8));
        double s = 0;
        for (double v : w) s += v;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(BhmPosterior, SingleArmHierarchyApproachesIndependentAnalysis) {
    const auto spec = fixture::uniform_arms(2);
    const ObservedData d{{10, 10}, {2, 0}};
    const std::vector<int> only{0};
    McmcControl c;
    c.kept_draws = 40000;
    const auto t = bhm_posterior(d, spec, only, PriorSpec::inverse_gamma(2, 8), HyperPrior{}, c);
    const auto post = beta_binomial_posterior(2, 10, 0.1, 0.1);
    EXPECT_NEAR(t.futility[0], beta_tail_prob(post, 0.05, Tail::leq), 0.02);
    EXPECT_NEAR(t.efficacy[0], beta_tail_prob(post, 0.2, Tail::greater), 0.02);
}

TEST(BhmPosterior, ArmOrderDoesNotChangeResult) {
    const auto spec = fixture::four_arm();
    const auto c = fixture::quick_mcmc();
    const auto prior = PriorSpec::inverse_gamma(2, 8);
    const auto a = bhm_posterior({{10, 10, 10, 10}, {1, 3, 0, 2}}, spec, {}, prior, {}, c);
    const auto b = bhm_posterior({{10, 10, 10, 10}, {3, 0, 1, 2}}, spec, {}, prior, {}, c);
    EXPECT_EQ(a.futility[0], b.futility[2]);
    EXPECT_EQ(a.futility[1], b.futility[0]);
    EXPECT_EQ(a.futility[2], b.futility[1]);
    EXPECT_EQ(a.futility[3], b.futility[3]);
}

TEST(BhmPosterior, CacheReturnsIdenticalValues) {
    const auto spec = fixture::four_arm();
    const auto c = fixture::quick_mcmc();
    PosteriorCache cache;
    const ObservedData d{{10, 10, 10, 10}, {1, 1, 2, 2}};
    const auto fresh = bhm_posterior(d, spec, {}, PriorSpec::inverse_gamma(2, 8), {}, c);
    const auto first = bhm_posterior(d, spec, {}, PriorSpec::inverse_gamma(2, 8), {}, c, &cache);
    const auto second = bhm_posterior(d, spec, {}, PriorSpec::inverse_gamma(2, 8), {}, c, &cache);
    EXPECT_EQ(fresh.futility, first.futility);
    EXPECT_EQ(first.futility, second.futility);
    EXPECT_EQ(cache.hits(), 1u);
    EXPECT_EQ(cache.misses(), 1u);
    // a different prior is a different key
    bhm_posterior(d, spec, {}, PriorSpec::inverse_gamma(1, 1.44), {}, c, &cache);
    EXPECT_EQ(cache.size(), 2u);
}

TEST(Cobhm, OneClusterEqualsPlainHierarchy) {
    const auto spec = fixture::four_arm();
    auto cob = fixture::design(DesignKind::COBHM, 4);
    cob.prior = PriorSpec::inverse_gamma(1, 1.44);
    cob.mcmc = fixture::quick_mcmc();
    auto plain = cob;
    plain.kind = DesignKind::OBHM;
    const ObservedData d{{10, 10, 10, 10}, {0, 0, 0, 1}};  // nobody clears the cluster threshold
    ASSERT_EQ(cluster_arms(d, spec, cob.omega, cob.beta_prior).n_sensitive(), 0u);
    const auto a = cobhm_analyze(d, spec, cob);
    const auto b = bhm_analyze(d, spec, plain);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(a[j].futility_prob, b[j].futility_prob);
        EXPECT_EQ(a[j].status, b[j].status);
    }
}

TEST(Cobhm, SingletonClustersEqualIndependent) {
    const auto spec = fixture::uniform_arms(2);
    auto cob = fixture::design(DesignKind::COBHM, 2);
    const ObservedData d{{10, 10}, {0, 7}};
    ASSERT_EQ(cluster_arms(d, spec, cob.omega, cob.beta_prior).n_sensitive(), 1u);
    auto ind = cob;
    ind.kind = DesignKind::Independent;
    const auto a = cobhm_analyze(d, spec, cob);
    const auto b = independent_analyze(d, spec, ind);
    for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_EQ(a[j].futility_prob, b[j].futility_prob);
        EXPECT_EQ(a[j].status, b[j].status);
    }
}

namespace {
DesignSpec aobhm_design(const TrialSpec& spec, std::vector<PriorSpec> priors, std::vector<double> model_prior) {
    auto d = fixture::design(DesignKind::AOBHM, spec.size());
    d.partition_priors = std::move(priors);
    d.model_prior = std::move(model_prior);
    d.mcmc = fixture::quick_mcmc();
    return d;
}
}  // namespace

TEST(Aobhm, IdenticalPriorsReduceToPlainHierarchy) {
    const auto spec = fixture::four_arm();
    const auto prior = PriorSpec::inverse_gamma(2, 8);
    auto a = aobhm_design(spec, std::vector<PriorSpec>(8, prior), equal_weights(8));
    auto plain = a;
    plain.kind = DesignKind::OBHM;
    plain.prior = prior;
    const ObservedData d{{10, 10, 10, 10}, {2, 1, 0, 3}};
    const auto pa = design_probabilities(d, spec, a);
    const auto pb = design_probabilities(d, spec, plain);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(pa.futility[j], pb.futility[j], 0.01);
}

TEST(Aobhm, DegenerateModelPriorMakesAverageEqualSelect) {
    const auto spec = fixture::four_arm();
    std::vector<PriorSpec> priors;
    for (int g = 0; g < 8; ++g) priors.push_back(PriorSpec::inverse_gamma(1 + g, 2 + g));
    std::vector<double> one_hot(8, 0.0);
    one_hot[5] = 1.0;
    auto avg = aobhm_design(spec, priors, one_hot);
    auto sel = avg;
    sel.decision_mode = DecisionMode::model_select;
    const ObservedData d{{10, 10, 10, 10}, {2, 1, 0, 3}};
    EXPECT_EQ(design_probabilities(d, spec, avg).futility, design_probabilities(d, spec, sel).futility);
}

TEST(Aobhm, AverageIsConvexCombinationOfModels) {
    const auto spec = fixture::four_arm();
    std::vector<PriorSpec> priors;
    for (int g = 0; g < 8; ++g) priors.push_back(PriorSpec::scaled_inv_chisq(0.5 + 0.4 * g, 0.2 + 0.5 * g));
    const auto avg = design_probabilities({{10, 10, 10, 10}, {2, 1, 0, 3}}, spec, aobhm_design(spec, priors, equal_weights(8)));
    std::vector<double> lo(4, 1.0), hi(4, 0.0);
    for (int g = 0; g < 8; ++g) {
        std::vector<double> one_hot(8, 0.0);
        one_hot[static_cast<std::size_t>(g)] = 1.0;
        const auto p = design_probabilities({{10, 10, 10, 10}, {2, 1, 0, 3}}, spec, aobhm_design(spec, priors, one_hot));
        for (std::size_t j = 0; j < 4; ++j) {
            lo[j] = std::min(lo[j], p.futility[j]);
            hi[j] = std::max(hi[j], p.futility[j]);
        }
    }
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_GE(avg.futility[j], lo[j] - 1e-12);
        EXPECT_LE(avg.futility[j], hi[j] + 1e-12);
    }
}

TEST(DesignSpecTest, Validation) {
    const auto spec = fixture::four_arm();
    auto a = fixture::design(DesignKind::AOBHM, 4);
    EXPECT_THROW(a.validate(spec), InvalidArgument);  // no per-partition priors
    auto c = fixture::design(DesignKind::COBHM, 4);
    c.omega = 0;
    EXPECT_THROW(c.validate(spec), InvalidArgument);
    EXPECT_EQ(parse_design_kind("obhm"), DesignKind::OBHM);
    EXPECT_FALSE(parse_design_kind("nope").has_value());
}
