#include "dec/estimation.hpp"
#include "dec/worlds.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dec;

namespace {

// Two H=1 models observing state 1 with probability 0.9 and 0.1.
ModelClass coin_class() {
    Shape sh{2, 1, 1};
    std::vector<double> R{0.0, 0.0};
    return ModelClass({Model(sh, {0.1, 0.9}, {}, R), Model(sh, {0.9, 0.1}, {}, R)});
}

Trajectory coin_obs(int s) { return Trajectory{{s}, {0}, {0.0}}; }

} // namespace

TEST(LearningRates, Validation) {
    EXPECT_NO_THROW((LearningRates{0.0, 0.0}.validate()));
    EXPECT_THROW((LearningRates{0.5, 0.1}.validate()), ValidationError);
    EXPECT_THROW((LearningRates{0.2, -0.1}.validate()), ValidationError);
    EXPECT_TRUE((LearningRates{1.0 / 3, 1.0 / 3}.in_guarantee_regime()));
    EXPECT_FALSE((LearningRates{0.45, 0.3}.in_guarantee_regime()));
    EXPECT_TRUE((LearningRates{1.0 / 3, 1.0 / 3}.subgaussian_valid(RewardChannel::BernoulliScaled)));
    EXPECT_FALSE((LearningRates{0.45, 1.0}.subgaussian_valid(RewardChannel::BernoulliScaled)));
}

TEST(TemperedAggregation, Examples) {
    auto cls = coin_class();
    Policy pi{{0, 0}};
    auto b = ta_update(Belief::uniform(2), cls, pi, coin_obs(1), LearningRates{1.0 / 3, 0.0});
    EXPECT_NEAR(b.weights[0], 0.6753, 5e-5);
    EXPECT_NEAR(b.weights[1], 0.3247, 5e-5);
    double a = std::cbrt(0.9), c = std::cbrt(0.1);
    EXPECT_NEAR(b.weights[0], a / (a + c), 1e-15);

    auto same = ta_update(Belief{{0.3, 0.7}}, cls, pi, coin_obs(1), LearningRates{0.0, 0.0});
    EXPECT_NEAR(same.weights[0], 0.3, 1e-15);

    ModelClass twins({cls[0], cls[0]});
    auto t = ta_update(Belief::uniform(2), twins, pi, coin_obs(0), LearningRates{0.3, 0.3});
    EXPECT_NEAR(t.weights[0], 0.5, 1e-15);
}

TEST(TemperedAggregation, ZeroLikelihood) {
    Shape sh{2, 1, 1};
    std::vector<double> R{0.0, 0.0};
    ModelClass cls({Model(sh, {1.0, 0.0}, {}, R), Model(sh, {0.5, 0.5}, {}, R)});
    Policy pi{{0, 0}};
    auto b = ta_update(Belief::uniform(2), cls, pi, coin_obs(1), LearningRates{0.25, 0.0});
    EXPECT_EQ(b.weights[0], 0.0);
    EXPECT_EQ(b.weights[1], 1.0);
    ModelClass blind({cls[0], cls[0]});
    EXPECT_THROW(ta_update(Belief::uniform(2), blind, pi, coin_obs(1), LearningRates{0.25, 0.0}), ValidationError);
    EXPECT_THROW(ta_update(Belief::uniform(3), cls, pi, coin_obs(1), LearningRates{0.25, 0.0}), ValidationError);
}

TEST(TemperedAggregation, EqualsTemperedPosterior) {
    auto cls = make_random_class(5, 2, 2, 3, 4, 0.7);
    auto pc = PolicyClass::all(cls.shape());
    Rng rng(9);
    const double eta = 0.3;
    Belief b = Belief::uniform(cls.size());
    std::vector<double> logsum(cls.size(), 0.0);
    for (int t = 0; t < 25; ++t) {
        const Policy& pi = pc[rng.below(pc.size())];
        auto tr = simulate(cls[2], pi, rng);
        b = ta_update(b, cls, pi, tr, LearningRates{eta, 0.0});
        for (std::size_t k = 0; k < cls.size(); ++k) logsum[k] += log_likelihood(cls[k], pi, tr);
    }
    double top = *std::max_element(logsum.begin(), logsum.end()), z = 0.0;
    std::vector<double> w(cls.size());
    for (std::size_t k = 0; k < cls.size(); ++k) z += (w[k] = std::exp(eta * (logsum[k] - top)));
    for (std::size_t k = 0; k < cls.size(); ++k) EXPECT_NEAR(b.weights[k], w[k] / z, 1e-12);
}

TEST(TemperedAggregation, ExactCoverMatchesFiniteMode) {
    auto cls = make_random_class(6, 2, 2, 2, 3, 1.0);
    auto cover = exact_cover(cls);
    auto pc = PolicyClass::all(cls.shape());
    Rng rng(2);
    Belief a = Belief::uniform(3), b = Belief::uniform(3);
    for (int t = 0; t < 10; ++t) {
        const Policy& pi = pc[rng.below(pc.size())];
        auto tr = simulate(cls[0], pi, rng);
        a = ta_update(a, cls, pi, tr, LearningRates{});
        b = ta_update(b, cover, pi, tr, LearningRates{});
    }
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.weights[k], b.weights[k], 1e-14);
}

TEST(TemperedAggregation, CoverZeroLikelihoodIsAnError) {
    Shape sh{2, 1, 1};
    ModelClass cls({Model(sh, {1.0, 0.0}, {}, {0.0, 0.0})});
    auto cover = exact_cover(cls);
    EXPECT_THROW(ta_update(Belief::uniform(1), cover, Policy{{0, 0}}, coin_obs(1), LearningRates{}), ValidationError);
}

TEST(OptimisticPosterior, Examples) {
    auto cls = coin_class();
    Policy pi{{0, 0}};
    LearningRates r{0.2, 0.1};
    auto ta = ta_update(Belief::uniform(2), cls, pi, coin_obs(0), r);
    auto eq = ops_update(Belief::uniform(2), cls, pi, coin_obs(0), r, 2.0, {0.4, 0.4});
    EXPECT_NEAR(eq.weights[0], ta.weights[0], 1e-15);

    auto opt = ops_update(Belief::uniform(2), cls, pi, coin_obs(0), r, 2.0, {1.0, 0.0});
    double odds_ta = ta.weights[0] / ta.weights[1], odds = opt.weights[0] / opt.weights[1];
    EXPECT_NEAR(odds / odds_ta, std::exp(0.5), 1e-12);

    auto flat = ops_update(Belief::uniform(2), cls, pi, coin_obs(0), r, 1e12, {1.0, 0.0});
    EXPECT_NEAR(flat.weights[0], ta.weights[0], 1e-12);
    EXPECT_THROW(ops_update(Belief::uniform(2), cls, pi, coin_obs(0), r, 0.0, {1.0, 0.0}), ValidationError);
}

TEST(OMLE, LogLikelihoodExamples) {
    auto cls = coin_class();
    EXPECT_EQ(omle_loglik(cls[0], {}), 0.0);
    std::vector<Observation> h{{Policy{{0, 0}}, coin_obs(1)}};
    EXPECT_NEAR(omle_loglik(cls[0], h), std::log(0.9), 1e-15);
    EXPECT_NEAR(omle_loglik(cls[1], h), std::log(0.1), 1e-15);

    // Deterministic chain with mean rewards: only the likelihood term remains.
    Shape sh{2, 1, 3};
    std::vector<double> P{0, 1, 0, 1, 0, 1, 0, 1}, R{0.1, 0.1, 0.2, 0.2, 0.3, 0.3};
    Model chain(sh, {1.0, 0.0}, P, R);
    Policy pi{std::vector<int>(6, 0)};
    Rng rng(1);
    std::vector<Observation> hist;
    for (int t = 0; t < 5; ++t) hist.push_back({pi, simulate(chain, pi, rng)});
    EXPECT_EQ(omle_loglik(chain, hist), 0.0);
}

TEST(OMLE, ConfidenceSetExamples) {
    auto cls = coin_class();
    std::vector<Observation> h{{Policy{{0, 0}}, coin_obs(1)}};
    EXPECT_EQ(omle_confidence_set(cls, h, 1.0), (std::vector<std::size_t>{0}));
    EXPECT_EQ(omle_confidence_set(cls, h, 1e9).size(), 2u);
    EXPECT_EQ(omle_confidence_set(cls, {}, 0.0).size(), 2u);
    EXPECT_THROW(omle_confidence_set(cls, h, -1.0), ValidationError);
}

TEST(EstimationLedger, Accumulates) {
    EstimationLedger L;
    L.push(0.1, 0.05);
    L.push(0.0, 0.0);
    L.push(0.2, 0.1);
    EXPECT_NEAR(L.cum_rl, 0.3, 1e-15);
    EXPECT_NEAR(L.cum_h, 0.15, 1e-15);
    EXPECT_EQ(L.rounds(), 3u);
    EXPECT_THROW(L.push(-0.1, 0.0), ValidationError);
}
