#include "dec/worlds.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dec;

namespace {

Policy random_policy(const Shape& sh, Rng& rng) {
    Policy p;
    p.actions.resize(static_cast<std::size_t>(sh.S) * sh.H);
    for (auto& a : p.actions) a = static_cast<int>(rng.below(sh.A));
    return p;
}

// Joint law of (o, r) under the Bernoulli channel, squared Hellinger by enumeration.
double joint_hellinger_bernoulli(const Model& m, const Model& mb, const Policy& pi) {
    const int H = m.shape().H;
    double total = 0.0;
    oracle::all_sequences(m.shape(), [&](const oracle::Step& o) {
        double p = oracle::prob(m, pi, o), q = oracle::prob(mb, pi, o);
        if (p == 0.0 && q == 0.0) return;
        for (int mask = 0; mask < (1 << H); ++mask) {
            double pr = p, qr = q;
            for (int h = 0; h < H; ++h) {
                double a = oracle::reward(m, h, o.s[h], o.a[h]), b = oracle::reward(mb, h, o.s[h], o.a[h]);
                bool one = (mask >> h) & 1;
                pr *= one ? a : 1.0 - a;
                qr *= one ? b : 1.0 - b;
            }
            double d = std::sqrt(pr) - std::sqrt(qr);
            total += d * d;
        }
    });
    return total;
}

} // namespace

TEST(Hellinger, Examples) {
    std::vector<double> p{0.2, 0.3, 0.5};
    EXPECT_DOUBLE_EQ(hellinger_sq(p, p), 0.0);
    EXPECT_DOUBLE_EQ(hellinger_sq(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 2.0);
    // Closed form of the definition; the spec rounds this to 0.10265.
    double expected = std::pow(std::sqrt(0.5) - std::sqrt(0.8), 2) + std::pow(std::sqrt(0.5) - std::sqrt(0.2), 2);
    EXPECT_NEAR(hellinger_sq(std::vector<double>{0.5, 0.5}, std::vector<double>{0.8, 0.2}), expected, 1e-15);
    EXPECT_NEAR(expected, 0.1026334, 1e-7);
}

TEST(Hellinger, Errors) {
    EXPECT_THROW(hellinger_sq(std::vector<double>{1}, std::vector<double>{0.5, 0.5}), ValidationError);
    EXPECT_THROW(hellinger_sq(std::vector<double>{1.5, -0.5}, std::vector<double>{0.5, 0.5}), ValidationError);
    EXPECT_THROW(hellinger_sq(std::vector<double>{0.6, 0.6}, std::vector<double>{0.5, 0.5}), ValidationError);
    EXPECT_NO_THROW(hellinger_sq(std::vector<double>{0.5 + 5e-10, 0.5}, std::vector<double>{0.5, 0.5}));
}

TEST(Hellinger, SymmetricAndBounded) {
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        auto p = rng.dirichlet(4, 0.7), q = rng.dirichlet(4, 0.7);
        double a = hellinger_sq(p, q), b = hellinger_sq(q, p);
        EXPECT_DOUBLE_EQ(a, b);
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 2.0);
    }
}

TEST(TV, Examples) {
    std::vector<double> p{0.25, 0.75};
    EXPECT_DOUBLE_EQ(tv_dist(p, p), 0.0);
    EXPECT_DOUBLE_EQ(tv_dist(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 1.0);
    EXPECT_NEAR(tv_dist(std::vector<double>{0.5, 0.5}, std::vector<double>{0.8, 0.2}), 0.3, 1e-15);
}

TEST(ModelValidation, RejectsBadInputs) {
    Shape sh{2, 1, 2};
    std::vector<double> init{0.5, 0.5}, P{0.5, 0.5, 1.0, 0.0}, R{0.1, 0.1, 0.1, 0.1};
    EXPECT_NO_THROW(Model(sh, init, P, R));
    EXPECT_THROW(Model(sh, {0.5, 0.6}, P, R), ValidationError);
    EXPECT_THROW(Model(sh, init, {0.5, 0.6, 1.0, 0.0}, R), ValidationError);
    EXPECT_THROW(Model(sh, init, {1.2, -0.2, 1.0, 0.0}, R), ValidationError);
    EXPECT_THROW(Model(sh, init, P, {0.6, 0.6, 0.6, 0.6}), ValidationError);
    EXPECT_THROW(Model(sh, init, P, {0.1, 0.1, 0.1}), ValidationError);
    EXPECT_THROW(Model(Shape{0, 1, 1}, {}, {}, {}), ValidationError);
}

TEST(ModelValidation, RewardSumUsesReachableTrajectories) {
    // State 1 is unreachable under the kernel, so its large reward is allowed.
    Shape sh{2, 1, 2};
    Model m(sh, {1.0, 0.0}, {1.0, 0.0, 0.0, 1.0}, {0.5, 0.9, 0.5, 0.9});
    EXPECT_NEAR(m.max_reward_sum(), 1.0, 1e-15);
}

TEST(DRL, Examples) {
    auto cls = make_random_class(11, 2, 2, 3, 2, 1.0);
    Policy pi{std::vector<int>(6, 1)};
    EXPECT_NEAR(d_rl_sq(cls[0], cls[0], pi), 0.0, 1e-15);

    auto bandit = make_bandit_class({{0.3}, {0.5}});
    EXPECT_NEAR(d_rl_sq(bandit[0], bandit[1], Policy{{0}}), 0.04, 1e-15);
    EXPECT_THROW(d_rl_sq(cls[0], bandit[0], pi), ValidationError);
}

TEST(DRL, MatchesEnumeration) {
    Rng rng(5);
    for (int k = 0; k < 40; ++k) {
        auto cls = make_random_class(100 + k, 2, 2, 3, 2, 0.6);
        auto pi = random_policy(cls.shape(), rng);
        EXPECT_NEAR(d_rl_sq(cls[0], cls[1], pi), oracle::drl(cls[0], cls[1], pi), 1e-12);
        EXPECT_NEAR(d_tilde(cls[0], cls[1], pi), oracle::dtilde(cls[0], cls[1], pi), 1e-12);
        EXPECT_NEAR(policy_value(cls[0], pi), oracle::value(cls[0], pi), 1e-12);
    }
}

TEST(DRL, AlmostSymmetricAndValueBound) {
    Rng rng(8);
    for (int k = 0; k < 150; ++k) {
        auto cls = make_random_class(500 + k, 2, 2, 3, 2, 0.5);
        auto pi = random_policy(cls.shape(), rng);
        double fwd = d_rl_sq(cls[0], cls[1], pi), bwd = d_rl_sq(cls[1], cls[0], pi);
        EXPECT_LE(bwd, 5.0 * fwd + 1e-12);
        double dv = std::abs(policy_value(cls[0], pi) - policy_value(cls[1], pi));
        EXPECT_LE(dv, std::sqrt(4.0) * std::sqrt(fwd) + 1e-12);
    }
}

TEST(DRL, BoundedByJointLawHellinger) {
    Rng rng(9);
    for (int k = 0; k < 60; ++k) {
        auto base = make_random_class(900 + k, 2, 2, 2, 2, 0.8);
        std::vector<Model> ms;
        for (const auto& m : base.models())
            ms.emplace_back(m.shape(), m.initial(), m.transitions(), m.rewards(), RewardChannel::BernoulliScaled);
        auto pi = random_policy(base.shape(), rng);
        EXPECT_LE(d_rl_sq(ms[0], ms[1], pi), 5.0 * joint_hellinger_bernoulli(ms[0], ms[1], pi) + 1e-12);
    }
}

TEST(DTilde, Examples) {
    auto bandit = make_bandit_class({{0.3}, {0.5}});
    EXPECT_NEAR(d_tilde(bandit[0], bandit[1], Policy{{0}}), 0.2, 1e-15);
    EXPECT_NEAR(d_tilde(bandit[0], bandit[0], Policy{{0}}), 0.0, 1e-15);
}

TEST(DTilde, EnumerationCapReported) {
    auto cls = make_random_class(1, 3, 1, 12, 2, 1.0); // 3^12 > 65536 trajectories
    Policy pi{std::vector<int>(36, 0)};
    try {
        d_tilde(cls[0], cls[1], pi);
        FAIL() << "expected the cap to trigger";
    } catch (const CapacityError& e) {
        EXPECT_NE(std::string(e.what()).find("65536"), std::string::npos);
    }
}

TEST(PolicyValue, Examples) {
    Shape sh{2, 1, 3};
    // Deterministic chain 0 -> 1 -> 1 paying 1 at the last step.
    std::vector<double> P{0, 1, 0, 1, 0, 1, 0, 1};
    std::vector<double> R(6, 0.0);
    R[2 * 2 + 1] = 1.0;
    Model chain(sh, {1.0, 0.0}, P, R);
    Policy pi{std::vector<int>(6, 0)};
    EXPECT_DOUBLE_EQ(policy_value(chain, pi), 1.0);
    Model zero(sh, {1.0, 0.0}, P, std::vector<double>(6, 0.0));
    EXPECT_DOUBLE_EQ(policy_value(zero, pi), 0.0);
}

TEST(OptimalPolicy, TieBreakAndValueIteration) {
    auto cls = make_random_class(4, 2, 2, 2, 1, 1.0);
    auto pc = PolicyClass::all(cls.shape());
    EXPECT_EQ(pc.size(), 16u);

    PolicyClass single{cls.shape(), {pc[5]}};
    EXPECT_EQ(optimal_policy(cls[0], single).policy, pc[5]);

    Model flat(cls.shape(), cls[0].initial(), cls[0].transitions(), std::vector<double>(8, 0.25));
    EXPECT_EQ(optimal_policy(flat, pc).index, 0u);

    for (int k = 0; k < 20; ++k) {
        auto c = make_random_class(40 + k, 2, 2, 3, 1, 0.7);
        auto all = PolicyClass::all(c.shape());
        auto best = optimal_policy(c[0], all);
        auto vi = value_iteration(c[0]);
        EXPECT_NEAR(best.value, vi.value, 1e-12);
        EXPECT_NEAR(policy_value(c[0], vi.greedy), vi.value, 1e-12);
    }
    EXPECT_THROW(optimal_policy(cls[0], PolicyClass{cls.shape(), {}}), ValidationError);
}

TEST(PolicyClass, EnumerationOrderAndCap) {
    Shape sh{1, 3, 2};
    auto pc = PolicyClass::all(sh);
    ASSERT_EQ(pc.size(), 9u);
    EXPECT_EQ(pc[0].actions, (std::vector<int>{0, 0}));
    EXPECT_EQ(pc[1].actions, (std::vector<int>{1, 0}));
    EXPECT_EQ(pc[3].actions, (std::vector<int>{0, 1}));
    EXPECT_THROW(PolicyClass::all(Shape{4, 4, 4}, 1000), CapacityError);
}

TEST(Simulate, DeterministicGivenSeed) {
    auto cls = make_random_class(2, 3, 2, 4, 1, 0.5);
    Policy pi{std::vector<int>(12, 1)};
    Rng a(77), b(77);
    auto t1 = simulate(cls[0], pi, a), t2 = simulate(cls[0], pi, b);
    EXPECT_EQ(t1.states, t2.states);
    EXPECT_EQ(t1.rewards, t2.rewards);
    EXPECT_GT(log_likelihood(cls[0], pi, t1), kNegInf);
}
