#include "dec/covering.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dec;

namespace {

LinearMixtureFeatures two_point_features(int S, int A, const std::vector<double>& q1, const std::vector<double>& q2) {
    LinearMixtureFeatures f;
    f.shape = Shape{S, A, 2};
    f.d = 2;
    f.initial.assign(S, 1.0 / S);
    f.rewards.assign(static_cast<std::size_t>(2) * S * A, 0.2);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2) {
                f.phi.push_back(q1[s2]);
                f.phi.push_back(q2[s2]);
            }
    return f;
}

} // namespace

TEST(TabularCover, RoundingExamples) {
    EXPECT_NEAR(optimistic_round(0.46, 0.1), 0.5, 1e-15);
    EXPECT_NEAR(optimistic_round(0.3, 0.1), 0.3, 1e-15);
    EXPECT_GE(optimistic_round(0.3, 0.1), 0.3);
    EXPECT_EQ(optimistic_round(0.0, 0.1), 0.0);
    auto cls = make_random_class(1, 2, 2, 2, 2, 1.0);
    EXPECT_THROW(tabular_cover(cls, 0.0), ValidationError);
    EXPECT_THROW(tabular_cover(cls, 1.5), ValidationError);
}

TEST(TabularCover, SingleModelIsCovered) {
    auto cls = make_random_class(2, 2, 2, 3, 1, 1.0);
    auto cover = tabular_cover(cls, 0.5);
    ASSERT_EQ(cover.size(), 1u);
    auto rep = verify_cover(cover, cls, PolicyClass::all(cls.shape()));
    EXPECT_TRUE(rep.ok);
    EXPECT_EQ(rep.covering[0], 0u);
}

TEST(TabularCover, RandomClassesVerifyAndRowMassBound) {
    for (int k = 0; k < 10; ++k) {
        auto cls = make_random_class(30 + k, 2, 2, 3, 6, 0.8);
        const Shape& sh = cls.shape();
        for (double rho1 : {0.3, 0.7, 1.0}) {
            auto cover = tabular_cover(cls, rho1);
            auto pc = PolicyClass::all(sh);
            auto rep = verify_cover(cover, cls, pc);
            EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations.front());
            EXPECT_LE(rep.max_mass_excess, rho1 * rho1);
            EXPECT_LE(rep.max_reward_gap, rho1);
            const auto& P = cover.optimistic_transitions[0];
            for (std::size_t r = 0; r * sh.S < P.size(); ++r) {
                double s = 0.0;
                for (int j = 0; j < sh.S; ++j) s += P[r * sh.S + j];
                EXPECT_GE(s, 1.0 - 1e-12);
                EXPECT_LE(s, 1.0 + sh.S * cover.grid_step + 1e-12);
            }
            // Domination plus the mass bound gives a TV bound of rho1^2.
            for (std::size_t m = 0; m < cls.size(); ++m)
                for (std::size_t i = 0; i < pc.size(); i += 7)
                    EXPECT_LE(tv_traj(cls[m], cover.representatives[rep.covering[m]], pc[i]), rho1 * rho1 + 1e-12);
        }
    }
}

TEST(TabularCover, CoarseCoverMerges) {
    // Two models that differ by less than a grid step share a representative.
    Shape sh{2, 1, 2};
    std::vector<double> R(4, 0.1);
    Model a(sh, {0.5, 0.5}, {0.50, 0.50, 0.3, 0.7}, R);
    Model b(sh, {0.5, 0.5}, {0.501, 0.499, 0.3, 0.7}, R);
    ModelClass cls({a, b});
    auto cover = tabular_cover(cls, 1.0);
    EXPECT_EQ(cover.size(), 1u);
    EXPECT_EQ(cover.covers[0].size(), 2u);
    EXPECT_TRUE(verify_cover(cover, cls, PolicyClass::all(sh)).ok);
    EXPECT_EQ(tabular_cover(cls, 0.05).size(), 2u);
}

TEST(VerifyCover, ExactCoverAndPerturbation) {
    auto cls = make_random_class(7, 2, 2, 2, 3, 1.0);
    auto pc = PolicyClass::all(cls.shape());
    auto exact = exact_cover(cls);
    EXPECT_EQ(exact.rho, 0.0);
    EXPECT_TRUE(verify_cover(exact, cls, pc).ok);

    auto cover = tabular_cover(cls, 0.5);
    std::size_t k = cover.assignment[0];
    cover.optimistic_transitions[k][5] = cls[0].transitions()[5] - 0.01;
    // Keep the other members away from this representative.
    auto rep = verify_cover(cover, ModelClass({cls[0]}), pc);
    EXPECT_FALSE(rep.ok);
    bool named = false;
    for (const auto& v : rep.violations) named = named || v.find("h=0, s=1, a=0, s'=1") != std::string::npos;
    EXPECT_TRUE(named);
}

TEST(VerifyCover, RewardGapViolation) {
    auto cls = make_random_class(8, 1, 2, 2, 1, 1.0);
    auto cover = exact_cover(cls);
    std::vector<double> R = cls[0].rewards();
    R[0] = std::min(0.5, R[0] + 0.3);
    ModelClass moved({Model(cls.shape(), cls[0].initial(), cls[0].transitions(), R)});
    auto rep = verify_cover(cover, moved, PolicyClass::all(cls.shape()));
    EXPECT_FALSE(rep.ok);
}

TEST(LinearMixtureCover, CountsAndSingleton) {
    auto f = two_point_features(2, 1, {1.0, 0.0}, {0.0, 1.0});
    const double rho1 = 0.5;
    auto cover = linear_mixture_cover(f, 1.0, rho1);
    const double step = rho1 * rho1 / (2.0 * std::numbers::e * 2 * 2);
    const long N = static_cast<long>(std::ceil(1.0 / step));
    EXPECT_EQ(cover.grid_cells, static_cast<std::size_t>(2 * N * 2 * N));
    EXPECT_GT(cover.size(), 0u);
    EXPECT_LE(cover.size(), cover.grid_cells);

    auto single = linear_mixture_cover(f, 0.0, rho1);
    EXPECT_EQ(single.grid_cells, 1u);
    EXPECT_EQ(single.log_full_grid, 0.0);
    EXPECT_EQ(single.size(), 0u); // theta = 0 gives the zero kernel, which no model has
}

TEST(LinearMixtureCover, IndicatorFeaturesMatchTabularRounding) {
    auto f = two_point_features(2, 2, {1.0, 0.0}, {0.0, 1.0});
    std::vector<std::vector<double>> thetas{{0.3141, 0.6859}, {0.52, 0.48}};
    auto cls = make_linear_mixture_class(f, thetas);
    auto cover = linear_mixture_cover(f, 1.0, 0.6, thetas);
    for (std::size_t m = 0; m < thetas.size(); ++m) {
        const auto& P = cover.optimistic_transitions[cover.assignment[m]];
        for (std::size_t i = 0; i < P.size(); ++i)
            EXPECT_NEAR(P[i], optimistic_round(cls[m].transitions()[i], cover.grid_step), 1e-12);
    }
}

TEST(LinearMixtureCover, MembersVerify) {
    auto f = two_point_features(3, 2, {0.6, 0.3, 0.1}, {0.1, 0.2, 0.7});
    Rng rng(3);
    std::vector<std::vector<double>> thetas;
    for (int k = 0; k < 12; ++k) {
        double w = rng.uniform();
        thetas.push_back({w, 1.0 - w});
    }
    auto cls = make_linear_mixture_class(f, thetas);
    for (double rho1 : {0.4, 0.9}) {
        auto cover = linear_mixture_cover(f, 1.0, rho1, thetas);
        auto rep = verify_cover(cover, cls, PolicyClass::all(cls.shape()));
        EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations.front());
    }
    EXPECT_THROW(linear_mixture_cover(f, 0.5, 0.5, {{0.9, 0.1}}), ValidationError);
}
