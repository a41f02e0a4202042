#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "xspec/error.hpp"
#include "xspec/loss.hpp"

using namespace xspec;

namespace {

const ContrastiveConfig kUnit{};

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
    return v;
}

// z2 placed at distance d from z1 along a random direction.
std::vector<double> at_distance(const std::vector<double>& z1, double d, Rng& rng) {
    std::vector<double> dir = random_vec(rng, z1.size());
    double n = 0.0;
    for (double v : dir) n += v * v;
    n = std::sqrt(n);
    std::vector<double> z2 = z1;
    for (std::size_t k = 0; k < z1.size(); ++k) z2[k] += d * dir[k] / n;
    return z2;
}

}  // namespace

TEST(Distance, HandValues) {
    const std::vector<double> a{0, 0}, b{3, 4};
    EXPECT_EQ(pair_distance(a, b), 5.0);
    EXPECT_EQ(pair_distance(b, a), 5.0);
    EXPECT_EQ(pair_distance(b, b), 0.0);
    EXPECT_THROW(pair_distance(a, std::vector<double>{1.0}), Error);
}

TEST(Loss, HandEvaluatedCases) {
    const std::vector<double> o{0.0, 0.0};
    EXPECT_EQ(contrastive_loss(o, o, 0, kUnit), 0.0);
    EXPECT_EQ(contrastive_loss(o, std::vector<double>{0.5, 0.0}, 0, kUnit), 0.125);
    EXPECT_EQ(contrastive_loss(o, std::vector<double>{2.0, 0.0}, 1, kUnit), 0.0);
    EXPECT_EQ(contrastive_loss(o, std::vector<double>{0.25, 0.0}, 1, kUnit), 0.28125);
}

TEST(Loss, BatchMean) {
    const std::vector<double> o{0.0}, half{0.5}, quarter{0.25};
    const EmbeddingPair pairs[] = {{o, half, 0}, {o, quarter, 1}};
    EXPECT_EQ(batch_loss(pairs, kUnit), 0.203125);
    EXPECT_EQ(batch_loss(std::span(pairs, 1), kUnit), 0.125);
    const EmbeddingPair zero[] = {{half, half, 0}, {o, o, 0}};
    EXPECT_EQ(batch_loss(zero, kUnit), 0.0);
    EXPECT_THROW(batch_loss(std::span<const EmbeddingPair>{}, kUnit), Error);
}

TEST(Loss, RejectsBadInput) {
    const std::vector<double> a{1.0}, b{1.0, 2.0};
    EXPECT_THROW(contrastive_loss(a, b, 0, kUnit), Error);
    EXPECT_THROW(contrastive_loss(a, a, 2, kUnit), Error);
    EXPECT_THROW((ContrastiveConfig{0.0, 1e-12}.validate()), Error);
}

TEST(Grad, HandCases) {
    const auto g = contrastive_grad(std::vector<double>{1, 0}, std::vector<double>{0, 0}, 0, kUnit);
    EXPECT_EQ(g.z1, (std::vector<double>{1, 0}));
    EXPECT_EQ(g.z2, (std::vector<double>{-1, 0}));
    const auto far = contrastive_grad(std::vector<double>{3, 0}, std::vector<double>{0, 0}, 1, kUnit);
    EXPECT_EQ(far.z1, (std::vector<double>{0, 0}));
    const auto same = contrastive_grad(std::vector<double>{1, 1}, std::vector<double>{1, 1}, 1, kUnit);
    EXPECT_EQ(same.z1, (std::vector<double>{0, 0}));
}

TEST(Grad, FiniteDifferences) {
    Rng rng(21);
    for (int i = 0; i < 40; ++i) {
        const int y = i % 2;
        const ContrastiveConfig cfg{rng.uniform(0.5, 2.0), 1e-12};
        const std::vector<double> z1 = random_vec(rng, 6);
        // Keep away from the kinks at D = 0 and D = m.
        const double d = y ? rng.uniform(0.1, 0.9) * cfg.margin : rng.uniform(0.1, 3.0);
        std::vector<double> z2 = at_distance(z1, d, rng);
        const auto g = contrastive_grad(z1, z2, y, cfg);
        const double h = 1e-6;
        for (int side = 0; side < 2; ++side) {
            std::vector<double> a = z1, b = z2;
            std::vector<double>& v = side ? b : a;
            const std::vector<double>& analytic = side ? g.z2 : g.z1;
            for (std::size_t k = 0; k < v.size(); ++k) {
                const double keep = v[k];
                v[k] = keep + h;
                const double up = contrastive_loss(a, b, y, cfg);
                v[k] = keep - h;
                const double down = contrastive_loss(a, b, y, cfg);
                v[k] = keep;
                const double numeric = (up - down) / (2 * h);
                EXPECT_LT(std::abs(numeric - analytic[k]) / std::max({std::abs(numeric), std::abs(analytic[k]), 1e-6}),
                          1e-6);
            }
        }
    }
}

TEST(Properties, NonnegativeAndZeroSets) {
    Rng rng(22);
    for (int i = 0; i < 200; ++i) {
        const auto z1 = random_vec(rng, 4);
        const double d = rng.uniform(0.0, 2.0);
        const auto z2 = at_distance(z1, d, rng);
        const double dist = pair_distance(z1, z2);
        const double g = contrastive_loss(z1, z2, 0, kUnit);
        const double im = contrastive_loss(z1, z2, 1, kUnit);
        EXPECT_GE(g, 0.0);
        EXPECT_GE(im, 0.0);
        EXPECT_EQ(im == 0.0, dist >= 1.0);
        EXPECT_EQ(g == 0.0, dist == 0.0);
    }
}

TEST(Properties, TranslationInvariance) {
    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
        const auto z1 = random_vec(rng, 5), z2 = random_vec(rng, 5, 0.3), t = random_vec(rng, 5, 10.0);
        auto s1 = z1, s2 = z2;
        for (std::size_t k = 0; k < 5; ++k) {
            s1[k] += t[k];
            s2[k] += t[k];
        }
        for (int y : {0, 1}) {
            EXPECT_NEAR(contrastive_loss(z1, z2, y, kUnit), contrastive_loss(s1, s2, y, kUnit), 1e-12);
            const auto a = contrastive_grad(z1, z2, y, kUnit), b = contrastive_grad(s1, s2, y, kUnit);
            for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(a.z1[k], b.z1[k], 1e-12);
        }
    }
}

TEST(Properties, AntisymmetricGradient) {
    Rng rng(24);
    for (int i = 0; i < 100; ++i) {
        const auto z1 = random_vec(rng, 3), z2 = random_vec(rng, 3);
        const auto g = contrastive_grad(z1, z2, i % 2, kUnit);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(g.z1[k], -g.z2[k]);
    }
}

TEST(Properties, DescentDirection) {
    Rng rng(25);
    for (int i = 0; i < 100; ++i) {
        const int y = i % 2;
        const auto z1 = random_vec(rng, 4);
        const auto z2 = at_distance(z1, rng.uniform(0.1, 0.9), rng);
        const auto g = contrastive_grad(z1, z2, y, kUnit);
        auto a = z1, b = z2;
        const double step = 1e-4;
        for (std::size_t k = 0; k < 4; ++k) {
            a[k] -= step * g.z1[k];
            b[k] -= step * g.z2[k];
        }
        if (y == 0) EXPECT_LT(pair_distance(a, b), pair_distance(z1, z2));
        else EXPECT_GT(pair_distance(a, b), pair_distance(z1, z2));
    }
}
