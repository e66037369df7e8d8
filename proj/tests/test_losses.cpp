#include "hybridhi/error.hpp"
#include "hybridhi/losses.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace hybridhi;
using namespace hybridhi::models;

TEST(loss_reconstruction, examples) {
    const std::vector<double> x{0.5, -1, 2, 3, 0, 1};
    const std::vector<std::uint8_t> full(3, 1);
    EXPECT_EQ(loss_reconstruction(x, x, full, 1, 2, 3).value, 0.0);

    const std::vector<double> zeros(6, 0.0), ones(6, 1.0);
    EXPECT_NEAR(loss_reconstruction(zeros, ones, full, 1, 2, 3).value, 1.0, 1e-12);

    std::vector<double> half = zeros;
    half[0] = half[2] = half[4] = 2.0;
    EXPECT_NEAR(loss_reconstruction(zeros, half, full, 1, 2, 3).value, 1.0, 1e-12);
}

TEST(loss_reconstruction, fully_masked_window_is_excluded) {
    const std::vector<double> x(8, 0.0);
    const std::vector<double> xh{1, 1, 1, 1, 9, 9, 9, 9};
    const std::vector<std::uint8_t> mask{1, 1, 0, 0};
    const auto l = loss_reconstruction(x, xh, mask, 2, 2, 2);
    EXPECT_NEAR(l.value, 1.0, 1e-12);
    EXPECT_EQ(l.grad[4], 0.0);
    const std::vector<std::uint8_t> none(4, 0);
    EXPECT_EQ(loss_reconstruction(x, xh, none, 2, 2, 2).value, 0.0);
    EXPECT_THROW(loss_reconstruction(x, std::vector<double>(3), mask, 2, 2, 2), ShapeError);
}

TEST(loss_correlation, examples) {
    const std::vector<double> t{0, 1, 2, 5, 9};
    std::vector<double> neg, flat(5, 0.3);
    for (double v : t) neg.push_back(-v);
    EXPECT_NEAR(loss_correlation(neg, t).value, -1.0, 1e-12);
    EXPECT_NEAR(loss_correlation(t, t).value, 1.0, 1e-12);
    const auto l = loss_correlation(flat, t);
    EXPECT_EQ(l.value, 0.0);
    for (double g : l.grad) EXPECT_EQ(g, 0.0);
}

TEST(loss_correlation, bounded) {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto b = oracles::random_loss_batch(s);
        const double r = loss_correlation(b.z, b.t).value;
        EXPECT_GE(r, -1.0 - 1e-12);
        EXPECT_LE(r, 1.0 + 1e-12);
    }
}

TEST(loss_negative_gradient, examples) {
    const std::vector<int> one(3, 0);
    EXPECT_EQ(loss_negative_gradient(std::vector<double>{3, 2, 1}, std::vector<double>{0, 1, 2}, one).value, 0.0);
    EXPECT_NEAR(loss_negative_gradient(std::vector<double>{0, 1}, std::vector<double>{0, 1}, std::vector<int>{0, 0}).value,
                1.0, 1e-12);
    EXPECT_NEAR(loss_negative_gradient(std::vector<double>{0, 1, 0.5}, std::vector<double>{0, 1, 2}, one).value, 0.5,
                1e-12);
}

TEST(loss_negative_gradient, pairs_never_cross_units) {
    const auto l = loss_negative_gradient(std::vector<double>{0, 5, 0, 5}, std::vector<double>{0, 1, 0, 1},
                                          std::vector<int>{0, 0, 1, 1});
    EXPECT_NEAR(l.value, 5.0, 1e-12);
    const auto jump = loss_negative_gradient(std::vector<double>{0, 5}, std::vector<double>{0, 1}, std::vector<int>{0, 1});
    EXPECT_TRUE(jump.starved);
    EXPECT_EQ(jump.value, 0.0);
}

TEST(loss_functional, examples) {
    const std::optional<weibull::WeibullFit> g = oracles::reference_fit();
    const std::vector<double> t{0, 5, 12, 30};
    std::vector<double> exact, up, mixed;
    for (std::size_t i = 0; i < t.size(); ++i) {
        exact.push_back((*g)(t[i]));
        up.push_back((*g)(t[i]) + 0.1);
        mixed.push_back((*g)(t[i]) + (i % 2 ? -0.4 : 0.2));
    }
    EXPECT_NEAR(loss_functional(exact, t, g).value, 0.0, 1e-12);
    EXPECT_NEAR(loss_functional(up, t, g).value, 0.1, 1e-12);
    EXPECT_NEAR(loss_functional(mixed, t, g).value, 0.3, 1e-12);
    EXPECT_THROW(loss_functional(exact, t, std::nullopt), ConfigError);
}

TEST(loss_gradients, match_central_differences_on_20_batches) {
    for (const auto& c : oracles::loss_gradient_checks(20, 100)) EXPECT_LE(c.worst, 1e-3) << c.loss;
}
