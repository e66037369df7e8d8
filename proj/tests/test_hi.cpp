#include "hybridhi/error.hpp"
#include "hybridhi/hi.hpp"
#include "hybridhi/metrics.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hybridhi;
using namespace hybridhi::hi;

namespace {

std::vector<ingest::WindowMeta> per_cycle_meta(int units, int cycles) {
    std::vector<ingest::WindowMeta> meta;
    for (int u = 0; u < units; ++u)
        for (int c = 0; c < cycles; ++c) meta.push_back({u, c, c, 1});
    return meta;
}

}  // namespace

TEST(compute_residual, examples) {
    const std::size_t n = 2, p = 3, S = 4;
    std::vector<double> x(n * p * S);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& v : x) v = u(rng);

    auto r = compute_residual(x, x, {}, n, p, S);
    EXPECT_EQ(r.cwiseAbs().maxCoeff(), 0.0);

    auto shifted = x;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < S; ++s) shifted[(i * p + 1) * S + s] += 0.3;
    r = compute_residual(x, shifted, {}, n, p, S);
    for (Eigen::Index i = 0; i < 2; ++i) {
        EXPECT_NEAR(r(i, 0), 0.0, 1e-12);
        EXPECT_NEAR(r(i, 1), 0.3, 1e-12);
        EXPECT_NEAR(r(i, 2), 0.0, 1e-12);
    }

    auto mixed = x;
    for (std::size_t s = 0; s < S; ++s) mixed[(0 * p + 2) * S + s] += (s % 2 ? 0.1 : -0.3);
    r = compute_residual(x, mixed, {}, n, p, S);
    EXPECT_NEAR(r(0, 2), 0.2, 1e-12);
}

TEST(compute_residual, masked_steps_excluded) {
    const std::vector<double> x{0, 0, 0, 0}, xh{1, 1, 5, 5};
    const std::vector<std::uint8_t> mask{1, 1, 0, 0};
    const auto r = compute_residual(x, xh, mask, 1, 1, 4);
    EXPECT_DOUBLE_EQ(r(0, 0), 1.0);
    EXPECT_THROW(compute_residual(x, std::vector<double>{1}, {}, 1, 1, 4), ShapeError);
}

TEST(fit_pca, zero_variance_is_an_error) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(10, 3, 0.4);
    EXPECT_THROW(fit_pca(r), DataError);
}

TEST(fit_pca, recovers_dominant_direction) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 1);
    Eigen::Vector3d d(1, -2, 0.5);
    d.normalize();
    Eigen::MatrixXd r(400, 3);
    for (int i = 0; i < 400; ++i) r.row(i) = (5 * n(rng)) * d.transpose() + 0.05 * Eigen::RowVector3d(n(rng), n(rng), n(rng));
    const auto fit = fit_pca(r);
    EXPECT_NEAR(std::abs(fit.direction.dot(d)), 1.0, 1e-3);
    // largest-magnitude entry is positive after the sign convention
    EXPECT_GT(fit.direction(1), 0.0);
    EXPECT_TRUE(fit.flipped != (d(1) > 0));
}

TEST(normalizer, constant_series_map_to_one) {
    std::vector<CycleSeries> s{{0, {0, 1, 2}, {0.4, 0.4, 0.4}}};
    const auto n = fit_normalizer(s);
    EXPECT_TRUE(n.degenerate());
    for (double h : n.apply(s[0]).h) EXPECT_EQ(h, 1.0);
}

TEST(latent_to_hi, examples) {
    const auto meta = per_cycle_meta(1, 5);
    const std::vector<double> dec{1.0, 0.8, 0.5, 0.3, 0.0};
    auto series = per_cycle_average(dec, meta);
    auto n = fit_normalizer(series);
    EXPECT_EQ(n.sign, 1.0);
    const auto tr = latent_to_hi(dec, meta, n);
    for (std::size_t i = 0; i < dec.size(); ++i) EXPECT_NEAR(tr[0].h[i], dec[i], 1e-12);

    const std::vector<double> inc{0.0, 0.2, 0.5, 0.7, 1.0};
    series = per_cycle_average(inc, meta);
    n = fit_normalizer(series);
    EXPECT_EQ(n.sign, -1.0);
    const auto flipped = latent_to_hi(inc, meta, n);
    for (std::size_t i = 0; i < inc.size(); ++i) EXPECT_NEAR(flipped[0].h[i], 1.0 - inc[i], 1e-12);

    const std::vector<double> span{3.0, 1.0, 0.5, -1.0, -2.0};
    n = fit_normalizer(per_cycle_average(span, meta));
    const auto mapped = latent_to_hi(span, meta, n);
    for (std::size_t i = 0; i < span.size(); ++i) EXPECT_NEAR(mapped[0].h[i], (span[i] + 2) / 5, 1e-12);
}

TEST(latent_to_hi, test_units_are_clipped) {
    const auto meta = per_cycle_meta(1, 3);
    const auto n = fit_normalizer(per_cycle_average(std::vector<double>{1.0, 0.5, 0.0}, meta));
    const auto tr = latent_to_hi(std::vector<double>{1.5, 0.5, -0.5}, meta, n);
    EXPECT_EQ(tr[0].h, (std::vector<double>{1.0, 0.5, 0.0}));
}

TEST(orientation, single_cycle_units_abstain) {
    std::vector<CycleSeries> s{{0, {0}, {5.0}}, {1, {0, 1, 2}, {0.0, 1.0, 2.0}}};
    EXPECT_EQ(orientation(s), -1.0);
}

TEST(per_cycle_average, groups_by_unit_and_last_cycle) {
    std::vector<ingest::WindowMeta> meta{{3, 0, 0, 1}, {3, 0, 0, 1}, {3, 1, 0, 1}, {1, 0, 0, 1}};
    const auto s = per_cycle_average(std::vector<double>{1, 3, 5, 7}, meta);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].unit, 3);
    EXPECT_EQ(s[0].value, (std::vector<double>{2, 5}));
    EXPECT_EQ(s[1].value, (std::vector<double>{7}));
}

TEST(residual_to_hi, linear_growth_gives_linear_hi) {
    const int units = 4, cycles = 50;
    const auto meta = per_cycle_meta(units, cycles);
    Eigen::MatrixXd r(units * cycles, 3);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0, 0.002);
    for (int u = 0; u < units; ++u)
        for (int c = 0; c < cycles; ++c) {
            const double g = 0.01 * c;
            r.row(u * cycles + c) << g + n(rng), 2 * g + n(rng), 0.5 * g + n(rng);
        }
    const auto pca = fit_pca(r);
    const Eigen::VectorXd proj = pca.project(r);
    const auto norm = fit_normalizer(per_cycle_average(std::span<const double>(proj.data(), proj.size()), meta));
    const auto hi = residual_to_hi(r, meta, pca, norm);
    ASSERT_EQ(hi.size(), 4u);
    for (const auto& tr : hi) {
        EXPECT_GE(metrics::trendability(tr.h, tr.t), 0.99);
        EXPECT_GT(tr.h.front(), tr.h.back());
        for (std::size_t i = 0; i < tr.h.size(); ++i) EXPECT_NEAR(tr.h[i], 1.0 - tr.t[i] / (cycles - 1), 0.05);
    }
}

TEST(to_soh, examples) {
    EXPECT_DOUBLE_EQ(to_soh(1.0), 100.0);
    EXPECT_DOUBLE_EQ(to_soh(0.0), 60.0);
    EXPECT_DOUBLE_EQ(to_soh(0.5), 80.0);
}

TEST(hi_artifacts, round_trip) {
    const auto dir = testutil::scratch_dir();
    HiNormalizer n{-1.0, -3.5, 0.25};
    save_normalizer(n, dir / "n.json");
    const auto m = load_normalizer(dir / "n.json");
    EXPECT_EQ(m.sign, n.sign);
    EXPECT_EQ(m.lo, n.lo);
    EXPECT_EQ(m.hi, n.hi);

    PcaFit p;
    p.mean = Eigen::Vector2d(0.1, 0.2);
    p.direction = Eigen::Vector2d(0.6, 0.8);
    p.flipped = true;
    save_pca(p, dir / "p.json");
    const auto q = load_pca(dir / "p.json");
    EXPECT_EQ(q.mean, p.mean);
    EXPECT_EQ(q.direction, p.direction);
    EXPECT_TRUE(q.flipped);

    std::vector<HITrajectory> trs{{2, {0, 1, 2}, {1.0, 0.5, 0.125}}, {5, {0, 1}, {0.9, 0.1}}};
    write_hi_csv(trs, dir / "hi.csv");
    const auto back = read_hi_csv(dir / "hi.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].unit, 2);
    EXPECT_EQ(back[0].h, trs[0].h);
    EXPECT_EQ(back[1].t, trs[1].t);
}
