#include "hybridhi/datagen.hpp"
#include "hybridhi/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hybridhi;
using namespace hybridhi::datagen;

TEST(degradation_curve, linear_midpoint) { EXPECT_DOUBLE_EQ(degradation_curve(DegradationShape::linear, 1, 50, 100), 0.5); }

TEST(degradation_curve, start_of_life_is_one) {
    for (auto shape : {DegradationShape::linear, DegradationShape::convex, DegradationShape::concave})
        for (double e : {0.3, 1.0, 2.5}) EXPECT_DOUBLE_EQ(degradation_curve(shape, e, 0, 100), 1.0);
}

TEST(degradation_curve, convex_square) {
    const double expected = 1.0 - 0.5 * 0.5;
    EXPECT_DOUBLE_EQ(degradation_curve(DegradationShape::convex, 2, 50, 100), expected);
}

TEST(degradation_curve, end_of_life_is_zero_and_non_increasing) {
    for (auto shape : {DegradationShape::linear, DegradationShape::convex, DegradationShape::concave}) {
        double prev = 2;
        for (int t = 0; t <= 80; ++t) {
            const double h = degradation_curve(shape, shape == DegradationShape::concave ? 0.5 : 2.0, t, 80);
            EXPECT_LE(h, prev);
            prev = h;
        }
        EXPECT_DOUBLE_EQ(prev, 0.0);
    }
}

TEST(degradation_curve, rejects_bad_input) {
    EXPECT_THROW(degradation_curve(DegradationShape::linear, 1, 0, 0), ConfigError);
    EXPECT_THROW(degradation_curve(DegradationShape::linear, 1, 0, -5), ConfigError);
    EXPECT_THROW(degradation_curve(DegradationShape::convex, 0, 1, 10), ConfigError);
    EXPECT_THROW(degradation_curve(DegradationShape::linear, 1, 11, 10), DataError);
}

namespace {

GeneratorConfig small_config() {
    GeneratorConfig cfg;
    cfg.n_units = 4;
    cfg.cycles_per_unit = {20, 30};
    cfg.samples_per_cycle = 8;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST(generate_fleet, noiseless_linear_ground_truth) {
    auto cfg = small_config();
    cfg.noise = {0, 0, 0};
    const auto fleet = generate_fleet(cfg);
    const auto& u0 = fleet.units[0];
    const auto& h = *u0.hi_gt;
    const double T = static_cast<double>(h.size() - 1);
    for (std::size_t t = 0; t < h.size(); ++t) EXPECT_DOUBLE_EQ(h[t], 1.0 - static_cast<double>(t) / T);
    EXPECT_EQ(h.front(), 1.0);
    EXPECT_EQ(h.back(), 0.0);
}

TEST(generate_fleet, deterministic_for_a_seed) {
    const auto cfg = small_config();
    EXPECT_EQ(generate_fleet(cfg), generate_fleet(cfg));
    auto other = cfg;
    other.seed = 8;
    EXPECT_FALSE(generate_fleet(cfg) == generate_fleet(other));
}

TEST(generate_fleet, shape_echo) {
    GeneratorConfig cfg;
    cfg.cycles_per_unit = {10, 12};
    cfg.samples_per_cycle = 4;
    const auto fleet = generate_fleet(cfg);
    ASSERT_EQ(fleet.units.size(), 12u);
    EXPECT_EQ(fleet.n_sensors, 5u);
    EXPECT_EQ(fleet.n_conditions, 2u);
    for (const auto& u : fleet.units)
        for (const auto& c : u.cycles) {
            EXPECT_EQ(c.x.cols(), 5);
            EXPECT_EQ(c.w.cols(), 2);
            EXPECT_EQ(c.x.rows(), c.w.rows());
        }
    EXPECT_NO_THROW(fleet.validate());
}

TEST(generate_fleet, ground_truth_non_increasing_without_maintenance) {
    auto cfg = small_config();
    cfg.shape = DegradationShape::convex;
    cfg.shape_exponent = {1.5, 3.0};
    for (const auto& u : generate_fleet(cfg).units) {
        const auto& h = *u.hi_gt;
        for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]);
    }
}

TEST(generate_fleet, maintenance_jumps_are_bounded) {
    auto cfg = small_config();
    cfg.maintenance = MaintenanceRecovery{0.2, 0.1};
    bool jumped = false;
    for (const auto& u : generate_fleet(cfg).units) {
        const auto& h = *u.hi_gt;
        double hist_max = h[0];
        for (std::size_t i = 1; i < h.size(); ++i) {
            if (h[i] > h[i - 1]) jumped = true;
            EXPECT_LE(h[i], hist_max + 1e-15);
            EXPECT_LE(h[i] - h[i - 1], 0.1 + 1e-12);
            hist_max = std::max(hist_max, h[i]);
        }
        EXPECT_EQ(h.back(), 0.0);
    }
    EXPECT_TRUE(jumped);
}

TEST(generate_fleet, noiseless_sensors_are_a_function_of_w_and_z) {
    auto cfg = small_config();
    cfg.noise.sensors = 0;
    const auto fleet = generate_fleet(cfg);
    const auto mixing = SensorMixing::draw(cfg);
    for (const auto& u : fleet.units)
        for (std::size_t c = 0; c < u.cycles.size(); ++c) {
            const auto& rec = u.cycles[c];
            const double z = 1.0 - (*u.hi_gt)[c];
            for (Eigen::Index r = 0; r < rec.x.rows(); ++r) {
                const Eigen::VectorXd x = mixing.apply(rec.w.row(r).transpose(), z);
                for (Eigen::Index j = 0; j < rec.x.cols(); ++j) ASSERT_EQ(rec.x(r, j), x(j));
            }
        }
}

TEST(generate_fleet, conditions_do_not_depend_on_degradation_parameters) {
    auto a = small_config();
    auto b = a;
    b.shape = DegradationShape::concave;
    b.shape_exponent = {0.3, 0.6};
    b.degradation_gain = 0.0;
    b.noise.sensors = 0.2;
    const auto fa = generate_fleet(a);
    const auto fb = generate_fleet(b);
    ASSERT_EQ(fa.units.size(), fb.units.size());
    for (std::size_t u = 0; u < fa.units.size(); ++u) {
        ASSERT_EQ(fa.units[u].cycles.size(), fb.units[u].cycles.size());
        for (std::size_t c = 0; c < fa.units[u].cycles.size(); ++c)
            EXPECT_EQ(fa.units[u].cycles[c].w, fb.units[u].cycles[c].w);
    }
}

TEST(generate_fleet, every_sensor_responds_to_both_causes) {
    auto cfg = small_config();
    const auto m = SensorMixing::draw(cfg);
    Eigen::VectorXd w0(2), w1(2);
    w0 << 0.2, 2.5;  // normalized condition level 0.2
    w1 << 0.8, 8.5;  // normalized condition level 0.8
    const Eigen::VectorXd dz = m.apply(w0, 1.0) - m.apply(w0, 0.0);
    const Eigen::VectorXd dw = m.apply(w1, 0.5) - m.apply(w0, 0.5);
    for (Eigen::Index j = 0; j < dz.size(); ++j) {
        EXPECT_GT(std::abs(dz(j)), 1e-6);
        EXPECT_GT(std::abs(dw(j)), 1e-6);
    }
}

TEST(generator_config, validation) {
    GeneratorConfig cfg;
    cfg.n_units = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.cycles_per_unit = {50, 10};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.noise.sensors = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.n_conditions = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
