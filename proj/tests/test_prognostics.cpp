#include "hybridhi/error.hpp"
#include "hybridhi/prognostics.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace hybridhi;
using namespace hybridhi::prognostics;

namespace {

std::vector<HITrajectory> linear_hi(const FleetDataset& fleet) {
    std::vector<HITrajectory> out;
    for (const auto& u : fleet.units) {
        HITrajectory tr;
        tr.unit = u.id;
        for (std::size_t c = 0; c < u.cycles.size(); ++c) {
            tr.t.push_back(u.cycles[c].t);
            tr.h.push_back((*u.hi_gt)[c]);
        }
        out.push_back(tr);
    }
    return out;
}

}  // namespace

TEST(build_rul_dataset, end_of_life_label_is_zero) {
    const auto fleet = testutil::make_fleet({testutil::make_unit(0, std::vector<int>(100, 1))});
    const auto ds = build_rul_dataset(fleet, nullptr, 10, 1, std::nullopt, 99.0);
    ASSERT_EQ(ds.labels.size(), 91u);
    EXPECT_EQ(ds.labels.back(), 0.0);
    EXPECT_EQ(ds.labels.front(), 90.0);
    EXPECT_FALSE(ds.has_hi);
    EXPECT_EQ(ds.windows.channels(), 2u + 1u + 1u);
}

TEST(build_rul_dataset, cap_limits_labels) {
    const auto fleet = testutil::make_fleet({testutil::make_unit(0, std::vector<int>(100, 1))});
    const auto ds = build_rul_dataset(fleet, nullptr, 10, 1, 60.0, 99.0);
    // the window ending at cycle 19 has true RUL 80
    EXPECT_EQ(ds.windows.meta[10].cycle, 19);
    EXPECT_EQ(ds.labels[10], 60.0);
    for (double l : ds.labels) EXPECT_LE(l, 60.0);
}

TEST(build_rul_dataset, channels_carry_time_and_hi) {
    const auto fleet = testutil::make_fleet({testutil::make_unit(4, {2, 2, 2, 2, 2})});
    const auto hi = linear_hi(fleet);
    const auto ds = build_rul_dataset(fleet, &hi, 3, 1, std::nullopt, 4.0);
    EXPECT_TRUE(ds.has_hi);
    ASSERT_EQ(ds.windows.channels(), 2u + 1u + 1u + 1u);
    ASSERT_EQ(ds.labels.size(), 8u);
    // window 0 covers rows 0..2: cycles 0,0,1
    EXPECT_DOUBLE_EQ(ds.windows.value(0, 3, 2), 0.25);
    EXPECT_DOUBLE_EQ(ds.windows.value(0, 4, 0), 1.0);
    EXPECT_DOUBLE_EQ(ds.windows.value(0, 4, 2), 0.75);
    EXPECT_DOUBLE_EQ(ds.windows.value(0, 0, 2), fleet.units[0].cycles[1].x(0, 0));
    EXPECT_DOUBLE_EQ(ds.windows.value(0, 2, 1), fleet.units[0].cycles[0].w(1, 0));
}

TEST(build_rul_dataset, missing_hi_names_unit_and_cycle) {
    const auto fleet = testutil::make_fleet({testutil::make_unit(7, {1, 1, 1, 1})});
    auto hi = linear_hi(fleet);
    hi[0].t.pop_back();
    hi[0].h.pop_back();
    try {
        build_rul_dataset(fleet, &hi, 2, 1, std::nullopt, 3.0);
        FAIL() << "expected a data error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("unit 7, cycle 3"), std::string::npos);
    }
    EXPECT_THROW(build_rul_dataset(fleet, nullptr, 0, 1, std::nullopt, 1.0), ConfigError);
    EXPECT_THROW(build_rul_dataset(fleet, nullptr, 2, 1, -1.0, 1.0), ConfigError);
}

TEST(evaluate_rul, metrics) {
    std::vector<Prediction> p{{0, 0, 10, 12}, {0, 1, 0, -3}, {0, 2, 4, 2}};
    const auto r = evaluate_rul(p);
    EXPECT_EQ(r.windows, 3u);
    EXPECT_NEAR(r.mae, (2 + 0 + 2) / 3.0, 1e-12);
    EXPECT_NEAR(r.rmse, std::sqrt((4 + 0 + 4) / 3.0), 1e-12);
    EXPECT_NEAR(r.mape, 100 * (0.2 + 0 + 0.5) / 3.0, 1e-12);
}

TEST(average_improvement, examples) {
    const RULReport base{6.0, 7.4, 30.5, 10};
    EXPECT_NEAR(average_improvement(base, base).percent, 0.0, 1e-12);
    const RULReport gt{4.6, 6.3, 13.1, 10};
    const double expected = 100.0 / 3 * (1.4 / 6.0 + 1.1 / 7.4 + 17.4 / 30.5);
    EXPECT_NEAR(average_improvement(base, gt).percent, expected, 1e-9);
    EXPECT_NEAR(average_improvement(base, gt).percent, 32.0, 0.5);
    const RULReport worse{7, 8, 40, 10};
    EXPECT_LT(average_improvement(base, worse).percent, 0.0);
}

TEST(average_improvement, zero_baseline_metric_is_excluded) {
    const RULReport base{0.0, 2.0, 10.0, 1}, aug{0.5, 1.0, 5.0, 1};
    const auto imp = average_improvement(base, aug);
    EXPECT_EQ(imp.excluded, (std::vector<std::string>{"mae"}));
    EXPECT_NEAR(imp.percent, 50.0, 1e-12);
}

TEST(train_rul, fits_and_predicts_non_negative) {
    std::vector<Unit> units;
    for (int u = 0; u < 3; ++u) units.push_back(testutil::make_unit(u, std::vector<int>(30 + 5 * u, 2)));
    const auto fleet = testutil::make_fleet(units);
    RulConfig cfg;
    cfg.length = 8;
    cfg.stride = 2;
    cfg.train.epochs = 3;
    cfg.train.batch_size = 16;
    cfg.train.learning_rate = 1e-3;
    auto run = train_rul(fleet, nullptr, cfg);
    EXPECT_EQ(run.history.size(), 3u);
    EXPECT_DOUBLE_EQ(run.t_scale, 39.0);
    const auto pred = predict_rul(run, fleet, nullptr, cfg);
    EXPECT_FALSE(pred.empty());
    for (const auto& p : pred) EXPECT_GE(p.rul_pred, 0.0);
}

TEST(rul_artifacts, predictions_csv_and_json) {
    const auto dir = testutil::scratch_dir();
    std::vector<Prediction> p{{3, 17, 20, 18.5}};
    write_predictions_csv(p, dir / "p.csv");
    std::ifstream in(dir / "p.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "unit,cycle,rul_true,rul_pred");
    EXPECT_EQ(row, "3,17,20,18.5");
    const auto j = to_json(RULReport{1.5, 2, 3, 4});
    EXPECT_EQ(j.at("mae").get<double>(), 1.5);
    EXPECT_EQ(j.at("windows").get<int>(), 4);
}
