#pragma once

#include "hybridhi/fleet.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

namespace testutil {

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    auto dir = std::filesystem::temp_directory_path() / "hybridhi_tests" /
               (std::string(info->test_suite_name()) + "." + info->name());
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Unit whose cycle c has rows[c] samples; x = cycle + row/100 per sensor,
// w = row per condition.
inline hybridhi::Unit make_unit(int id, const std::vector<int>& rows, std::size_t p = 2, std::size_t k = 1) {
    hybridhi::Unit u;
    u.id = id;
    u.class_tag = "test";
    std::vector<double> h;
    for (std::size_t c = 0; c < rows.size(); ++c) {
        hybridhi::CycleRecord rec;
        rec.t = static_cast<int>(c);
        rec.x.resize(rows[c], static_cast<Eigen::Index>(p));
        rec.w.resize(rows[c], static_cast<Eigen::Index>(k));
        for (int r = 0; r < rows[c]; ++r) {
            for (std::size_t j = 0; j < p; ++j) rec.x(r, static_cast<Eigen::Index>(j)) = c + r / 100.0 + j;
            for (std::size_t j = 0; j < k; ++j) rec.w(r, static_cast<Eigen::Index>(j)) = r + 10.0 * j;
        }
        u.cycles.push_back(std::move(rec));
        h.push_back(rows.size() > 1 ? 1.0 - static_cast<double>(c) / (rows.size() - 1) : 1.0);
    }
    u.hi_gt = h;
    return u;
}

inline hybridhi::FleetDataset make_fleet(std::vector<hybridhi::Unit> units, std::size_t p = 2, std::size_t k = 1) {
    hybridhi::FleetDataset f;
    f.units = std::move(units);
    f.n_sensors = p;
    f.n_conditions = k;
    return f;
}

}  // namespace testutil
