#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace hybridhi {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One operating cycle: m_i samples of p sensors (x) and k conditions (w).
struct CycleRecord {
    int t = 0;
    RowMatrix x;
    RowMatrix w;

    bool operator==(const CycleRecord& o) const {
        return t == o.t && x.rows() == o.x.rows() && x.cols() == o.x.cols() &&
               w.rows() == o.w.rows() && w.cols() == o.w.cols() && x == o.x && w == o.w;
    }
};

struct Unit {
    int id = 0;
    std::string class_tag;
    std::vector<CycleRecord> cycles;
    std::optional<std::vector<double>> hi_gt;  // one value per cycle, in [0,1]

    std::size_t rows() const;
    bool operator==(const Unit& o) const = default;
};

struct FleetDataset {
    std::vector<Unit> units;
    std::size_t n_sensors = 0;
    std::size_t n_conditions = 0;

    bool has_ground_truth() const;
    const Unit& unit(int id) const;
    // Checks the structural invariants (increasing cycles, matching row
    // counts, hi_gt in range); throws DataError on violation.
    void validate() const;
    bool operator==(const FleetDataset& o) const = default;
};

// Subset of a fleet by unit id, keeping the requested order.
FleetDataset select_units(const FleetDataset& fleet, const std::vector<int>& ids);

// 64-bit FNV-1a over the fleet's numeric content; stable across runs.
std::string fingerprint(const FleetDataset& fleet);

}  // namespace hybridhi
