#pragma once

#include <filesystem>
#include <vector>

namespace hybridhi {

// Per-cycle health index of one unit.
struct HITrajectory {
    int unit = 0;
    std::vector<double> t;
    std::vector<double> h;
};

// Reads/writes the `unit,cycle,<column>` CSV layout.
void write_hi_csv(const std::vector<HITrajectory>& trajectories, const std::filesystem::path& file,
                  const char* column = "hi");
std::vector<HITrajectory> read_hi_csv(const std::filesystem::path& file);

// Ground-truth trajectories of every unit that carries hi_gt.
struct FleetDataset;
std::vector<HITrajectory> ground_truth_trajectories(const FleetDataset& fleet);

}  // namespace hybridhi
