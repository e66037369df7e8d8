#pragma once

#include "hybridhi/diagnostics.hpp"
#include "hybridhi/fleet.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hybridhi::ingest {

// Column names of a unit CSV. Empty condition/sensor lists select every
// column prefixed `w_` / `x_` in header order.
struct ColumnMap {
    std::string cycle = "cycle";
    std::vector<std::string> conditions;
    std::vector<std::string> sensors;
    std::string hi = "hi_gt";
    // Reject rows whose cycle index is lower than the previous row's instead
    // of grouping them into their cycle.
    bool strict_order = false;
};

// Reads every `*.csv` in `dir` as one unit. Rows are grouped by cycle index
// (file order kept inside a cycle) and cycles sorted ascending. Unit ids come
// from the digits in the file stem; class tags from an optional `units.txt`
// (`<id> <tag>` per line).
FleetDataset load_fleet(const std::filesystem::path& dir, const ColumnMap& columns = {});

// Writes `unit_<id>.csv` files plus `units.txt`; inverse of load_fleet.
void write_fleet(const FleetDataset& fleet, const std::filesystem::path& dir);

// Min-max statistics fitted on training units only.
struct Scaler {
    Eigen::VectorXd x_min, x_max, w_min, w_max;
    Diagnostics warnings;  // one "constant_channel" record per degenerate channel

    FleetDataset apply(const FleetDataset& fleet) const;
    FleetDataset invert(const FleetDataset& fleet) const;
};

Scaler fit_scaler(const FleetDataset& train);
inline FleetDataset apply_scaler(const FleetDataset& fleet, const Scaler& s) { return s.apply(fleet); }

void save_scaler(const Scaler& s, const std::filesystem::path& file);
Scaler load_scaler(const std::filesystem::path& file);

// Stride decimation per cycle; the first row of every cycle is kept.
FleetDataset downsample(const FleetDataset& fleet, int factor);

enum class Channels { x, w, both };

struct WindowMeta {
    int unit = 0;
    int cycle = 0;        // cycle of the window's last real row
    int first_cycle = 0;  // cycle of the window's first row
    int valid = 0;        // number of unpadded rows
};

// Fixed-length windows in channels-first layout: value(i, c, s) is channel c
// at step s of window i. X columns precede W columns when both are present.
struct WindowSet {
    std::size_t length = 0;  // S
    std::size_t n_x = 0;
    std::size_t n_w = 0;
    std::vector<double> values;          // n * channels * S
    std::vector<std::uint8_t> masks;     // n * S, 1 = real row
    std::vector<WindowMeta> meta;
    Diagnostics skipped;

    std::size_t size() const { return meta.size(); }
    std::size_t channels() const { return n_x + n_w; }
    double& value(std::size_t i, std::size_t c, std::size_t s) { return values[(i * channels() + c) * length + s]; }
    double value(std::size_t i, std::size_t c, std::size_t s) const { return values[(i * channels() + c) * length + s]; }
    std::uint8_t mask(std::size_t i, std::size_t s) const { return masks[i * length + s]; }

    // Copy of the windows at `indices`, in that order.
    WindowSet subset(std::span<const std::size_t> indices) const;
};

// Sliding windows over each unit's concatenated rows; never spans units.
// Units shorter than S contribute nothing and are listed in `skipped`.
WindowSet window_sliding(const FleetDataset& fleet, std::size_t length, std::size_t stride, Channels channels);

// One zero-padded window per cycle; S is the longest cycle in `fleet`
// unless `length` is given (it must cover the longest cycle).
WindowSet window_per_cycle(const FleetDataset& fleet, Channels channels, std::size_t length = 0);

// Ampere-hours by the rectangle rule: Q = sum(I_i * dt) / 3600.
double compute_capacity(std::span<const double> current, double dt_seconds);

}  // namespace hybridhi::ingest
