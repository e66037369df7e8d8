#pragma once

#include "hybridhi/ingest.hpp"
#include "hybridhi/trajectory.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace hybridhi::hi {

// Mean over valid time steps of |x - x_hat|, one p-vector per window.
// `x` and `x_hat` hold n windows in channels-first [n, p, S] layout.
Eigen::MatrixXd compute_residual(std::span<const double> x, std::span<const double> x_hat,
                                 std::span<const std::uint8_t> mask, std::size_t n, std::size_t p, std::size_t length);

struct PcaFit {
    Eigen::VectorXd mean;
    Eigen::VectorXd direction;  // unit norm
    bool flipped = false;       // direction sign was negated to make its largest entry positive

    Eigen::VectorXd project(const Eigen::MatrixXd& residuals) const;  // rows are windows
};

// First principal direction of the rows of `residuals`; throws DataError
// when the rows have zero variance.
PcaFit fit_pca(const Eigen::MatrixXd& residuals);

// A scalar per cycle for one unit, before orientation and normalization.
struct CycleSeries {
    int unit = 0;
    std::vector<double> t;
    std::vector<double> value;
};

// Averages window scalars by (unit, cycle of the window's last row).
std::vector<CycleSeries> per_cycle_average(std::span<const double> scalars, std::span<const ingest::WindowMeta> meta);

// Orientation and fleet-level min-max fitted on training units.
struct HiNormalizer {
    double sign = 1.0;
    double lo = 0.0;
    double hi = 1.0;

    bool degenerate() const { return !(hi > lo); }
    // Oriented, normalized and clipped to [0,1]; constant fits map to 1.
    HITrajectory apply(const CycleSeries& series) const;
    std::vector<HITrajectory> apply(std::span<const CycleSeries> series) const;
};

// Votes per unit on whether the first 10% of cycles sit above the last 10%;
// single-cycle units abstain. Ties fall back to the pooled early/late means.
double orientation(std::span<const CycleSeries> training);
HiNormalizer fit_normalizer(std::span<const CycleSeries> training);

std::vector<HITrajectory> residual_to_hi(const Eigen::MatrixXd& residuals, std::span<const ingest::WindowMeta> meta,
                                         const PcaFit& pca, const HiNormalizer& normalizer);

std::vector<HITrajectory> latent_to_hi(std::span<const double> z, std::span<const ingest::WindowMeta> meta,
                                       const HiNormalizer& normalizer);

// Linear map of h in [0,1] onto [60%, 100%] state of health.
double to_soh(double h);
std::vector<HITrajectory> to_soh(std::vector<HITrajectory> trajectories);

void save_normalizer(const HiNormalizer& n, const std::filesystem::path& file);
HiNormalizer load_normalizer(const std::filesystem::path& file);
void save_pca(const PcaFit& pca, const std::filesystem::path& file);
PcaFit load_pca(const std::filesystem::path& file);

}  // namespace hybridhi::hi
