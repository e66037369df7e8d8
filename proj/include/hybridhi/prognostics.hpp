#pragma once

#include "hybridhi/diagnostics.hpp"
#include "hybridhi/fleet.hpp"
#include "hybridhi/ingest.hpp"
#include "hybridhi/models.hpp"
#include "hybridhi/trajectory.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace hybridhi::prognostics {

// Sliding windows over X, W, a time channel (cycle / t_scale) and, when
// HI trajectories are supplied, an HI channel; one RUL label per window.
struct RulDataset {
    ingest::WindowSet windows;  // every channel counted in n_x
    std::vector<double> labels;
    bool has_hi = false;
    std::optional<double> cap;
    double t_scale = 1.0;
};

RulDataset build_rul_dataset(const FleetDataset& fleet, const std::vector<HITrajectory>* hi, std::size_t length,
                             std::size_t stride, std::optional<double> cap, double t_scale);

// Largest cycle index in the fleet (the default t_scale).
double max_cycle(const FleetDataset& fleet);

models::Model build_rul_model(models::RulPreset preset, std::size_t channels, std::size_t length, std::uint64_t seed);

struct RULReport {
    double mae = 0, rmse = 0, mape = 0;
    std::size_t windows = 0;
};

struct Prediction {
    int unit = 0;
    int cycle = 0;
    double rul_true = 0;
    double rul_pred = 0;
};

// Predictions are clipped below at 0; MAPE divides by max(true RUL, 1).
RULReport evaluate_rul(std::span<const Prediction> predictions);

struct Improvement {
    double percent = 0;
    std::vector<std::string> excluded;  // metrics with a zero baseline
};

// Mean over MAE, RMSE and MAPE of 100 * (baseline - augmented) / baseline.
Improvement average_improvement(const RULReport& baseline, const RULReport& augmented);

struct RulConfig {
    models::RulPreset preset = models::RulPreset::turbofan;
    std::size_t length = 50;
    std::size_t stride = 1;
    std::optional<double> cap;
    models::TrainConfig train{20, 512, 1e-4, 0, 0, models::RegressionLoss::mse};
};

struct RulRun {
    models::Model model;
    double label_scale = 1.0;
    double t_scale = 1.0;
    models::LossHistory history;
};

// Trains on `train` (labels divided internally by the cap, or the largest
// label when uncapped) and returns the fitted model.
RulRun train_rul(const FleetDataset& train, const std::vector<HITrajectory>* hi, const RulConfig& cfg);

std::vector<Prediction> predict_rul(RulRun& run, const FleetDataset& test, const std::vector<HITrajectory>* hi,
                                    const RulConfig& cfg);

void write_predictions_csv(std::span<const Prediction> predictions, const std::filesystem::path& file);
nlohmann::json to_json(const RULReport& report);

}  // namespace hybridhi::prognostics
