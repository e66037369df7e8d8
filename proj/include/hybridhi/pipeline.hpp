#pragma once

#include "hybridhi/causal.hpp"
#include "hybridhi/experiment.hpp"
#include "hybridhi/ingest.hpp"
#include "hybridhi/metrics.hpp"
#include "hybridhi/prognostics.hpp"
#include "hybridhi/weibull.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hybridhi::pipeline {

// Artifact directory layout:
//   config.toml                resolved configuration
//   dataset/                   generated fleet CSVs (generate source only)
//   dataset.txt                source and fingerprint of the loaded fleet
//   scaler.json                min-max statistics of the training units
//   weibull.txt                expected-HI fit used by the functional constraint
//   first_pass/                correlation run feeding the Weibull fit
//   seed_<s>/                  model.json, loss_history.csv, hi_train.csv,
//                              hi_test.csv, normalizer.json, pca.json, metrics.json
//   hi_truth_test.csv          ground truth of the test units
//   metrics.json               MetricReport over all seeds
//   causal_ranking.csv
//   rul/seed_<s>/              <variant>_model.json, <variant>_meta.json,
//                              <variant>_predictions.csv
//   rul_report.json
//   report.md, plots/*.svg
struct Layout {
    std::filesystem::path root;

    std::filesystem::path config() const { return root / "config.toml"; }
    std::filesystem::path dataset_dir() const { return root / "dataset"; }
    std::filesystem::path dataset_info() const { return root / "dataset.txt"; }
    std::filesystem::path scaler() const { return root / "scaler.json"; }
    std::filesystem::path weibull() const { return root / "weibull.txt"; }
    std::filesystem::path first_pass() const { return root / "first_pass"; }
    std::filesystem::path seed_dir(std::uint64_t seed) const { return root / ("seed_" + std::to_string(seed)); }
    std::filesystem::path truth_test() const { return root / "hi_truth_test.csv"; }
    std::filesystem::path metrics() const { return root / "metrics.json"; }
    std::filesystem::path causal() const { return root / "causal_ranking.csv"; }
    std::filesystem::path rul_dir(std::uint64_t seed) const { return root / "rul" / ("seed_" + std::to_string(seed)); }
    std::filesystem::path rul_report() const { return root / "rul_report.json"; }
    std::filesystem::path report() const { return root / "report.md"; }
    std::filesystem::path plots() const { return root / "plots"; }
    std::filesystem::path error_log() const { return root / "error.json"; }
};

// Scaled train/test fleets of an experiment.
struct Prepared {
    FleetDataset train, test;
    ingest::Scaler scaler;
    experiment::Split split;
};

// Writes the config snapshot and the dataset (generated fleets are stored
// under dataset/; loaded fleets are referenced by path and fingerprint).
void generate(const experiment::ExperimentConfig& cfg);

// Reads the dataset (generating it first when absent), downsamples, splits
// and fits the scaler on the training units.
Prepared prepare(const experiment::ExperimentConfig& cfg);

// Trains the configured method for one seed and writes the checkpoint and
// loss history. The functional constraint reads weibull.txt, fitting it
// first when absent.
models::LossHistory train(const experiment::ExperimentConfig& cfg, std::uint64_t seed);

// Per-cycle HI of the training and test units from the seed's checkpoint.
struct HiEstimate {
    std::vector<HITrajectory> train, test;
};
HiEstimate estimate_hi(const experiment::ExperimentConfig& cfg, std::uint64_t seed);

// Criteria of every seed's test HI (MAPE when ground truth exists);
// writes the per-seed and the aggregate metrics.json.
metrics::MetricReport evaluate_hi(const experiment::ExperimentConfig& cfg);

// Expected-HI function from the configured source; written to weibull.txt.
weibull::WeibullFit fit_weibull(const experiment::ExperimentConfig& cfg);

causal::Ranking discover_causal(const experiment::ExperimentConfig& cfg);

// RUL models without HI, with the estimated HI and with ground-truth HI
// (variants whose inputs are missing are skipped).
void train_rul(const experiment::ExperimentConfig& cfg, std::uint64_t seed);
nlohmann::json evaluate_rul(const experiment::ExperimentConfig& cfg);

// Renders report.md and plots from an artifact directory; throws DataError
// "no artifacts found" when it holds no results.
void report(const std::filesystem::path& out);

// Every stage enabled by the config, for every seed.
void run(const experiment::ExperimentConfig& cfg);

// Aligns truth to the cycles of each estimate (units matched by id).
std::vector<HITrajectory> align_truth(const std::vector<HITrajectory>& estimate,
                                      const std::vector<HITrajectory>& truth);

// Fills cycles of `fleet` missing from `hi` with the nearest estimated value.
std::vector<HITrajectory> complete_trajectories(const std::vector<HITrajectory>& hi, const FleetDataset& fleet);

// Throws DataError when the file is missing or not valid JSON.
nlohmann::json read_json(const std::filesystem::path& file);

std::vector<prognostics::Prediction> read_predictions_csv(const std::filesystem::path& file);

// error.json in `out` (when writable) plus one JSON line on stderr.
void log_error(const std::filesystem::path& out, const std::string& stage, const std::string& kind,
               const std::string& message, int exit_code);

}  // namespace hybridhi::pipeline
