#pragma once

#include "hybridhi/causal.hpp"
#include "hybridhi/datagen.hpp"
#include "hybridhi/kv.hpp"
#include "hybridhi/models.hpp"
#include "hybridhi/prognostics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hybridhi::experiment {

enum class DatasetPreset { synthetic, turbofan, battery };
enum class SplitPreset { in_distribution, ood, custom };
enum class Method { proposed, residual_ae, residual_reg, supervised };
// Table 10 variants of the proposed method.
enum class Ablation { none, no_learning_bias, no_inductive_bias, neither };
// Where the functional constraint's expected-HI curve comes from.
enum class WeibullSource { first_pass, ground_truth, file };

std::string to_string(DatasetPreset v);
std::string to_string(SplitPreset v);
std::string to_string(Method v);
std::string to_string(Ablation v);
std::string to_string(WeibullSource v);

struct ExperimentConfig {
    std::string name = "experiment";
    DatasetPreset preset = DatasetPreset::synthetic;
    std::filesystem::path out;
    std::vector<std::uint64_t> seeds{0};

    // data
    std::string source = "generate";  // "generate" or a directory of unit CSVs
    int downsample = 1;
    SplitPreset split = SplitPreset::in_distribution;
    std::vector<int> train_units, test_units;  // custom split
    datagen::GeneratorConfig generator;

    // method
    Method method = Method::proposed;
    models::ConstraintKind constraint = models::ConstraintKind::correlation;
    double lambda = 1.0;
    Ablation ablation = Ablation::none;
    std::size_t kernel = 3;             // autoencoder convolution width
    bool mask_padding = true;
    std::size_t window = 50;            // residual / supervised window S
    std::size_t stride = 1;             // residual / supervised window stride
    int healthy_cycles = 20;
    models::TrainConfig train;          // for the selected method

    // functional constraint
    WeibullSource weibull_source = WeibullSource::first_pass;
    std::filesystem::path weibull_file;
    double weibull_confidence = 0.5;
    std::vector<double> weibull_thresholds;

    // causal discovery
    bool causal = false;
    int causal_min_cycle = 45;
    causal::RegressorSpec regressor;

    // prognostics
    bool rul = false;
    prognostics::RulConfig rul_config;

    // Network kind after applying the ablation; the ablation's lambda = 0 is
    // already folded into `lambda` by from_document.
    models::NetworkKind network_kind() const;
    models::ConstraintSpec constraint_spec() const;

    void validate() const;  // throws ConfigError
};

// Defaults of a dataset preset for one method (downsampling, window sizes,
// batch sizes, healthy-cycle counts, RUL network).
ExperimentConfig preset_defaults(DatasetPreset preset, Method method = Method::proposed);

// Preset defaults overlaid with the document's keys; unknown keys are
// rejected. `env_out_root` (typically $HYBRIDHI_OUT) prefixes the default
// output directory when the document sets none.
ExperimentConfig from_document(const kv::Document& doc, const std::string& env_out_root = "");
ExperimentConfig load_config(const std::filesystem::path& file, const std::string& env_out_root = "");

// Fully resolved snapshot: every key, ablation already applied to the
// method fields.
kv::Document to_document(const ExperimentConfig& cfg);

// Unit ids of a split preset. Synthetic splits go by class tag; the turbofan
// and battery presets use the paper's unit lists.
struct Split {
    std::vector<int> train, test;
};
Split resolve_split(const ExperimentConfig& cfg, const FleetDataset& fleet);

}  // namespace hybridhi::experiment
