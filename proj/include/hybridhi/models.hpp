#pragma once

#include "hybridhi/ingest.hpp"
#include "hybridhi/losses.hpp"
#include "hybridhi/nn/layers.hpp"
#include "hybridhi/weibull.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hybridhi::models {

enum class NetworkKind {
    proposed_ae,   // encoder X -> Z, decoder (Z, W) -> X
    symmetric_ae,  // encoder (X, W) -> Z, decoder (Z, W) -> X
    residual_ae,   // (X, W) -> X
    residual_reg,  // W -> X
    supervised,    // all channels -> scalar HI
    rul,           // all channels -> scalar RUL
};

std::string to_string(NetworkKind kind);
NetworkKind parse_network_kind(const std::string& name);
bool is_autoencoder(NetworkKind kind);

struct NetworkSpec {
    NetworkKind kind = NetworkKind::proposed_ae;
    std::size_t p = 0;            // sensor channels X
    std::size_t k = 0;            // operating-condition channels W
    std::size_t length = 0;       // window length S
    std::size_t in_channels = 0;  // supervised / rul input width
    std::vector<std::size_t> filters;
    std::vector<std::size_t> decoder_filters;
    std::size_t kernel = 3;
    std::size_t hidden = 0;  // rul: width of the fully connected layer
    bool batch_norm = false;
    bool mask_padding = true;  // autoencoders: zero padded steps before the latent layer
    std::size_t pool = 0;

    nlohmann::json to_json() const;
    static NetworkSpec from_json(const nlohmann::json& j);
};

// Architecture presets.
NetworkSpec autoencoder_spec(NetworkKind kind, std::size_t p, std::size_t k, std::size_t length,
                             std::size_t kernel = 3);
NetworkSpec residual_spec(NetworkKind kind, std::size_t p, std::size_t k, std::size_t length);
NetworkSpec supervised_spec(std::size_t in_channels, std::size_t length);
enum class RulPreset { turbofan, battery };
NetworkSpec rul_spec(RulPreset preset, std::size_t in_channels, std::size_t length);

enum class ConstraintKind { none, correlation, negative_gradient, functional };
std::string to_string(ConstraintKind kind);
ConstraintKind parse_constraint(const std::string& name);

struct ConstraintSpec {
    ConstraintKind kind = ConstraintKind::none;
    double lambda = 1.0;
    std::optional<weibull::WeibullFit> expected_hi;
};

enum class RegressionLoss { mae, mse };

struct TrainConfig {
    int epochs = 20;
    std::size_t batch_size = 20;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
    // Residual models: only windows ending within this many cycles of the
    // unit's first cycle are used (0 = all windows).
    int healthy_cycles = 0;
    RegressionLoss regression_loss = RegressionLoss::mae;
    // Constrained autoencoders: each batch joins this many same-unit blocks
    // of consecutive cycles (batch_size / units_per_batch windows each).
    std::size_t units_per_batch = 1;

    void validate() const;
};

class Model {
public:
    Model(NetworkSpec spec, std::uint64_t seed);
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    const NetworkSpec& spec() const { return spec_; }
    nn::Sequential& first() { return first_; }
    nn::Sequential& second() { return second_; }
    std::vector<nn::Param*> params();
    std::vector<std::vector<double>*> buffers();
    // Padding mask for the next encoder pass (autoencoders with mask_padding).
    void set_mask(std::vector<std::uint8_t> mask);

private:
    nn::TimeMask* mask_ = nullptr;
    NetworkSpec spec_;
    nn::Sequential first_;   // encoder, or the whole network
    nn::Sequential second_;  // decoder (autoencoders only)
};

Model build_network(const NetworkSpec& spec, std::uint64_t seed);

struct EpochLoss {
    int epoch = 0;
    double total = 0, mae = 0, constraint = 0;
    int starved_batches = 0;
};
using LossHistory = std::vector<EpochLoss>;

// Autoencoders and residual models learn from the windows themselves;
// supervised and rul models need one label per window.
LossHistory train(Model& model, const ingest::WindowSet& data, const TrainConfig& cfg,
                  const ConstraintSpec& constraint = {}, std::span<const double> labels = {});

// Latent Z per window (autoencoders).
std::vector<double> encode(Model& model, const ingest::WindowSet& windows);
// X-hat [n, p, S] (autoencoders and residual models).
nn::Tensor reconstruct(Model& model, const ingest::WindowSet& windows);
// Network output: [n, p, S] for residual models, [n, 1, 1] for supervised and rul.
nn::Tensor predict(Model& model, const ingest::WindowSet& windows);

void save_checkpoint(Model& model, const TrainConfig& cfg, const std::filesystem::path& file,
                     const std::string& scaler_ref = "");
struct Checkpoint {
    Model model;
    TrainConfig train;
    std::string scaler_ref;
};
Checkpoint load_checkpoint(const std::filesystem::path& file);

void write_loss_history(const LossHistory& history, const std::filesystem::path& file);

}  // namespace hybridhi::models
