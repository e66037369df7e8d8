#include "hybridhi/models.hpp"

#include "hybridhi/error.hpp"
#include "hybridhi/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace hybridhi::models {

using ingest::WindowSet;
using nn::Tensor;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "hybridhi.model/1";

const std::map<NetworkKind, std::string> kKindNames = {
    {NetworkKind::proposed_ae, "proposed_ae"},   {NetworkKind::symmetric_ae, "symmetric_ae"},
    {NetworkKind::residual_ae, "residual_ae"},   {NetworkKind::residual_reg, "residual_reg"},
    {NetworkKind::supervised, "supervised"},     {NetworkKind::rul, "rul"},
};

const std::map<ConstraintKind, std::string> kConstraintNames = {
    {ConstraintKind::none, "none"},
    {ConstraintKind::correlation, "correlation"},
    {ConstraintKind::negative_gradient, "negative_gradient"},
    {ConstraintKind::functional, "functional"},
};

// Channels [first, first + count) of the windows at `idx`.
Tensor gather(const WindowSet& ws, std::span<const std::size_t> idx, std::size_t first, std::size_t count) {
    Tensor out(idx.size(), count, ws.length);
    for (std::size_t b = 0; b < idx.size(); ++b)
        for (std::size_t c = 0; c < count; ++c) {
            const double* src = &ws.values[(idx[b] * ws.channels() + first + c) * ws.length];
            std::copy(src, src + ws.length, &out.at(b, c, 0));
        }
    return out;
}

std::vector<std::uint8_t> gather_mask(const WindowSet& ws, std::span<const std::size_t> idx) {
    std::vector<std::uint8_t> out(idx.size() * ws.length);
    for (std::size_t b = 0; b < idx.size(); ++b)
        std::copy_n(&ws.masks[idx[b] * ws.length], ws.length, &out[b * ws.length]);
    return out;
}

void check_windows(const NetworkSpec& spec, const WindowSet& ws) {
    if (ws.length != spec.length)
        throw ShapeError("window length " + std::to_string(ws.length) + " does not match network length " +
                         std::to_string(spec.length));
    switch (spec.kind) {
        case NetworkKind::supervised:
        case NetworkKind::rul:
            if (ws.channels() != spec.in_channels)
                throw ShapeError("expected " + std::to_string(spec.in_channels) + " input channels, got " +
                                 std::to_string(ws.channels()));
            break;
        default:
            if (ws.n_x != spec.p || ws.n_w != spec.k)
                throw ShapeError("expected " + std::to_string(spec.p) + " sensor and " + std::to_string(spec.k) +
                                 " condition channels, got " + std::to_string(ws.n_x) + " and " +
                                 std::to_string(ws.n_w));
    }
}

// Input tensor of the first stage for each kind.
Tensor network_input(const NetworkSpec& spec, const WindowSet& ws, std::span<const std::size_t> idx) {
    switch (spec.kind) {
        case NetworkKind::proposed_ae: return gather(ws, idx, 0, spec.p);
        case NetworkKind::residual_reg: return gather(ws, idx, spec.p, spec.k);
        case NetworkKind::symmetric_ae:
        case NetworkKind::residual_ae: return gather(ws, idx, 0, spec.p + spec.k);
        default: return gather(ws, idx, 0, spec.in_channels);
    }
}

struct AeForward {
    Tensor z;      // [n, 1, 1]
    Tensor x_hat;  // [n, p, S]
};

AeForward ae_forward(Model& model, const WindowSet& ws, std::span<const std::size_t> idx, bool training) {
    const auto& spec = model.spec();
    AeForward out;
    model.set_mask(gather_mask(ws, idx));
    out.z = model.first().forward(network_input(spec, ws, idx), training);
    const Tensor w = gather(ws, idx, spec.p, spec.k);
    out.x_hat = model.second().forward(nn::concat_channels(nn::broadcast_time(out.z, spec.length), w), training);
    return out;
}

std::vector<std::size_t> all_indices(const WindowSet& ws) {
    std::vector<std::size_t> idx(ws.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

template <class F>
void for_chunks(std::size_t n, F&& f) {
    constexpr std::size_t kChunk = 256;
    for (std::size_t start = 0; start < n; start += kChunk) f(start, std::min(n, start + kChunk));
}

// Ordered blocks of consecutive cycles of one unit, for the constrained
// autoencoder. A trailing single-window block is merged into its neighbour.
std::vector<std::vector<std::size_t>> unit_blocks(const WindowSet& ws, std::span<const std::size_t> pool,
                                                  std::size_t batch) {
    std::vector<std::size_t> order(pool.begin(), pool.end());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ma = ws.meta[a];
        const auto& mb = ws.meta[b];
        return std::tie(ma.unit, ma.cycle) < std::tie(mb.unit, mb.cycle);
    });
    std::vector<std::vector<std::size_t>> blocks;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && ws.meta[order[j]].unit == ws.meta[order[i]].unit) ++j;
        for (std::size_t s = i; s < j; s += batch) {
            const std::size_t e = std::min(j, s + batch);
            if (e - s == 1 && s > i)
                blocks.back().push_back(order[s]);
            else
                blocks.emplace_back(order.begin() + static_cast<long>(s), order.begin() + static_cast<long>(e));
        }
        i = j;
    }
    return blocks;
}

std::vector<std::size_t> healthy_subset(const WindowSet& ws, int healthy_cycles) {
    if (healthy_cycles <= 0) return all_indices(ws);
    std::map<int, int> first;
    for (const auto& m : ws.meta) {
        auto [it, inserted] = first.try_emplace(m.unit, m.first_cycle);
        if (!inserted) it->second = std::min(it->second, m.first_cycle);
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ws.size(); ++i)
        if (ws.meta[i].cycle - first[ws.meta[i].unit] < healthy_cycles) out.push_back(i);
    return out;
}

json spec_dims(const std::vector<std::size_t>& v) { return json(v); }

}  // namespace

std::string to_string(NetworkKind kind) { return kKindNames.at(kind); }

NetworkKind parse_network_kind(const std::string& name) {
    for (const auto& [k, v] : kKindNames)
        if (v == name) return k;
    throw ConfigError("unknown network kind '" + name + "'");
}

bool is_autoencoder(NetworkKind kind) {
    return kind == NetworkKind::proposed_ae || kind == NetworkKind::symmetric_ae;
}

std::string to_string(ConstraintKind kind) { return kConstraintNames.at(kind); }

ConstraintKind parse_constraint(const std::string& name) {
    for (const auto& [k, v] : kConstraintNames)
        if (v == name) return k;
    throw ConfigError("unknown constraint '" + name + "' (none, correlation, negative_gradient, functional)");
}

json NetworkSpec::to_json() const {
    return {{"kind", to_string(kind)},       {"p", p},
            {"k", k},                        {"length", length},
            {"in_channels", in_channels},    {"filters", spec_dims(filters)},
            {"decoder_filters", spec_dims(decoder_filters)},
            {"kernel", kernel},              {"hidden", hidden},
            {"batch_norm", batch_norm},      {"pool", pool},
            {"mask_padding", mask_padding}};
}

NetworkSpec NetworkSpec::from_json(const json& j) {
    NetworkSpec s;
    s.kind = parse_network_kind(j.at("kind").get<std::string>());
    s.p = j.at("p");
    s.k = j.at("k");
    s.length = j.at("length");
    s.in_channels = j.at("in_channels");
    s.filters = j.at("filters").get<std::vector<std::size_t>>();
    s.decoder_filters = j.at("decoder_filters").get<std::vector<std::size_t>>();
    s.kernel = j.at("kernel");
    s.hidden = j.at("hidden");
    s.batch_norm = j.at("batch_norm");
    s.pool = j.at("pool");
    s.mask_padding = j.value("mask_padding", true);
    return s;
}

NetworkSpec autoencoder_spec(NetworkKind kind, std::size_t p, std::size_t k, std::size_t length, std::size_t kernel) {
    if (!is_autoencoder(kind)) throw ConfigError("autoencoder_spec: not an autoencoder kind");
    NetworkSpec s;
    s.kind = kind;
    s.p = p;
    s.k = k;
    s.length = length;
    s.filters = {128, 64, 16};
    s.decoder_filters = {16, 64, 128};
    s.kernel = kernel;
    return s;
}

NetworkSpec residual_spec(NetworkKind kind, std::size_t p, std::size_t k, std::size_t length) {
    if (kind != NetworkKind::residual_ae && kind != NetworkKind::residual_reg)
        throw ConfigError("residual_spec: not a residual kind");
    NetworkSpec s;
    s.kind = kind;
    s.p = p;
    s.k = k;
    s.length = length;
    s.filters = {64, 64, 64, 64};
    s.kernel = 11;
    return s;
}

NetworkSpec supervised_spec(std::size_t in_channels, std::size_t length) {
    NetworkSpec s;
    s.kind = NetworkKind::supervised;
    s.in_channels = in_channels;
    s.length = length;
    s.filters = {64, 64, 64, 64};
    s.kernel = 11;
    s.batch_norm = true;
    s.pool = 2;
    return s;
}

NetworkSpec rul_spec(RulPreset preset, std::size_t in_channels, std::size_t length) {
    NetworkSpec s;
    s.kind = NetworkKind::rul;
    s.in_channels = in_channels;
    s.length = length;
    s.kernel = 10;
    if (preset == RulPreset::turbofan) {
        s.filters = {10, 10, 1};
        s.hidden = 50;
    } else {
        s.filters = {10, 10, 10};
        s.hidden = 200;
    }
    return s;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
    if (healthy_cycles < 0) throw ConfigError("healthy cycles must be >= 0");
    if (units_per_batch < 1) throw ConfigError("units per batch must be >= 1");
}

Model::Model(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    auto& s = spec_;
    if (s.length == 0 || s.kernel == 0 || s.filters.empty()) throw ShapeError("network dimensions must be positive");
    auto rng = substream(seed, {0x6e6574, static_cast<std::uint64_t>(s.kind)});

    const auto conv_stack = [&](nn::Sequential& net, std::size_t in, const std::vector<std::size_t>& filters) {
        for (std::size_t f : filters) {
            net.add<nn::Conv1d>(in, f, s.kernel, rng);
            net.add<nn::ReLU>();
            in = f;
        }
        return in;
    };

    switch (s.kind) {
        case NetworkKind::proposed_ae:
        case NetworkKind::symmetric_ae: {
            if (s.p == 0 || s.k == 0) throw ShapeError("autoencoder needs sensor and condition channels");
            const std::size_t in = s.kind == NetworkKind::proposed_ae ? s.p : s.p + s.k;
            const std::size_t last = conv_stack(first_, in, s.filters);
            if (s.mask_padding) mask_ = &first_.add<nn::TimeMask>();
            first_.add<nn::Flatten>();
            first_.add<nn::Dense>(last * s.length, 1, rng);
            const std::size_t dec_last = conv_stack(second_, 1 + s.k, s.decoder_filters);
            second_.add<nn::Conv1d>(dec_last, s.p, 1, rng);
            break;
        }
        case NetworkKind::residual_ae:
        case NetworkKind::residual_reg: {
            if (s.p == 0 || s.k == 0) throw ShapeError("residual model needs sensor and condition channels");
            const std::size_t in = s.kind == NetworkKind::residual_ae ? s.p + s.k : s.k;
            const std::size_t last = conv_stack(first_, in, s.filters);
            first_.add<nn::Conv1d>(last, s.p, 1, rng);
            break;
        }
        case NetworkKind::supervised: {
            const std::size_t min_length = std::size_t{1} << s.filters.size();
            if (s.length < min_length)
                throw ShapeError("supervised network with " + std::to_string(s.filters.size()) +
                                 " pooling stages needs window length S >= " + std::to_string(min_length));
            std::size_t in = s.in_channels, len = s.length;
            for (std::size_t f : s.filters) {
                first_.add<nn::Conv1d>(in, f, s.kernel, rng);
                first_.add<nn::BatchNorm1d>(f);
                first_.add<nn::ReLU>();
                first_.add<nn::MaxPool1d>(s.pool);
                in = f;
                len /= s.pool;
            }
            first_.add<nn::Flatten>();
            first_.add<nn::Dense>(in * len, 1, rng);
            break;
        }
        case NetworkKind::rul: {
            const std::size_t last = conv_stack(first_, s.in_channels, s.filters);
            first_.add<nn::Flatten>();
            first_.add<nn::Dense>(last * s.length, s.hidden, rng);
            first_.add<nn::ReLU>();
            first_.add<nn::Dense>(s.hidden, 1, rng);
            break;
        }
    }
}

std::vector<nn::Param*> Model::params() {
    auto out = first_.params();
    for (auto* p : second_.params()) out.push_back(p);
    return out;
}

std::vector<std::vector<double>*> Model::buffers() {
    auto out = first_.buffers();
    for (auto* b : second_.buffers()) out.push_back(b);
    return out;
}

void Model::set_mask(std::vector<std::uint8_t> mask) {
    if (mask_) mask_->set(std::move(mask));
}

Model build_network(const NetworkSpec& spec, std::uint64_t seed) { return Model(spec, seed); }

LossHistory train(Model& model, const WindowSet& data, const TrainConfig& cfg, const ConstraintSpec& constraint,
                  std::span<const double> labels) {
    cfg.validate();
    const auto& spec = model.spec();
    check_windows(spec, data);
    if (constraint.lambda < 0) throw ConfigError("constraint weight must be >= 0");
    if (constraint.kind == ConstraintKind::functional && !constraint.expected_hi)
        throw ConfigError("functional constraint requires a fitted expected-HI function");
    const bool labelled = spec.kind == NetworkKind::supervised || spec.kind == NetworkKind::rul;
    if (labelled && labels.size() != data.size())
        throw ShapeError("expected one label per window (" + std::to_string(data.size()) + "), got " +
                         std::to_string(labels.size()));

    std::vector<std::size_t> pool = all_indices(data);
    if (spec.kind == NetworkKind::residual_ae || spec.kind == NetworkKind::residual_reg) {
        pool = healthy_subset(data, cfg.healthy_cycles);
        if (pool.empty()) throw TrainingError("no healthy windows to train the residual model on");
    }
    if (pool.empty()) throw TrainingError("no training windows");

    nn::Adam opt(model.params(), cfg.learning_rate);
    auto rng = substream(cfg.seed, {0x747261696e});
    const bool ae = is_autoencoder(spec.kind);
    const double lambda = constraint.kind == ConstraintKind::none ? 0.0 : constraint.lambda;

    std::vector<std::vector<std::size_t>> blocks;
    std::vector<std::vector<std::size_t>> unit_runs;
    if (ae) unit_runs = unit_blocks(data, pool, std::max<std::size_t>(2, cfg.batch_size / cfg.units_per_batch));

    LossHistory history;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (ae) {
            std::shuffle(unit_runs.begin(), unit_runs.end(), rng);
            blocks.clear();
            for (std::size_t s = 0; s < unit_runs.size(); s += cfg.units_per_batch) {
                auto& batch = blocks.emplace_back();
                for (std::size_t r = s; r < std::min(unit_runs.size(), s + cfg.units_per_batch); ++r)
                    batch.insert(batch.end(), unit_runs[r].begin(), unit_runs[r].end());
            }
        } else {
            std::shuffle(pool.begin(), pool.end(), rng);
            blocks.clear();
            for (std::size_t s = 0; s < pool.size(); s += cfg.batch_size)
                blocks.emplace_back(pool.begin() + static_cast<long>(s),
                                    pool.begin() + static_cast<long>(std::min(pool.size(), s + cfg.batch_size)));
        }

        EpochLoss rec;
        rec.epoch = epoch;
        for (const auto& idx : blocks) {
            opt.zero_grad();
            double mae = 0, con = 0;
            if (ae) {
                const auto fwd = ae_forward(model, data, idx, true);
                const Tensor x = gather(data, idx, 0, spec.p);
                const auto mask = gather_mask(data, idx);
                const auto rec_loss = loss_reconstruction(x.v, fwd.x_hat.v, mask, idx.size(), spec.p, spec.length);
                mae = rec_loss.value;

                Tensor g_xhat(idx.size(), spec.p, spec.length);
                g_xhat.v = rec_loss.grad;
                const Tensor g_in = model.second().backward(g_xhat);
                Tensor g_zb, g_w;
                nn::split_channels(g_in, 1, g_zb, g_w);
                Tensor g_z = nn::sum_time(g_zb);

                if (lambda > 0) {
                    std::vector<double> t(idx.size());
                    std::vector<int> units(idx.size());
                    for (std::size_t b = 0; b < idx.size(); ++b) {
                        t[b] = data.meta[idx[b]].cycle;
                        units[b] = data.meta[idx[b]].unit;
                    }
                    LossGrad c;
                    switch (constraint.kind) {
                        case ConstraintKind::correlation: c = loss_correlation(fwd.z.v, t); break;
                        case ConstraintKind::negative_gradient: {
                            auto ng = loss_negative_gradient(fwd.z.v, t, units);
                            if (ng.starved) ++rec.starved_batches;
                            c = std::move(ng);
                            break;
                        }
                        case ConstraintKind::functional: c = loss_functional(fwd.z.v, t, constraint.expected_hi); break;
                        case ConstraintKind::none: break;
                    }
                    con = c.value;
                    for (std::size_t b = 0; b < idx.size(); ++b) g_z.v[b] += lambda * c.grad[b];
                }
                model.first().backward(g_z);
            } else {
                const Tensor out = model.first().forward(network_input(spec, data, idx), true);
                Tensor grad(out.n, out.c, out.l);
                if (labelled) {
                    const double inv = 1.0 / static_cast<double>(idx.size());
                    for (std::size_t b = 0; b < idx.size(); ++b) {
                        const double d = out.v[b] - labels[idx[b]];
                        if (cfg.regression_loss == RegressionLoss::mse) {
                            mae += d * d * inv;
                            grad.v[b] = 2 * d * inv;
                        } else {
                            mae += std::abs(d) * inv;
                            grad.v[b] = ((d > 0) - (d < 0)) * inv;
                        }
                    }
                } else {
                    const Tensor x = gather(data, idx, 0, spec.p);
                    const auto mask = gather_mask(data, idx);
                    const auto r = loss_reconstruction(x.v, out.v, mask, idx.size(), spec.p, spec.length);
                    mae = r.value;
                    grad.v = r.grad;
                }
                model.first().backward(grad);
            }
            opt.step();
            const double w = static_cast<double>(idx.size());
            rec.mae += mae * w;
            rec.constraint += con * w;
        }
        const double n = static_cast<double>(pool.size());
        rec.mae /= n;
        rec.constraint /= n;
        rec.total = rec.mae + lambda * rec.constraint;
        if (!std::isfinite(rec.total))
            throw TrainingError("training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");
        history.push_back(rec);
    }
    return history;
}

std::vector<double> encode(Model& model, const WindowSet& windows) {
    if (!is_autoencoder(model.spec().kind)) throw ConfigError("encode needs an autoencoder");
    check_windows(model.spec(), windows);
    std::vector<double> z(windows.size());
    const auto idx = all_indices(windows);
    for_chunks(windows.size(), [&](std::size_t a, std::size_t b) {
        const std::span<const std::size_t> part(idx.data() + a, b - a);
        model.set_mask(gather_mask(windows, part));
        const Tensor out = model.first().forward(network_input(model.spec(), windows, part), false);
        std::copy(out.v.begin(), out.v.end(), z.begin() + static_cast<long>(a));
    });
    return z;
}

Tensor reconstruct(Model& model, const WindowSet& windows) {
    const auto& spec = model.spec();
    if (spec.kind == NetworkKind::supervised || spec.kind == NetworkKind::rul)
        throw ConfigError("reconstruct needs an autoencoder or residual model");
    if (!is_autoencoder(spec.kind)) return predict(model, windows);
    check_windows(spec, windows);
    Tensor out(windows.size(), spec.p, spec.length);
    const auto idx = all_indices(windows);
    for_chunks(windows.size(), [&](std::size_t a, std::size_t b) {
        const std::span<const std::size_t> part(idx.data() + a, b - a);
        const auto fwd = ae_forward(model, windows, part, false);
        std::copy(fwd.x_hat.v.begin(), fwd.x_hat.v.end(), out.v.begin() + static_cast<long>(a * spec.p * spec.length));
    });
    return out;
}

Tensor predict(Model& model, const WindowSet& windows) {
    const auto& spec = model.spec();
    if (is_autoencoder(spec.kind)) return reconstruct(model, windows);
    check_windows(spec, windows);
    const bool scalar = spec.kind == NetworkKind::supervised || spec.kind == NetworkKind::rul;
    Tensor out = scalar ? Tensor(windows.size(), 1, 1) : Tensor(windows.size(), spec.p, spec.length);
    const std::size_t per = out.c * out.l;
    const auto idx = all_indices(windows);
    for_chunks(windows.size(), [&](std::size_t a, std::size_t b) {
        const std::span<const std::size_t> part(idx.data() + a, b - a);
        const Tensor o = model.first().forward(network_input(spec, windows, part), false);
        std::copy(o.v.begin(), o.v.end(), out.v.begin() + static_cast<long>(a * per));
    });
    return out;
}

void save_checkpoint(Model& model, const TrainConfig& cfg, const std::filesystem::path& file,
                     const std::string& scaler_ref) {
    json j;
    j["format"] = kCheckpointFormat;
    j["spec"] = model.spec().to_json();
    j["train"] = {{"epochs", cfg.epochs},
                  {"batch_size", cfg.batch_size},
                  {"learning_rate", cfg.learning_rate},
                  {"seed", cfg.seed},
                  {"healthy_cycles", cfg.healthy_cycles},
                  {"units_per_batch", cfg.units_per_batch},
                  {"regression_loss", cfg.regression_loss == RegressionLoss::mse ? "mse" : "mae"}};
    j["scaler"] = scaler_ref;
    json weights = json::array();
    for (auto* p : model.params()) weights.push_back(p->value);
    j["weights"] = std::move(weights);
    json buffers = json::array();
    for (auto* b : model.buffers()) buffers.push_back(*b);
    j["buffers"] = std::move(buffers);
    std::ofstream out(file);
    if (!out) throw DataError("cannot write checkpoint " + file.string());
    out << j.dump();
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open checkpoint " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("corrupt checkpoint " + file.string() + ": " + e.what());
    }
    if (j.value("format", "") != kCheckpointFormat) throw DataError(file.string() + " is not a model checkpoint");

    TrainConfig cfg;
    const auto& t = j.at("train");
    cfg.epochs = t.at("epochs");
    cfg.batch_size = t.at("batch_size");
    cfg.learning_rate = t.at("learning_rate");
    cfg.seed = t.at("seed");
    cfg.healthy_cycles = t.at("healthy_cycles");
    cfg.units_per_batch = t.value("units_per_batch", std::size_t{1});
    cfg.regression_loss = t.at("regression_loss") == "mse" ? RegressionLoss::mse : RegressionLoss::mae;

    Checkpoint ck{Model(NetworkSpec::from_json(j.at("spec")), cfg.seed), cfg, j.value("scaler", "")};
    const auto params = ck.model.params();
    const auto& weights = j.at("weights");
    if (weights.size() != params.size()) throw DataError("checkpoint parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto v = weights[i].get<std::vector<double>>();
        if (v.size() != params[i]->value.size()) throw DataError("checkpoint parameter shape mismatch");
        params[i]->value = std::move(v);
    }
    const auto buffers = ck.model.buffers();
    const auto& saved = j.at("buffers");
    if (saved.size() != buffers.size()) throw DataError("checkpoint buffer count mismatch");
    for (std::size_t i = 0; i < buffers.size(); ++i) *buffers[i] = saved[i].get<std::vector<double>>();
    return ck;
}

void write_loss_history(const LossHistory& history, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << "epoch,l_total,l_mae,l_constraint\n";
    out.precision(17);
    for (const auto& e : history) out << e.epoch << ',' << e.total << ',' << e.mae << ',' << e.constraint << '\n';
}

}  // namespace hybridhi::models
