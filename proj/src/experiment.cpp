#include "hybridhi/experiment.hpp"

#include "hybridhi/error.hpp"
#include "hybridhi/weibull.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hybridhi::experiment {

namespace {

template <class E, std::size_t N>
E parse_enum(const std::string& key, const std::string& value, const std::array<std::pair<E, const char*>, N>& names) {
    for (const auto& [e, n] : names)
        if (value == n) return e;
    std::string options;
    for (const auto& [e, n] : names) options += (options.empty() ? "" : ", ") + std::string(n);
    throw ConfigError(key + ": unknown value '" + value + "' (" + options + ")");
}

template <class E, std::size_t N>
std::string enum_name(E v, const std::array<std::pair<E, const char*>, N>& names) {
    for (const auto& [e, n] : names)
        if (e == v) return n;
    return "?";
}

constexpr std::array<std::pair<DatasetPreset, const char*>, 3> kPresets{
    {{DatasetPreset::synthetic, "synthetic"}, {DatasetPreset::turbofan, "turbofan"}, {DatasetPreset::battery, "battery"}}};
constexpr std::array<std::pair<SplitPreset, const char*>, 3> kSplits{
    {{SplitPreset::in_distribution, "in_distribution"}, {SplitPreset::ood, "ood"}, {SplitPreset::custom, "custom"}}};
constexpr std::array<std::pair<Method, const char*>, 4> kMethods{{{Method::proposed, "proposed"},
                                                                  {Method::residual_ae, "residual_ae"},
                                                                  {Method::residual_reg, "residual_reg"},
                                                                  {Method::supervised, "supervised"}}};
constexpr std::array<std::pair<Ablation, const char*>, 4> kAblations{{{Ablation::none, "none"},
                                                                      {Ablation::no_learning_bias, "no_learning_bias"},
                                                                      {Ablation::no_inductive_bias, "no_inductive_bias"},
                                                                      {Ablation::neither, "neither"}}};
constexpr std::array<std::pair<WeibullSource, const char*>, 3> kWeibullSources{
    {{WeibullSource::first_pass, "first_pass"}, {WeibullSource::ground_truth, "ground_truth"}, {WeibullSource::file, "file"}}};
constexpr std::array<std::pair<models::RulPreset, const char*>, 2> kRulPresets{
    {{models::RulPreset::turbofan, "turbofan"}, {models::RulPreset::battery, "battery"}}};
constexpr std::array<std::pair<datagen::DegradationShape, const char*>, 3> kShapes{
    {{datagen::DegradationShape::linear, "linear"},
     {datagen::DegradationShape::convex, "convex"},
     {datagen::DegradationShape::concave, "concave"}}};
constexpr std::array<std::pair<models::RegressionLoss, const char*>, 2> kLosses{
    {{models::RegressionLoss::mae, "mae"}, {models::RegressionLoss::mse, "mse"}}};

const std::vector<std::string> kKnownKeys{
    "name", "preset", "out", "seeds",
    "data.source", "data.downsample", "data.split", "data.train_units", "data.test_units",
    "generator.n_units", "generator.cycles_min", "generator.cycles_max", "generator.samples_per_cycle",
    "generator.n_sensors", "generator.n_conditions", "generator.shape", "generator.exponent_min",
    "generator.exponent_max", "generator.condition_class", "generator.noise_conditions",
    "generator.noise_degradation", "generator.noise_sensors", "generator.maintenance_probability",
    "generator.maintenance_magnitude", "generator.degradation_gain", "generator.seed",
    "method.name", "method.constraint", "method.lambda", "method.ablation", "method.kernel",
    "method.mask_padding", "method.window", "method.stride", "method.healthy_cycles",
    "train.epochs", "train.batch_size", "train.learning_rate", "train.units_per_batch", "train.loss",
    "weibull.source", "weibull.file", "weibull.confidence", "weibull.thresholds",
    "causal.enabled", "causal.min_cycle", "causal.regressor", "causal.min_samples_leaf", "causal.folds",
    "causal.max_samples",
    "rul.enabled", "rul.preset", "rul.window", "rul.stride", "rul.cap", "rul.epochs", "rul.batch_size",
    "rul.learning_rate", "rul.loss"};

std::size_t count(const kv::Document& d, const std::string& key, std::size_t fallback) {
    const auto v = d.integer(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError(key + " must be >= 0");
    return static_cast<std::size_t>(v);
}

std::vector<int> id_list(const kv::Document& d, const std::string& key) {
    std::vector<int> out;
    for (double v : d.list(key, {})) {
        if (v != std::floor(v)) throw ConfigError(key + ": unit ids must be integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::vector<int> pick(const FleetDataset& fleet, const std::vector<int>& wanted, const std::string& what) {
    for (int id : wanted) {
        const bool found = std::any_of(fleet.units.begin(), fleet.units.end(), [id](const Unit& u) { return u.id == id; });
        if (!found) throw DataError(what + " unit " + std::to_string(id) + " is not in the dataset");
    }
    return wanted;
}

}  // namespace

std::string to_string(DatasetPreset v) { return enum_name(v, kPresets); }
std::string to_string(SplitPreset v) { return enum_name(v, kSplits); }
std::string to_string(Method v) { return enum_name(v, kMethods); }
std::string to_string(Ablation v) { return enum_name(v, kAblations); }
std::string to_string(WeibullSource v) { return enum_name(v, kWeibullSources); }

models::NetworkKind ExperimentConfig::network_kind() const {
    switch (method) {
        case Method::residual_ae: return models::NetworkKind::residual_ae;
        case Method::residual_reg: return models::NetworkKind::residual_reg;
        case Method::supervised: return models::NetworkKind::supervised;
        case Method::proposed: break;
    }
    return ablation == Ablation::no_inductive_bias || ablation == Ablation::neither ? models::NetworkKind::symmetric_ae
                                                                                   : models::NetworkKind::proposed_ae;
}

models::ConstraintSpec ExperimentConfig::constraint_spec() const {
    models::ConstraintSpec c;
    c.kind = method == Method::proposed ? constraint : models::ConstraintKind::none;
    c.lambda = lambda;
    return c;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
    if (downsample < 1) throw ConfigError("data.downsample must be >= 1");
    if (split == SplitPreset::custom && (train_units.empty() || test_units.empty()))
        throw ConfigError("data.split = custom needs data.train_units and data.test_units");
    if (source != "generate" && preset == DatasetPreset::synthetic && source.empty())
        throw ConfigError("data.source must be 'generate' or a directory");
    if (preset != DatasetPreset::synthetic && source == "generate")
        throw ConfigError("preset " + to_string(preset) + " needs data.source pointing at converted CSVs");
    if (source == "generate") generator.validate();
    if (!(lambda >= 0)) throw ConfigError("method.lambda must be >= 0");
    if (kernel < 1 || window < 1 || stride < 1) throw ConfigError("method.kernel, window and stride must be >= 1");
    if (healthy_cycles < 1) throw ConfigError("method.healthy_cycles must be >= 1");
    if (ablation != Ablation::none && method != Method::proposed)
        throw ConfigError("method.ablation applies to the proposed method only");
    train.validate();
    if (!(weibull_confidence > 0 && weibull_confidence < 1)) throw ConfigError("weibull.confidence must be in (0, 1)");
    if (weibull_source == WeibullSource::file && weibull_file.empty())
        throw ConfigError("weibull.source = file needs weibull.file");
    if (weibull_thresholds.size() < 3) throw ConfigError("weibull.thresholds needs at least 3 values");
    for (double s : weibull_thresholds)
        if (!(s > 0 && s < 1)) throw ConfigError("weibull.thresholds must lie in (0, 1)");
    regressor.validate();
    if (rul_config.length < 1 || rul_config.stride < 1) throw ConfigError("rul.window and rul.stride must be >= 1");
    if (rul_config.cap && !(*rul_config.cap > 0)) throw ConfigError("rul.cap must be positive (0 disables)");
    rul_config.train.validate();
}

ExperimentConfig preset_defaults(DatasetPreset preset, Method method) {
    ExperimentConfig c;
    c.preset = preset;
    c.method = method;
    c.weibull_thresholds = weibull::default_thresholds();
    const bool ae = method == Method::proposed;
    c.train.epochs = 20;
    c.train.learning_rate = 1e-4;
    c.rul_config.train.regression_loss = models::RegressionLoss::mse;
    switch (preset) {
        case DatasetPreset::synthetic:
            c.name = "synthetic";
            c.kernel = 7;
            c.train.batch_size = ae ? 20 : 64;
            c.window = 50;
            c.stride = 4;
            c.healthy_cycles = 20;
            c.rul_config.preset = models::RulPreset::turbofan;
            c.rul_config.length = 50;
            c.rul_config.stride = 8;
            c.rul_config.train.batch_size = 64;
            c.rul_config.train.learning_rate = 1e-3;
            break;
        case DatasetPreset::turbofan:
            c.name = "turbofan";
            c.downsample = 10;
            c.train.batch_size = ae ? 20 : 512;
            c.window = 50;
            c.healthy_cycles = 20;
            c.rul_config.preset = models::RulPreset::turbofan;
            c.rul_config.length = 50;
            c.rul_config.train.batch_size = 512;
            break;
        case DatasetPreset::battery:
            c.name = "battery";
            c.downsample = 2;
            c.train.batch_size = ae ? 128 : 1024;
            c.window = 200;
            c.healthy_cycles = 100;
            c.rul_config.preset = models::RulPreset::battery;
            c.rul_config.length = 200;
            c.rul_config.train.batch_size = 1024;
            break;
    }
    if (method == Method::supervised) c.train.regression_loss = models::RegressionLoss::mse;
    return c;
}

ExperimentConfig from_document(const kv::Document& d, const std::string& env_out_root) {
    const auto unknown = d.unknown_keys(kKnownKeys);
    if (!unknown.empty()) throw ConfigError("unknown config key '" + unknown.front() + "'");

    const auto preset = parse_enum("preset", d.string("preset", "synthetic"), kPresets);
    const auto method = parse_enum("method.name", d.string("method.name", "proposed"), kMethods);
    ExperimentConfig c = preset_defaults(preset, method);

    c.name = d.string("name", c.name);
    if (c.name.empty() || c.name.find('/') != std::string::npos) throw ConfigError("name must be a plain, non-empty word");
    if (d.contains("out"))
        c.out = d.string("out", "");
    else
        c.out = std::filesystem::path(env_out_root.empty() ? "runs" : env_out_root) / c.name;
    if (d.contains("seeds")) {
        c.seeds.clear();
        for (double s : d.list("seeds", {})) {
            if (s < 0 || s != std::floor(s)) throw ConfigError("seeds must be non-negative integers");
            c.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }

    c.source = d.string("data.source", c.source);
    c.downsample = static_cast<int>(d.integer("data.downsample", c.downsample));
    c.split = parse_enum("data.split", d.string("data.split", to_string(c.split)), kSplits);
    c.train_units = id_list(d, "data.train_units");
    c.test_units = id_list(d, "data.test_units");

    auto& g = c.generator;
    g.n_units = static_cast<int>(d.integer("generator.n_units", g.n_units));
    g.cycles_per_unit.first = static_cast<int>(d.integer("generator.cycles_min", g.cycles_per_unit.first));
    g.cycles_per_unit.second = static_cast<int>(d.integer("generator.cycles_max", g.cycles_per_unit.second));
    g.samples_per_cycle = static_cast<int>(d.integer("generator.samples_per_cycle", g.samples_per_cycle));
    g.n_sensors = static_cast<int>(d.integer("generator.n_sensors", g.n_sensors));
    g.n_conditions = static_cast<int>(d.integer("generator.n_conditions", g.n_conditions));
    g.shape = parse_enum("generator.shape", d.string("generator.shape", datagen::to_string(g.shape)), kShapes);
    g.shape_exponent.first = d.number("generator.exponent_min", g.shape_exponent.first);
    g.shape_exponent.second = d.number("generator.exponent_max", g.shape_exponent.second);
    g.condition_class = datagen::parse_condition_class(d.string("generator.condition_class", to_string(g.condition_class)));
    g.noise.conditions = d.number("generator.noise_conditions", g.noise.conditions);
    g.noise.degradation = d.number("generator.noise_degradation", g.noise.degradation);
    g.noise.sensors = d.number("generator.noise_sensors", g.noise.sensors);
    const double mp = d.number("generator.maintenance_probability", 0.0);
    const double mm = d.number("generator.maintenance_magnitude", 0.0);
    if (mp > 0 || mm > 0) g.maintenance = datagen::MaintenanceRecovery{mp, mm};
    g.degradation_gain = d.number("generator.degradation_gain", g.degradation_gain);
    g.seed = static_cast<std::uint64_t>(count(d, "generator.seed", g.seed));

    c.constraint = models::parse_constraint(d.string("method.constraint", models::to_string(c.constraint)));
    c.ablation = parse_enum("method.ablation", d.string("method.ablation", "none"), kAblations);
    c.lambda = d.number("method.lambda", c.lambda);
    if (c.ablation == Ablation::no_learning_bias || c.ablation == Ablation::neither) {
        if (d.contains("method.lambda") && c.lambda != 0)
            throw ConfigError("method.ablation = " + to_string(c.ablation) + " fixes method.lambda to 0");
        c.lambda = 0.0;
    }
    c.kernel = count(d, "method.kernel", c.kernel);
    c.mask_padding = d.boolean("method.mask_padding", c.mask_padding);
    c.window = count(d, "method.window", c.window);
    c.stride = count(d, "method.stride", c.stride);
    c.healthy_cycles = static_cast<int>(d.integer("method.healthy_cycles", c.healthy_cycles));

    c.train.epochs = static_cast<int>(d.integer("train.epochs", c.train.epochs));
    c.train.batch_size = count(d, "train.batch_size", c.train.batch_size);
    c.train.learning_rate = d.number("train.learning_rate", c.train.learning_rate);
    c.train.units_per_batch = count(d, "train.units_per_batch", c.train.units_per_batch);
    c.train.regression_loss = parse_enum("train.loss", d.string("train.loss", enum_name(c.train.regression_loss, kLosses)), kLosses);

    c.weibull_source = parse_enum("weibull.source", d.string("weibull.source", to_string(c.weibull_source)), kWeibullSources);
    c.weibull_file = d.string("weibull.file", "");
    c.weibull_confidence = d.number("weibull.confidence", c.weibull_confidence);
    c.weibull_thresholds = d.list("weibull.thresholds", c.weibull_thresholds);

    c.causal = d.boolean("causal.enabled", c.causal);
    c.causal_min_cycle = static_cast<int>(d.integer("causal.min_cycle", c.causal_min_cycle));
    c.regressor.name = d.string("causal.regressor", c.regressor.name);
    c.regressor.min_samples_leaf = count(d, "causal.min_samples_leaf", c.regressor.min_samples_leaf);
    c.regressor.folds = count(d, "causal.folds", c.regressor.folds);
    c.regressor.max_samples = count(d, "causal.max_samples", c.regressor.max_samples);

    auto& r = c.rul_config;
    c.rul = d.boolean("rul.enabled", c.rul);
    r.preset = parse_enum("rul.preset", d.string("rul.preset", enum_name(r.preset, kRulPresets)), kRulPresets);
    r.length = count(d, "rul.window", r.length);
    r.stride = count(d, "rul.stride", r.stride);
    if (d.contains("rul.cap")) {
        const double cap = d.number("rul.cap", 0);
        if (cap < 0) throw ConfigError("rul.cap must be >= 0 (0 disables)");
        r.cap = cap > 0 ? std::optional<double>(cap) : std::nullopt;
    } else if (c.split == SplitPreset::ood && preset != DatasetPreset::synthetic) {
        r.cap = preset == DatasetPreset::turbofan ? 60.0 : 300.0;
    }
    r.train.epochs = static_cast<int>(d.integer("rul.epochs", r.train.epochs));
    r.train.batch_size = count(d, "rul.batch_size", r.train.batch_size);
    r.train.learning_rate = d.number("rul.learning_rate", r.train.learning_rate);
    r.train.regression_loss = parse_enum("rul.loss", d.string("rul.loss", enum_name(r.train.regression_loss, kLosses)), kLosses);

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& file, const std::string& env_out_root) {
    return from_document(kv::Document::load(file), env_out_root);
}

kv::Document to_document(const ExperimentConfig& c) {
    kv::Document d;
    d.set("name", c.name);
    d.set("preset", to_string(c.preset));
    d.set("out", c.out.string());
    d.set("seeds", std::vector<double>(c.seeds.begin(), c.seeds.end()));

    d.set("data.source", c.source);
    d.set("data.downsample", static_cast<double>(c.downsample));
    d.set("data.split", to_string(c.split));
    d.set("data.train_units", as_doubles(c.train_units));
    d.set("data.test_units", as_doubles(c.test_units));

    if (c.source == "generate") {
        const auto& g = c.generator;
        d.set("generator.n_units", static_cast<double>(g.n_units));
        d.set("generator.cycles_min", static_cast<double>(g.cycles_per_unit.first));
        d.set("generator.cycles_max", static_cast<double>(g.cycles_per_unit.second));
        d.set("generator.samples_per_cycle", static_cast<double>(g.samples_per_cycle));
        d.set("generator.n_sensors", static_cast<double>(g.n_sensors));
        d.set("generator.n_conditions", static_cast<double>(g.n_conditions));
        d.set("generator.shape", datagen::to_string(g.shape));
        d.set("generator.exponent_min", g.shape_exponent.first);
        d.set("generator.exponent_max", g.shape_exponent.second);
        d.set("generator.condition_class", datagen::to_string(g.condition_class));
        d.set("generator.noise_conditions", g.noise.conditions);
        d.set("generator.noise_degradation", g.noise.degradation);
        d.set("generator.noise_sensors", g.noise.sensors);
        d.set("generator.maintenance_probability", g.maintenance ? g.maintenance->probability : 0.0);
        d.set("generator.maintenance_magnitude", g.maintenance ? g.maintenance->magnitude : 0.0);
        d.set("generator.degradation_gain", g.degradation_gain);
        d.set("generator.seed", static_cast<double>(g.seed));
    }

    d.set("method.name", to_string(c.method));
    d.set("method.constraint", models::to_string(c.constraint));
    d.set("method.lambda", c.lambda);
    d.set("method.ablation", to_string(c.ablation));
    d.set("method.kernel", static_cast<double>(c.kernel));
    d.set("method.mask_padding", c.mask_padding);
    d.set("method.window", static_cast<double>(c.window));
    d.set("method.stride", static_cast<double>(c.stride));
    d.set("method.healthy_cycles", static_cast<double>(c.healthy_cycles));

    d.set("train.epochs", static_cast<double>(c.train.epochs));
    d.set("train.batch_size", static_cast<double>(c.train.batch_size));
    d.set("train.learning_rate", c.train.learning_rate);
    d.set("train.units_per_batch", static_cast<double>(c.train.units_per_batch));
    d.set("train.loss", enum_name(c.train.regression_loss, kLosses));

    d.set("weibull.source", to_string(c.weibull_source));
    d.set("weibull.file", c.weibull_file.string());
    d.set("weibull.confidence", c.weibull_confidence);
    d.set("weibull.thresholds", c.weibull_thresholds);

    d.set("causal.enabled", c.causal);
    d.set("causal.min_cycle", static_cast<double>(c.causal_min_cycle));
    d.set("causal.regressor", c.regressor.name);
    d.set("causal.min_samples_leaf", static_cast<double>(c.regressor.min_samples_leaf));
    d.set("causal.folds", static_cast<double>(c.regressor.folds));
    d.set("causal.max_samples", static_cast<double>(c.regressor.max_samples));

    const auto& r = c.rul_config;
    d.set("rul.enabled", c.rul);
    d.set("rul.preset", enum_name(r.preset, kRulPresets));
    d.set("rul.window", static_cast<double>(r.length));
    d.set("rul.stride", static_cast<double>(r.stride));
    d.set("rul.cap", r.cap.value_or(0.0));
    d.set("rul.epochs", static_cast<double>(r.train.epochs));
    d.set("rul.batch_size", static_cast<double>(r.train.batch_size));
    d.set("rul.learning_rate", r.train.learning_rate);
    d.set("rul.loss", enum_name(r.train.regression_loss, kLosses));
    return d;
}

Split resolve_split(const ExperimentConfig& cfg, const FleetDataset& fleet) {
    Split s;
    switch (cfg.split) {
        case SplitPreset::custom:
            s.train = pick(fleet, cfg.train_units, "train");
            s.test = pick(fleet, cfg.test_units, "test");
            break;
        case SplitPreset::in_distribution:
            if (cfg.preset == DatasetPreset::turbofan) {
                s.train = pick(fleet, {1, 2, 3, 4, 5, 6, 7, 8, 9}, "train");
                s.test = pick(fleet, {10, 11, 12, 13, 14, 15}, "test");
            } else if (cfg.preset == DatasetPreset::battery) {
                s.train = pick(fleet, {4, 5, 1, 7, 17, 19, 13, 14, 15}, "train");
                s.test = pick(fleet, {6, 8, 20, 16}, "test");
            } else {
                // first two thirds by id; round-robin classes keep every class on both sides
                std::vector<int> ids;
                for (const auto& u : fleet.units) ids.push_back(u.id);
                std::sort(ids.begin(), ids.end());
                const auto n_train = static_cast<std::size_t>(std::lround(ids.size() * 2.0 / 3.0));
                s.train.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
                s.test.assign(ids.begin() + static_cast<long>(n_train), ids.end());
            }
            break;
        case SplitPreset::ood:
            if (cfg.preset == DatasetPreset::turbofan) {
                s.train = pick(fleet, {1, 5, 9, 12, 14}, "train");
                s.test = pick(fleet, {2, 3, 4, 7, 15, 6, 8, 10, 11, 13}, "test");
            } else if (cfg.preset == DatasetPreset::battery) {
                s.train = pick(fleet, {1, 4, 5, 6, 7, 8}, "train");
                s.test = pick(fleet, {17, 19, 20, 13, 14, 15, 16}, "test");
            } else {
                // unseen operating class: train on short/medium, test on long
                for (const auto& u : fleet.units) (u.class_tag == "long" ? s.test : s.train).push_back(u.id);
            }
            break;
    }
    if (s.train.empty() || s.test.empty())
        throw ConfigError("split " + to_string(cfg.split) + " leaves the train or test side empty");
    std::set<int> seen(s.train.begin(), s.train.end());
    for (int id : s.test)
        if (seen.contains(id)) throw ConfigError("unit " + std::to_string(id) + " is in both train and test");
    return s;
}

}  // namespace hybridhi::experiment
