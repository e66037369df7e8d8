#include "hybridhi/datagen.hpp"

#include "hybridhi/error.hpp"
#include "hybridhi/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace hybridhi::datagen {

namespace {

// Per-class operating profile: relative cycle length, baseline level and
// excursion amplitude of the normalized conditions.
struct ClassProfile {
    const char* tag;
    double length;
    double base;
    double amplitude;
    double severity;  // shortens lifetimes (W -> Z)
};

constexpr std::array<ClassProfile, 3> kClasses{{
    {"short", 0.6, 0.10, 0.40, 0.0},
    {"medium", 0.8, 0.20, 0.55, 0.5},
    {"long", 1.0, 0.30, 0.70, 1.0},
}};

int class_index(ConditionClass c, int unit_id) {
    switch (c) {
        case ConditionClass::short_: return 0;
        case ConditionClass::medium: return 1;
        case ConditionClass::long_: return 2;
        case ConditionClass::mixed: break;
    }
    return unit_id % 3;
}

// Raw W = offset + scale * normalized W, giving channels disparate units
// the way altitude and Mach number differ.
double raw_scale(int j) { return std::pow(10.0, j % 4); }
double raw_offset(int j) { return 0.5 * j; }

}  // namespace

void GeneratorConfig::validate() const {
    if (n_units < 1) throw ConfigError("generator: n_units must be >= 1");
    if (n_sensors < 1) throw ConfigError("generator: n_sensors must be >= 1");
    if (n_conditions < 1) throw ConfigError("generator: n_conditions must be >= 1");
    if (samples_per_cycle < 2) throw ConfigError("generator: samples_per_cycle must be >= 2");
    if (cycles_per_unit.first > cycles_per_unit.second)
        throw ConfigError("generator: cycles_per_unit min exceeds max");
    if (cycles_per_unit.first < 2) throw ConfigError("generator: units need at least 2 cycles");
    if (noise.conditions < 0 || noise.degradation < 0 || noise.sensors < 0)
        throw ConfigError("generator: noise standard deviations must be >= 0");
    if (shape_exponent.first <= 0 || shape_exponent.first > shape_exponent.second)
        throw ConfigError("generator: shape exponent range must be positive and ordered");
    if (shape == DegradationShape::convex && shape_exponent.first <= 1.0)
        throw ConfigError("generator: convex shape requires exponents > 1");
    if (shape == DegradationShape::concave && shape_exponent.second >= 1.0)
        throw ConfigError("generator: concave shape requires exponents < 1");
    if (maintenance) {
        if (maintenance->probability < 0 || maintenance->probability > 1 || maintenance->magnitude < 0)
            throw ConfigError("generator: invalid maintenance recovery parameters");
    }
    if (degradation_gain < 0) throw ConfigError("generator: degradation_gain must be >= 0");
}

std::string to_string(DegradationShape s) {
    switch (s) {
        case DegradationShape::linear: return "linear";
        case DegradationShape::convex: return "convex";
        case DegradationShape::concave: return "concave";
    }
    return "linear";
}

DegradationShape parse_shape(const std::string& s) {
    if (s == "linear") return DegradationShape::linear;
    if (s == "convex") return DegradationShape::convex;
    if (s == "concave") return DegradationShape::concave;
    throw ConfigError("unknown degradation shape '" + s + "'");
}

std::string to_string(ConditionClass c) {
    switch (c) {
        case ConditionClass::mixed: return "mixed";
        case ConditionClass::short_: return "short";
        case ConditionClass::medium: return "medium";
        case ConditionClass::long_: return "long";
    }
    return "mixed";
}

ConditionClass parse_condition_class(const std::string& s) {
    if (s == "mixed") return ConditionClass::mixed;
    if (s == "short") return ConditionClass::short_;
    if (s == "medium") return ConditionClass::medium;
    if (s == "long") return ConditionClass::long_;
    throw ConfigError("unknown condition class '" + s + "'");
}

double degradation_curve(DegradationShape shape, double exponent, double t, double t_fail) {
    if (!(t_fail > 0)) throw ConfigError("degradation_curve: t_fail must be positive");
    if (!(exponent > 0)) throw ConfigError("degradation_curve: exponent must be positive");
    if (t < 0 || t > t_fail) throw DataError("degradation_curve: t outside [0, t_fail]");
    const double e = shape == DegradationShape::linear ? 1.0 : exponent;
    return 1.0 - std::pow(t / t_fail, e);
}

SensorMixing SensorMixing::draw(const GeneratorConfig& cfg) {
    auto rng = substream(cfg.seed, {0xF3});
    const int p = cfg.n_sensors;
    const int k = cfg.n_conditions;
    SensorMixing m;
    m.projection.resize(p, k);
    m.offset.resize(p);
    m.a.resize(p);
    m.b.resize(p);
    m.c.resize(p);
    for (int j = 0; j < p; ++j) {
        Eigen::VectorXd v(k);
        for (int i = 0; i < k; ++i) v(i) = normal(rng);
        if (v.norm() < 1e-9) v.setOnes();
        m.projection.row(j) = 1.5 * v.normalized().transpose();
        m.offset(j) = uniform(rng, -0.5, 0.5);
        m.a(j) = uniform(rng, 0.5, 1.5);
        const double sign_b = uniform(rng) < 0.5 ? -1.0 : 1.0;
        m.b(j) = sign_b * uniform(rng, 0.4, 1.0) * cfg.degradation_gain;
        m.c(j) = sign_b * uniform(rng, 0.2, 0.5) * cfg.degradation_gain;
    }
    return m;
}

Eigen::VectorXd SensorMixing::apply(const Eigen::Ref<const Eigen::VectorXd>& w, double z) const {
    const auto k = w.size();
    Eigen::VectorXd centered(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double norm = (w(i) - raw_offset(static_cast<int>(i))) / raw_scale(static_cast<int>(i));
        centered(i) = 2.0 * norm - 1.0;
    }
    const Eigen::VectorXd g = (projection * centered + offset).array().tanh().matrix();
    return (a.array() * g.array() + b.array() * z + c.array() * g.array() * z).matrix();
}

FleetDataset generate_fleet(const GeneratorConfig& cfg) {
    cfg.validate();
    const SensorMixing mixing = SensorMixing::draw(cfg);
    const int p = cfg.n_sensors;
    const int k = cfg.n_conditions;

    FleetDataset fleet;
    fleet.n_sensors = static_cast<std::size_t>(p);
    fleet.n_conditions = static_cast<std::size_t>(k);
    fleet.units.resize(static_cast<std::size_t>(cfg.n_units));

    for (int id = 0; id < cfg.n_units; ++id) {
        Unit& unit = fleet.units[static_cast<std::size_t>(id)];
        const int cls = class_index(cfg.condition_class, id);
        const ClassProfile& prof = kClasses[static_cast<std::size_t>(cls)];
        unit.id = id;
        unit.class_tag = prof.tag;

        // Lifetime and shape: Z := f2(W, eps2) through the class severity.
        auto rng_life = substream(cfg.seed, {1, static_cast<std::uint64_t>(id)});
        const double q_raw = 0.7 * uniform(rng_life) + 0.3 * (1.0 - prof.severity);
        const double jitter = normal(rng_life);
        const double q = std::clamp(q_raw + cfg.noise.degradation * jitter, 0.0, 1.0);
        const auto [cmin, cmax] = cfg.cycles_per_unit;
        const int n_cycles = static_cast<int>(std::lround(cmin + (cmax - cmin) * q));
        const double exponent_draw = uniform(rng_life, cfg.shape_exponent.first, cfg.shape_exponent.second);
        const double exponent = cfg.shape == DegradationShape::linear ? 1.0 : exponent_draw;
        const double t_fail = n_cycles - 1;

        std::vector<double> h(static_cast<std::size_t>(n_cycles));
        auto rng_maint = substream(cfg.seed, {4, static_cast<std::uint64_t>(id)});
        double hist_max = 1.0;
        double ratio = 1.0;  // h / nominal curve; changes only at recovery jumps
        for (int t = 0; t < n_cycles; ++t) {
            const double base = degradation_curve(cfg.shape, exponent, t, t_fail);
            double value = ratio * base;
            if (cfg.maintenance && t > 0 && t < n_cycles - 1 &&
                uniform(rng_maint) < cfg.maintenance->probability) {
                value = std::min(value + cfg.maintenance->magnitude * uniform(rng_maint), hist_max);
                if (base > 0) ratio = value / base;
            }
            if (t == n_cycles - 1) value = 0.0;
            value = std::clamp(value, 0.0, 1.0);
            hist_max = std::max(hist_max, value);
            h[static_cast<std::size_t>(t)] = value;
        }

        // W := f1(eps1): class-conditioned climb/cruise/descent profile.
        auto rng_w = substream(cfg.seed, {2, static_cast<std::uint64_t>(id)});
        auto rng_x = substream(cfg.seed, {3, static_cast<std::uint64_t>(id)});
        unit.cycles.resize(static_cast<std::size_t>(n_cycles));
        for (int t = 0; t < n_cycles; ++t) {
            CycleRecord& rec = unit.cycles[static_cast<std::size_t>(t)];
            rec.t = t;
            const double len_jitter = uniform(rng_w, -0.1, 0.1);
            const int m = std::max(2, static_cast<int>(std::lround(cfg.samples_per_cycle * prof.length * (1.0 + len_jitter))));
            const double intensity = uniform(rng_w, 0.8, 1.2);
            rec.w.resize(m, k);
            rec.x.resize(m, p);
            const double z = 1.0 - h[static_cast<std::size_t>(t)];
            for (int s = 0; s < m; ++s) {
                const double phase = static_cast<double>(s) / (m - 1);
                const double profile = std::sin(std::numbers::pi * phase);
                for (int j = 0; j < k; ++j) {
                    const double shape_pow = (j % 2 == 0) ? 1.0 : 2.0;
                    const double norm = prof.base + prof.amplitude * intensity * std::pow(profile, shape_pow) +
                                        cfg.noise.conditions * normal(rng_w);
                    rec.w(s, j) = raw_offset(j) + raw_scale(j) * norm;
                }
                const Eigen::VectorXd w_row = rec.w.row(s).transpose();
                const Eigen::VectorXd x = mixing.apply(w_row, z);
                for (int j = 0; j < p; ++j) {
                    const double eps = cfg.noise.sensors > 0 ? cfg.noise.sensors * normal(rng_x) : 0.0;
                    rec.x(s, j) = x(j) + eps;
                }
            }
        }
        unit.hi_gt = std::move(h);
    }
    return fleet;
}

}  // namespace hybridhi::datagen
