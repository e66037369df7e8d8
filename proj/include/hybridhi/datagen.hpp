#pragma once

#include "hybridhi/fleet.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace hybridhi::datagen {

enum class DegradationShape { linear, convex, concave };

// Operating-condition class. `mixed` assigns short/medium/long round-robin
// over unit ids; the others pin every unit to one class.
enum class ConditionClass { mixed, short_, medium, long_ };

struct NoiseLevels {
    double conditions = 0.02;   // eps1: per-sample jitter on W
    double degradation = 0.05;  // eps2: jitter on the unit lifetime draw
    double sensors = 0.01;      // eps3: additive sensor noise
};

struct MaintenanceRecovery {
    double probability = 0.0;  // per cycle
    double magnitude = 0.0;    // max upward jump in h
};

struct GeneratorConfig {
    int n_units = 12;
    std::pair<int, int> cycles_per_unit = {90, 130};
    int samples_per_cycle = 32;
    int n_sensors = 5;
    int n_conditions = 2;
    DegradationShape shape = DegradationShape::linear;
    std::pair<double, double> shape_exponent = {1.0, 1.0};
    ConditionClass condition_class = ConditionClass::mixed;
    NoiseLevels noise;
    std::optional<MaintenanceRecovery> maintenance;
    // Scales the degradation terms (b_j, c_j) of the sensor mixing; 0 makes
    // every sensor a function of W alone.
    double degradation_gain = 1.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

std::string to_string(DegradationShape s);
DegradationShape parse_shape(const std::string& s);
std::string to_string(ConditionClass c);
ConditionClass parse_condition_class(const std::string& s);

// h(t) = 1 - (t / t_fail)^exponent. Throws ConfigError for t_fail <= 0 or
// exponent <= 0, and DataError for t outside [0, t_fail].
double degradation_curve(DegradationShape shape, double exponent, double t, double t_fail);

// Sensor mixing f3 with coefficients fixed per fleet:
//   x_j = a_j g_j(W) + b_j z + c_j g_j(W) z,   g_j(W) = tanh(v_j . W + d_j)
struct SensorMixing {
    Eigen::MatrixXd projection;  // p x k, rows v_j
    Eigen::VectorXd offset;      // d_j
    Eigen::VectorXd a, b, c;

    static SensorMixing draw(const GeneratorConfig& cfg);
    Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& w, double z) const;
};

FleetDataset generate_fleet(const GeneratorConfig& cfg);

}  // namespace hybridhi::datagen
