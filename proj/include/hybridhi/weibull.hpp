#pragma once

#include "hybridhi/diagnostics.hpp"
#include "hybridhi/error.hpp"
#include "hybridhi/trajectory.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <vector>

namespace hybridhi::weibull {

// A fit that could not be carried out; residual_norm is NaN when the
// failure happened before any optimisation.
class FitError : public TrainingError {
public:
    FitError(const std::string& what, double residual_norm)
        : TrainingError(what), residual_norm_(residual_norm) {}
    double residual_norm() const noexcept { return residual_norm_; }

private:
    double residual_norm_;
};

// Expected-HI function g(t) = A - (B * eta_P(t))^C where
// eta_P(t) = t * (-ln(1 - P))^(-1/beta), clipped to [0, A].
struct WeibullFit {
    double beta = 1.0;
    std::map<double, double> eta_by_threshold;  // s -> eta_s
    double A = 1.0, B = 1.0, C = 1.0;
    double P = 0.5;
    Diagnostics warnings;

    double operator()(double t) const;
};

double g_of_t(double t, const WeibullFit& fit);

// First cycle with h <= s, linearly interpolated between the bracketing
// cycles. Units that never reach s are dropped; thresholds reached by no
// unit are omitted with a warning.
struct CrossingTimes {
    std::map<double, std::vector<double>> times;
    Diagnostics warnings;
};
CrossingTimes crossing_times(std::span<const HITrajectory> trajectories, std::span<const double> thresholds);

struct ShapeScale {
    double beta = 0;
    double eta = 0;
    bool degenerate = false;  // beta hit the cap of 200
};

// Two-parameter maximum-likelihood fit; needs >= 3 positive samples.
ShapeScale fit_weibull(std::span<const double> times);

// Scale MLE with the shape held fixed.
double fit_scale(std::span<const double> times, double beta);

struct EtaCurve {
    double A = 1, B = 1, C = 1;
    double residual_norm = 0;
};

// Least squares of s against A - (B eta_s)^C with A in [0.8, 1.5], B, C > 0.
EtaCurve fit_eta_curve(std::span<const std::pair<double, double>> eta_s_pairs);

std::vector<double> default_thresholds();  // 0.9, 0.8, ..., 0.2

// Full pipeline: crossing times per threshold, shape fitted once on the
// failure times (last cycle of every unit) and shared, scale per threshold,
// then the eta curve.
WeibullFit fit_expected_hi(std::span<const HITrajectory> trajectories, std::span<const double> thresholds,
                           double confidence = 0.5);

void save_fit(const WeibullFit& fit, const std::filesystem::path& file);
WeibullFit load_fit(const std::filesystem::path& file);

}  // namespace hybridhi::weibull
