#pragma once

#include "hybridhi/diagnostics.hpp"
#include "hybridhi/trajectory.hpp"

#include "json.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace hybridhi::metrics {

enum class MonotonicityForm {
    signed_sum,    // |sum_j (Ind(d_j) - Ind(-d_j))| / (m - 1)
    per_step_abs,  // sum_j |Ind(d_j) - Ind(-d_j)| / (m - 1), fraction of non-flat steps
};

double monotonicity(std::span<const double> h, MonotonicityForm form = MonotonicityForm::signed_sum);

// |Spearman(t, h)| with average ranks for ties; 0 when either side has no
// rank variance.
double trendability(std::span<const double> h, std::span<const double> t);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> v);

using Trajectory = HITrajectory;

struct PrognosabilityResult {
    double value = 0.0;
    bool degenerate = false;  // no unit degrades (mean |end - start| == 0)
};

// exp(-sigma(h_end) / mean|h_end - h_0|) with population sigma.
PrognosabilityResult prognosability(std::span<const Trajectory> fleet);

// Mutual information in nats from a bins x bins equal-width histogram.
double mutual_information(std::span<const double> a, std::span<const double> b, int bins = 10);

struct MutInfResult {
    double score = 0.0;      // mean over scored units of 1 - exp(-I)
    std::size_t units = 0;   // units that entered the mean
    Diagnostics warnings;    // units skipped for being shorter than 10
};

// Each unit pairs its HI with RUL = t_end - t.
MutInfResult mutual_info_score(std::span<const Trajectory> fleet);
inline double mutual_info_mapping(double nats) { return 1.0 - std::exp(-nats); }

// 100 * mean(|est - gt| / max(gt, 0.01)).
double mape(std::span<const double> estimate, std::span<const double> truth);

struct Criteria {
    double mon = 0, tren = 0, prog = 0, mutinf = 0, mape = 0;
    bool has_mape = false;
};

// All criteria for a fleet of estimated trajectories; Mon and Tren are
// averaged over units. `truth` (aligned with `fleet`) enables MAPE.
Criteria evaluate(std::span<const Trajectory> fleet, std::span<const Trajectory> truth = {});

struct Stat {
    double mean = 0, std = 0;
};

// Population statistics across runs.
Stat aggregate(std::span<const double> values);

struct MetricReport {
    std::string label;
    std::vector<std::uint64_t> seeds;  // one per run
    std::vector<Criteria> runs;

    Stat mon() const;
    Stat tren() const;
    Stat prog() const;
    Stat mutinf() const;
    Stat mape() const;
};

// Table-4 shaped document: per-run criteria plus mean/std per column.
nlohmann::json to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

}  // namespace hybridhi::metrics
