#include "hybridhi/metrics.hpp"

#include "hybridhi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hybridhi::metrics {

double monotonicity(std::span<const double> h, MonotonicityForm form) {
    if (h.size() < 2) throw DataError("monotonicity: need at least 2 observations");
    double signed_total = 0.0, abs_total = 0.0;
    for (std::size_t j = 0; j + 1 < h.size(); ++j) {
        const double d = h[j + 1] - h[j];
        const double step = (d > 0 ? 1.0 : 0.0) - (-d > 0 ? 1.0 : 0.0);
        signed_total += step;
        abs_total += std::abs(step);
    }
    const double n = static_cast<double>(h.size() - 1);
    return form == MonotonicityForm::signed_sum ? std::abs(signed_total) / n : abs_total / n;
}

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0 || sbb <= 0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

double trendability(std::span<const double> h, std::span<const double> t) {
    if (h.size() != t.size()) throw DataError("trendability: h and t lengths differ");
    if (h.size() < 2) throw DataError("trendability: need at least 2 observations");
    const auto rh = average_ranks(h);
    const auto rt = average_ranks(t);
    return std::min(1.0, std::abs(pearson(rh, rt)));
}

PrognosabilityResult prognosability(std::span<const Trajectory> fleet) {
    if (fleet.empty()) throw DataError("prognosability: empty fleet");
    std::vector<double> ends, drops;
    for (const auto& u : fleet) {
        if (u.h.empty()) throw DataError("prognosability: unit without observations");
        ends.push_back(u.h.back());
        drops.push_back(std::abs(u.h.back() - u.h.front()));
    }
    const double n = static_cast<double>(ends.size());
    const double mean_end = std::accumulate(ends.begin(), ends.end(), 0.0) / n;
    double var = 0.0;
    for (double e : ends) var += (e - mean_end) * (e - mean_end);
    const double sigma = std::sqrt(var / n);
    const double mu = std::accumulate(drops.begin(), drops.end(), 0.0) / n;
    if (mu <= 0.0) return {0.0, true};
    return {std::exp(-sigma / mu), false};
}

double mutual_information(std::span<const double> a, std::span<const double> b, int bins) {
    if (a.size() != b.size()) throw DataError("mutual_information: lengths differ");
    if (a.empty() || bins < 1) return 0.0;
    auto bin_index = [bins](double v, double lo, double hi) {
        if (hi <= lo) return 0;
        const int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        return std::clamp(k, 0, bins - 1);
    };
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    std::vector<double> joint(static_cast<std::size_t>(bins * bins), 0.0), pa(static_cast<std::size_t>(bins), 0.0),
        pb(static_cast<std::size_t>(bins), 0.0);
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int ia = bin_index(a[i], *amin, *amax);
        const int ib = bin_index(b[i], *bmin, *bmax);
        joint[static_cast<std::size_t>(ia * bins + ib)] += 1.0 / n;
        pa[static_cast<std::size_t>(ia)] += 1.0 / n;
        pb[static_cast<std::size_t>(ib)] += 1.0 / n;
    }
    double mi = 0.0;
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            const double pij = joint[static_cast<std::size_t>(i * bins + j)];
            if (pij > 0) mi += pij * std::log(pij / (pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(j)]));
        }
    return std::max(0.0, mi);
}

MutInfResult mutual_info_score(std::span<const Trajectory> fleet) {
    MutInfResult res;
    double total = 0.0;
    for (std::size_t u = 0; u < fleet.size(); ++u) {
        const auto& tr = fleet[u];
        if (tr.h.size() < 10 || tr.t.size() != tr.h.size()) {
            res.warnings.push_back({"short_series", "unit index " + std::to_string(u) + " has fewer than 10 aligned observations"});
            continue;
        }
        std::vector<double> rul(tr.t.size());
        for (std::size_t i = 0; i < tr.t.size(); ++i) rul[i] = tr.t.back() - tr.t[i];
        total += mutual_info_mapping(mutual_information(tr.h, rul));
        ++res.units;
    }
    res.score = res.units > 0 ? total / static_cast<double>(res.units) : 0.0;
    return res;
}

double mape(std::span<const double> estimate, std::span<const double> truth) {
    if (estimate.size() != truth.size()) throw DataError("mape: estimate and ground truth lengths differ");
    if (estimate.empty()) throw DataError("mape: empty series");
    double s = 0.0;
    for (std::size_t i = 0; i < estimate.size(); ++i)
        s += std::abs(estimate[i] - truth[i]) / std::max(truth[i], 0.01);
    return 100.0 * s / static_cast<double>(estimate.size());
}

Criteria evaluate(std::span<const Trajectory> fleet, std::span<const Trajectory> truth) {
    if (fleet.empty()) throw DataError("evaluate: empty fleet");
    Criteria c;
    double mon = 0, tren = 0;
    std::size_t scored = 0;
    for (const auto& tr : fleet) {
        if (tr.h.size() < 2) continue;
        mon += monotonicity(tr.h);
        tren += trendability(tr.h, tr.t);
        ++scored;
    }
    if (scored > 0) {
        c.mon = mon / static_cast<double>(scored);
        c.tren = tren / static_cast<double>(scored);
    }
    c.prog = prognosability(fleet).value;
    c.mutinf = mutual_info_score(fleet).score;
    if (!truth.empty()) {
        if (truth.size() != fleet.size()) throw DataError("evaluate: truth does not align with estimates");
        std::vector<double> est, gt;
        for (std::size_t u = 0; u < fleet.size(); ++u) {
            if (fleet[u].h.size() != truth[u].h.size())
                throw DataError("evaluate: unit " + std::to_string(u) + " estimate and truth lengths differ");
            est.insert(est.end(), fleet[u].h.begin(), fleet[u].h.end());
            gt.insert(gt.end(), truth[u].h.begin(), truth[u].h.end());
        }
        c.mape = mape(est, gt);
        c.has_mape = true;
    }
    return c;
}

Stat aggregate(std::span<const double> values) {
    Stat s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(var / n);
    return s;
}

namespace {

template <class F>
Stat collect(const std::vector<Criteria>& runs, F f) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(f(r));
    return aggregate(v);
}

}  // namespace

Stat MetricReport::mon() const { return collect(runs, [](const Criteria& c) { return c.mon; }); }
Stat MetricReport::tren() const { return collect(runs, [](const Criteria& c) { return c.tren; }); }
Stat MetricReport::prog() const { return collect(runs, [](const Criteria& c) { return c.prog; }); }
Stat MetricReport::mutinf() const { return collect(runs, [](const Criteria& c) { return c.mutinf; }); }
Stat MetricReport::mape() const { return collect(runs, [](const Criteria& c) { return c.mape; }); }

nlohmann::json to_json(const MetricReport& report) {
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const auto& c = report.runs[i];
        nlohmann::json r = {{"mon", c.mon}, {"tren", c.tren}, {"prog", c.prog}, {"mutinf", c.mutinf}};
        r["mape"] = c.has_mape ? nlohmann::json(c.mape) : nlohmann::json(nullptr);
        if (i < report.seeds.size()) r["seed"] = report.seeds[i];
        runs.push_back(std::move(r));
    }
    auto stat = [](Stat s) { return nlohmann::json{{"mean", s.mean}, {"std", s.std}}; };
    nlohmann::json summary = {{"mon", stat(report.mon())},
                              {"tren", stat(report.tren())},
                              {"prog", stat(report.prog())},
                              {"mutinf", stat(report.mutinf())}};
    const bool mape = !report.runs.empty() &&
                      std::all_of(report.runs.begin(), report.runs.end(), [](const Criteria& c) { return c.has_mape; });
    summary["mape"] = mape ? stat(report.mape()) : nlohmann::json(nullptr);
    return {{"format", "hybridhi.metrics/1"}, {"label", report.label}, {"runs", runs}, {"summary", summary}};
}

MetricReport report_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "hybridhi.metrics/1") throw DataError("not a metric report");
    MetricReport r;
    r.label = j.value("label", "");
    for (const auto& run : j.at("runs")) {
        Criteria c;
        c.mon = run.at("mon");
        c.tren = run.at("tren");
        c.prog = run.at("prog");
        c.mutinf = run.at("mutinf");
        c.has_mape = !run.at("mape").is_null();
        if (c.has_mape) c.mape = run.at("mape");
        if (run.contains("seed")) r.seeds.push_back(run.at("seed"));
        r.runs.push_back(c);
    }
    return r;
}

}  // namespace hybridhi::metrics
