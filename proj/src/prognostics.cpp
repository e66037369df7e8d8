#include "hybridhi/prognostics.hpp"

#include "hybridhi/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace hybridhi::prognostics {

double max_cycle(const FleetDataset& fleet) {
    int m = 0;
    for (const auto& u : fleet.units)
        if (!u.cycles.empty()) m = std::max(m, u.cycles.back().t);
    return m > 0 ? m : 1.0;
}

RulDataset build_rul_dataset(const FleetDataset& fleet, const std::vector<HITrajectory>* hi, std::size_t length,
                             std::size_t stride, std::optional<double> cap, double t_scale) {
    if (length == 0 || stride == 0) throw ConfigError("RUL window length and stride must be positive");
    if (cap && !(*cap > 0)) throw ConfigError("RUL cap must be positive");
    if (!(t_scale > 0)) throw ConfigError("time scale must be positive");

    std::map<int, const HITrajectory*> by_unit;
    if (hi)
        for (const auto& tr : *hi) by_unit[tr.unit] = &tr;

    RulDataset out;
    out.has_hi = hi != nullptr;
    out.cap = cap;
    out.t_scale = t_scale;
    auto& ws = out.windows;
    const std::size_t p = fleet.n_sensors, k = fleet.n_conditions;
    const std::size_t channels = p + k + 1 + (hi ? 1 : 0);
    ws.length = length;
    ws.n_x = channels;
    ws.n_w = 0;

    for (const auto& unit : fleet.units) {
        if (unit.cycles.empty()) continue;
        const int t_eol = unit.cycles.back().t;

        // Per-cycle HI lookup for this unit.
        std::vector<double> h_cycle;
        if (hi) {
            const auto it = by_unit.find(unit.id);
            if (it == by_unit.end())
                throw DataError("no HI trajectory for unit " + std::to_string(unit.id));
            std::map<int, double> lookup;
            for (std::size_t i = 0; i < it->second->t.size(); ++i)
                lookup[static_cast<int>(std::lround(it->second->t[i]))] = it->second->h[i];
            for (const auto& rec : unit.cycles) {
                const auto f = lookup.find(rec.t);
                if (f == lookup.end())
                    throw DataError("missing HI for unit " + std::to_string(unit.id) + ", cycle " + std::to_string(rec.t));
                h_cycle.push_back(f->second);
            }
        }

        // Row-level view of the unit.
        struct Row {
            std::size_t cycle;
            Eigen::Index r;
        };
        std::vector<Row> rows;
        for (std::size_t c = 0; c < unit.cycles.size(); ++c)
            for (Eigen::Index r = 0; r < unit.cycles[c].x.rows(); ++r) rows.push_back({c, r});
        if (rows.size() < length) {
            ws.skipped.push_back({"short_unit", "unit " + std::to_string(unit.id) + " has fewer rows than the window"});
            continue;
        }

        for (std::size_t start = 0; start + length <= rows.size(); start += stride) {
            const std::size_t base = ws.values.size();
            ws.values.resize(base + channels * length);
            for (std::size_t s = 0; s < length; ++s) {
                const Row& row = rows[start + s];
                const auto& rec = unit.cycles[row.cycle];
                std::size_t ch = 0;
                for (std::size_t j = 0; j < p; ++j) ws.values[base + (ch++) * length + s] = rec.x(row.r, static_cast<Eigen::Index>(j));
                for (std::size_t j = 0; j < k; ++j) ws.values[base + (ch++) * length + s] = rec.w(row.r, static_cast<Eigen::Index>(j));
                ws.values[base + (ch++) * length + s] = rec.t / t_scale;
                if (hi) ws.values[base + ch * length + s] = h_cycle[row.cycle];
            }
            ws.masks.insert(ws.masks.end(), length, 1);
            const auto& last = unit.cycles[rows[start + length - 1].cycle];
            ws.meta.push_back({unit.id, last.t, unit.cycles[rows[start].cycle].t, static_cast<int>(length)});
            double rul = t_eol - last.t;
            if (cap) rul = std::min(rul, *cap);
            out.labels.push_back(rul);
        }
    }
    return out;
}

models::Model build_rul_model(models::RulPreset preset, std::size_t channels, std::size_t length, std::uint64_t seed) {
    return models::build_network(models::rul_spec(preset, channels, length), seed);
}

RULReport evaluate_rul(std::span<const Prediction> predictions) {
    RULReport r;
    r.windows = predictions.size();
    if (predictions.empty()) return r;
    double abs = 0, sq = 0, pct = 0;
    for (const auto& p : predictions) {
        const double e = std::max(0.0, p.rul_pred) - p.rul_true;
        abs += std::abs(e);
        sq += e * e;
        pct += std::abs(e) / std::max(p.rul_true, 1.0);
    }
    const double n = static_cast<double>(predictions.size());
    r.mae = abs / n;
    r.rmse = std::sqrt(sq / n);
    r.mape = 100.0 * pct / n;
    return r;
}

Improvement average_improvement(const RULReport& baseline, const RULReport& augmented) {
    Improvement out;
    double acc = 0;
    int used = 0;
    const std::pair<const char*, std::pair<double, double>> metrics[] = {
        {"mae", {baseline.mae, augmented.mae}},
        {"rmse", {baseline.rmse, augmented.rmse}},
        {"mape", {baseline.mape, augmented.mape}},
    };
    for (const auto& [name, v] : metrics) {
        if (v.first == 0) {
            out.excluded.emplace_back(name);
            continue;
        }
        acc += 100.0 * (v.first - v.second) / v.first;
        ++used;
    }
    out.percent = used ? acc / used : 0.0;
    return out;
}

RulRun train_rul(const FleetDataset& train, const std::vector<HITrajectory>* hi, const RulConfig& cfg) {
    const double t_scale = max_cycle(train);
    const auto ds = build_rul_dataset(train, hi, cfg.length, cfg.stride, cfg.cap, t_scale);
    if (ds.labels.empty()) throw TrainingError("no RUL training windows (units shorter than the window?)");

    double scale = cfg.cap ? *cfg.cap : *std::max_element(ds.labels.begin(), ds.labels.end());
    if (!(scale > 0)) scale = 1.0;
    std::vector<double> scaled(ds.labels.size());
    std::transform(ds.labels.begin(), ds.labels.end(), scaled.begin(), [scale](double l) { return l / scale; });

    RulRun run{build_rul_model(cfg.preset, ds.windows.channels(), cfg.length, cfg.train.seed), scale, t_scale, {}};
    run.history = models::train(run.model, ds.windows, cfg.train, {}, scaled);
    return run;
}

std::vector<Prediction> predict_rul(RulRun& run, const FleetDataset& test, const std::vector<HITrajectory>* hi,
                                    const RulConfig& cfg) {
    const auto ds = build_rul_dataset(test, hi, cfg.length, cfg.stride, cfg.cap, run.t_scale);
    const auto out = models::predict(run.model, ds.windows);
    std::vector<Prediction> preds;
    preds.reserve(ds.labels.size());
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        preds.push_back({ds.windows.meta[i].unit, ds.windows.meta[i].cycle, ds.labels[i], out.v[i] * run.label_scale});
    return preds;
}

void write_predictions_csv(std::span<const Prediction> predictions, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << "unit,cycle,rul_true,rul_pred\n";
    out.precision(10);
    for (const auto& p : predictions) out << p.unit << ',' << p.cycle << ',' << p.rul_true << ',' << p.rul_pred << '\n';
}

nlohmann::json to_json(const RULReport& report) {
    return {{"mae", report.mae}, {"rmse", report.rmse}, {"mape", report.mape}, {"windows", report.windows}};
}

}  // namespace hybridhi::prognostics
