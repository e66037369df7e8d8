#include "hybridhi/pipeline.hpp"

#include "hybridhi/error.hpp"
#include "hybridhi/hi.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace hybridhi::pipeline {

namespace fs = std::filesystem;
using experiment::ExperimentConfig;
using experiment::Method;
using json = nlohmann::json;

namespace {

const std::vector<std::string> kRulVariants{"baseline", "estimated", "ground_truth"};

Layout layout(const ExperimentConfig& cfg) {
    if (cfg.out.empty()) throw ConfigError("no output directory configured");
    return {cfg.out};
}

std::string generator_signature(const ExperimentConfig& cfg) {
    std::string sig;
    const auto doc = experiment::to_document(cfg);
    for (const auto& [key, value] : doc.values())
        if (key.starts_with("generator.")) {
            kv::Document one;
            one.set(key, value);
            auto line = one.dump();
            while (!line.empty() && line.back() == '\n') line.pop_back();
            sig += (sig.empty() ? "" : "; ") + line;
        }
    return sig;
}

std::map<std::string, std::string> read_info(const fs::path& file) {
    std::map<std::string, std::string> out;
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
        const auto sp = line.find(' ');
        if (sp != std::string::npos) out[line.substr(0, sp)] = line.substr(sp + 1);
    }
    return out;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << text;
}

void write_json(const fs::path& file, const json& j) { write_text(file, j.dump(2) + "\n"); }

// Raw fleet of the configured source after downsampling.
FleetDataset load_source(const ExperimentConfig& cfg) {
    const auto lay = layout(cfg);
    FleetDataset fleet;
    if (cfg.source == "generate") {
        const auto info = read_info(lay.dataset_info());
        const auto sig = info.find("generator");
        if (!fs::exists(lay.dataset_dir()) || sig == info.end() || sig->second != generator_signature(cfg))
            generate(cfg);
        fleet = ingest::load_fleet(lay.dataset_dir());
    } else {
        fleet = ingest::load_fleet(cfg.source);
    }
    return cfg.downsample > 1 ? ingest::downsample(fleet, cfg.downsample) : fleet;
}

std::size_t longest_cycle(const FleetDataset& a, const FleetDataset& b) {
    std::size_t s = 0;
    for (const auto* f : {&a, &b})
        for (const auto& u : f->units)
            for (const auto& c : u.cycles) s = std::max(s, static_cast<std::size_t>(c.x.rows()));
    return s;
}

// Ground-truth HI at the cycle of each window's last row.
std::vector<double> window_labels(const FleetDataset& fleet, const ingest::WindowSet& w) {
    std::map<std::pair<int, int>, double> gt;
    for (const auto& u : fleet.units) {
        if (!u.hi_gt) throw DataError("supervised training needs ground-truth HI (unit " + std::to_string(u.id) + ")");
        for (std::size_t i = 0; i < u.cycles.size(); ++i) gt[{u.id, u.cycles[i].t}] = (*u.hi_gt)[i];
    }
    std::vector<double> labels;
    labels.reserve(w.size());
    for (const auto& m : w.meta) labels.push_back(gt.at({m.unit, m.cycle}));
    return labels;
}

// X channels of a window set in [n, p, S] layout.
std::vector<double> x_values(const ingest::WindowSet& w) {
    std::vector<double> x(w.size() * w.n_x * w.length);
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t c = 0; c < w.n_x; ++c)
            for (std::size_t s = 0; s < w.length; ++s) x[(i * w.n_x + c) * w.length + s] = w.value(i, c, s);
    return x;
}

Eigen::MatrixXd residuals(models::Model& model, const ingest::WindowSet& w) {
    const auto x_hat = models::reconstruct(model, w);
    return hi::compute_residual(x_values(w), x_hat.v, w.masks, w.size(), w.n_x, w.length);
}

std::string method_label(const ExperimentConfig& cfg) {
    std::string label = experiment::to_string(cfg.method);
    if (cfg.method == Method::proposed) {
        label += " " + models::to_string(cfg.constraint);
        if (cfg.ablation != experiment::Ablation::none) label += " " + experiment::to_string(cfg.ablation);
    }
    return label;
}

weibull::WeibullFit ensure_weibull(const ExperimentConfig& cfg) {
    const auto lay = layout(cfg);
    if (fs::exists(lay.weibull())) return weibull::load_fit(lay.weibull());
    return fit_weibull(cfg);
}

json stat_json(const metrics::Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

}  // namespace

void generate(const ExperimentConfig& cfg) {
    const auto lay = layout(cfg);
    fs::create_directories(lay.root);
    experiment::to_document(cfg).save(lay.config());
    std::ostringstream info;
    if (cfg.source == "generate") {
        const auto fleet = datagen::generate_fleet(cfg.generator);
        fs::remove_all(lay.dataset_dir());
        ingest::write_fleet(fleet, lay.dataset_dir());
        info << "source generate\nfingerprint " << fingerprint(fleet) << "\nunits " << fleet.units.size()
             << "\ngenerator " << generator_signature(cfg) << '\n';
    } else {
        const auto fleet = ingest::load_fleet(cfg.source);
        info << "source " << cfg.source << "\nfingerprint " << fingerprint(fleet) << "\nunits " << fleet.units.size()
             << '\n';
    }
    write_text(lay.dataset_info(), info.str());
}

Prepared prepare(const ExperimentConfig& cfg) {
    const auto lay = layout(cfg);
    const auto fleet = load_source(cfg);
    Prepared p;
    p.split = experiment::resolve_split(cfg, fleet);
    const auto train = select_units(fleet, p.split.train);
    const auto test = select_units(fleet, p.split.test);
    p.scaler = ingest::fit_scaler(train);
    emit(p.scaler.warnings, "scaler");
    fs::create_directories(lay.root);
    ingest::save_scaler(p.scaler, lay.scaler());
    p.train = p.scaler.apply(train);
    p.test = p.scaler.apply(test);
    return p;
}

models::LossHistory train(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto lay = layout(cfg);
    const auto p = prepare(cfg);
    const auto dir = lay.seed_dir(seed);
    fs::create_directories(dir);

    auto tc = cfg.train;
    tc.seed = seed;
    const auto kind = cfg.network_kind();
    const std::size_t n_x = p.train.n_sensors, n_w = p.train.n_conditions;
    models::ConstraintSpec cs = cfg.constraint_spec();
    std::vector<double> labels;
    ingest::WindowSet windows;
    models::NetworkSpec spec;
    switch (cfg.method) {
        case Method::proposed: {
            const std::size_t s = longest_cycle(p.train, p.test);
            windows = ingest::window_per_cycle(p.train, ingest::Channels::both, s);
            spec = models::autoencoder_spec(kind, n_x, n_w, s, cfg.kernel);
            spec.mask_padding = cfg.mask_padding;
            if (cs.kind == models::ConstraintKind::functional && cs.lambda > 0) cs.expected_hi = ensure_weibull(cfg);
            break;
        }
        case Method::residual_ae:
        case Method::residual_reg:
            windows = ingest::window_sliding(p.train, cfg.window, cfg.stride, ingest::Channels::both);
            spec = models::residual_spec(kind, n_x, n_w, cfg.window);
            tc.healthy_cycles = cfg.healthy_cycles;
            break;
        case Method::supervised:
            windows = ingest::window_sliding(p.train, cfg.window, cfg.stride, ingest::Channels::both);
            spec = models::supervised_spec(n_x + n_w, cfg.window);
            labels = window_labels(p.train, windows);
            break;
    }
    emit(windows.skipped, "windowing");
    auto model = models::build_network(spec, seed);
    const auto history = models::train(model, windows, tc, cs, labels);
    models::save_checkpoint(model, tc, dir / "model.json", "scaler.json");
    models::write_loss_history(history, dir / "loss_history.csv");
    return history;
}

HiEstimate estimate_hi(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto lay = layout(cfg);
    const auto dir = lay.seed_dir(seed);
    if (!fs::exists(dir / "model.json"))
        throw DataError("no checkpoint for seed " + std::to_string(seed) + " in " + dir.string() + " (run train first)");
    const auto p = prepare(cfg);
    auto ck = models::load_checkpoint(dir / "model.json");
    auto& model = ck.model;
    const auto& spec = model.spec();

    HiEstimate est;
    if (models::is_autoencoder(spec.kind)) {
        const auto wtr = ingest::window_per_cycle(p.train, ingest::Channels::both, spec.length);
        const auto wte = ingest::window_per_cycle(p.test, ingest::Channels::both, spec.length);
        const auto series = hi::per_cycle_average(models::encode(model, wtr), wtr.meta);
        const auto norm = hi::fit_normalizer(series);
        hi::save_normalizer(norm, dir / "normalizer.json");
        est.train = norm.apply(series);
        est.test = hi::latent_to_hi(models::encode(model, wte), wte.meta, norm);
    } else if (spec.kind == models::NetworkKind::supervised) {
        const auto wtr = ingest::window_sliding(p.train, spec.length, cfg.stride, ingest::Channels::both);
        const auto wte = ingest::window_sliding(p.test, spec.length, cfg.stride, ingest::Channels::both);
        const hi::HiNormalizer identity{1.0, 0.0, 1.0};
        hi::save_normalizer(identity, dir / "normalizer.json");
        est.train = identity.apply(hi::per_cycle_average(models::predict(model, wtr).v, wtr.meta));
        est.test = identity.apply(hi::per_cycle_average(models::predict(model, wte).v, wte.meta));
    } else {
        const auto wtr = ingest::window_sliding(p.train, spec.length, cfg.stride, ingest::Channels::both);
        const auto wte = ingest::window_sliding(p.test, spec.length, cfg.stride, ingest::Channels::both);
        const Eigen::MatrixXd rtr = residuals(model, wtr);
        const auto pca = hi::fit_pca(rtr);
        const Eigen::VectorXd proj = pca.project(rtr);
        const auto series =
            hi::per_cycle_average(std::span<const double>(proj.data(), static_cast<std::size_t>(proj.size())), wtr.meta);
        const auto norm = hi::fit_normalizer(series);
        hi::save_pca(pca, dir / "pca.json");
        hi::save_normalizer(norm, dir / "normalizer.json");
        est.train = norm.apply(series);
        est.test = hi::residual_to_hi(residuals(model, wte), wte.meta, pca, norm);
    }
    write_hi_csv(est.train, dir / "hi_train.csv");
    write_hi_csv(est.test, dir / "hi_test.csv");
    return est;
}

metrics::MetricReport evaluate_hi(const ExperimentConfig& cfg) {
    const auto lay = layout(cfg);
    const auto p = prepare(cfg);
    const auto truth = ground_truth_trajectories(p.test);
    const bool has_truth = !truth.empty() && truth.size() == p.test.units.size();
    if (has_truth) write_hi_csv(truth, lay.truth_test(), "hi_gt");

    metrics::MetricReport report;
    report.label = method_label(cfg);
    for (auto seed : cfg.seeds) {
        const auto file = lay.seed_dir(seed) / "hi_test.csv";
        if (!fs::exists(file))
            throw DataError("no HI estimate for seed " + std::to_string(seed) + " (run estimate-hi first)");
        const auto est = read_hi_csv(file);
        const auto c = has_truth ? metrics::evaluate(est, align_truth(est, truth)) : metrics::evaluate(est);
        metrics::MetricReport one;
        one.label = report.label;
        one.seeds = {seed};
        one.runs = {c};
        write_json(lay.seed_dir(seed) / "metrics.json", metrics::to_json(one));
        report.seeds.push_back(seed);
        report.runs.push_back(c);
    }
    write_json(lay.metrics(), metrics::to_json(report));
    return report;
}

weibull::WeibullFit fit_weibull(const ExperimentConfig& cfg) {
    const auto lay = layout(cfg);
    fs::create_directories(lay.root);
    std::vector<HITrajectory> trajectories;
    switch (cfg.weibull_source) {
        case experiment::WeibullSource::file: {
            auto fit = weibull::load_fit(cfg.weibull_file);
            weibull::save_fit(fit, lay.weibull());
            return fit;
        }
        case experiment::WeibullSource::ground_truth:
            trajectories = ground_truth_trajectories(prepare(cfg).train);
            if (trajectories.empty()) throw DataError("weibull.source = ground_truth but the training units carry no HI");
            break;
        case experiment::WeibullSource::first_pass: {
            ExperimentConfig fp = cfg;
            fp.out = lay.first_pass();
            fp.method = Method::proposed;
            fp.constraint = models::ConstraintKind::correlation;
            fp.ablation = experiment::Ablation::none;
            fp.lambda = 1.0;
            fp.causal = fp.rul = false;
            const auto seed = cfg.seeds.front();
            fp.seeds = {seed};
            const auto file = Layout{fp.out}.seed_dir(seed) / "hi_train.csv";
            if (!fs::exists(file)) {
                generate(fp);
                train(fp, seed);
                estimate_hi(fp, seed);
            }
            trajectories = read_hi_csv(file);
            break;
        }
    }
    auto fit = weibull::fit_expected_hi(trajectories, cfg.weibull_thresholds, cfg.weibull_confidence);
    emit(fit.warnings, "weibull");
    weibull::save_fit(fit, lay.weibull());
    return fit;
}

causal::Ranking discover_causal(const ExperimentConfig& cfg) {
    const auto lay = layout(cfg);
    const auto fleet = load_source(cfg);
    auto ranking = causal::rank_structures(fleet, cfg.causal_min_cycle, cfg.regressor);
    emit(ranking.warnings, "causal");
    fs::create_directories(lay.root);
    causal::write_ranking_csv(ranking, lay.causal());
    return ranking;
}

void train_rul(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto lay = layout(cfg);
    const auto p = prepare(cfg);
    auto rc = cfg.rul_config;
    rc.train.seed = seed;
    const auto dir = lay.rul_dir(seed);
    fs::create_directories(dir);

    std::map<std::string, std::pair<std::vector<HITrajectory>, std::vector<HITrajectory>>> inputs;
    const auto hi_dir = lay.seed_dir(seed);
    if (fs::exists(hi_dir / "hi_train.csv") && fs::exists(hi_dir / "hi_test.csv"))
        inputs["estimated"] = {complete_trajectories(read_hi_csv(hi_dir / "hi_train.csv"), p.train),
                               complete_trajectories(read_hi_csv(hi_dir / "hi_test.csv"), p.test)};
    else
        emit({{"rul_variant_skipped", "no estimated HI for seed " + std::to_string(seed)}}, "rul");
    if (p.train.has_ground_truth() && p.test.has_ground_truth())
        inputs["ground_truth"] = {ground_truth_trajectories(p.train), ground_truth_trajectories(p.test)};

    for (const auto& variant : kRulVariants) {
        const bool baseline = variant == "baseline";
        if (!baseline && !inputs.contains(variant)) continue;
        const auto* hi_train = baseline ? nullptr : &inputs[variant].first;
        const auto* hi_test = baseline ? nullptr : &inputs[variant].second;
        auto run = prognostics::train_rul(p.train, hi_train, rc);
        const auto preds = prognostics::predict_rul(run, p.test, hi_test, rc);
        prognostics::write_predictions_csv(preds, dir / (variant + "_predictions.csv"));
        models::save_checkpoint(run.model, rc.train, dir / (variant + "_model.json"), "scaler.json");
        models::write_loss_history(run.history, dir / (variant + "_loss.csv"));
        write_json(dir / (variant + "_meta.json"), {{"label_scale", run.label_scale},
                                                    {"t_scale", run.t_scale},
                                                    {"has_hi", !baseline},
                                                    {"cap", rc.cap ? json(*rc.cap) : json(nullptr)},
                                                    {"window", rc.length},
                                                    {"stride", rc.stride}});
    }
}

json evaluate_rul(const ExperimentConfig& cfg) {
    const auto lay = layout(cfg);
    json runs = json::array();
    std::map<std::string, std::vector<prognostics::RULReport>> reports;
    std::map<std::string, std::vector<double>> improvements;
    for (auto seed : cfg.seeds) {
        const auto dir = lay.rul_dir(seed);
        if (!fs::exists(dir / "baseline_predictions.csv"))
            throw DataError("no RUL predictions for seed " + std::to_string(seed) + " (run train-rul first)");
        json run{{"seed", seed}};
        prognostics::RULReport base;
        for (const auto& variant : kRulVariants) {
            const auto file = dir / (variant + "_predictions.csv");
            if (!fs::exists(file)) continue;
            const auto r = prognostics::evaluate_rul(read_predictions_csv(file));
            run[variant] = prognostics::to_json(r);
            reports[variant].push_back(r);
            if (variant == "baseline") {
                base = r;
                continue;
            }
            const auto imp = prognostics::average_improvement(base, r);
            run[variant]["avg_improvement"] = imp.percent;
            if (!imp.excluded.empty()) run[variant]["excluded"] = imp.excluded;
            improvements[variant].push_back(imp.percent);
        }
        runs.push_back(run);
    }
    json summary = json::object();
    for (const auto& variant : kRulVariants) {
        if (!reports.contains(variant)) continue;
        std::vector<double> mae, rmse, mape;
        for (const auto& r : reports[variant]) {
            mae.push_back(r.mae);
            rmse.push_back(r.rmse);
            mape.push_back(r.mape);
        }
        json s{{"mae", stat_json(metrics::aggregate(mae))},
               {"rmse", stat_json(metrics::aggregate(rmse))},
               {"mape", stat_json(metrics::aggregate(mape))},
               {"runs", reports[variant].size()}};
        if (improvements.contains(variant)) s["avg_improvement"] = stat_json(metrics::aggregate(improvements[variant]));
        summary[variant] = s;
    }
    json doc{{"format", "hybridhi.rul/1"}, {"label", method_label(cfg)}, {"runs", runs}, {"summary", summary}};
    write_json(lay.rul_report(), doc);
    return doc;
}

void run(const ExperimentConfig& cfg) {
    generate(cfg);
    if (cfg.causal) discover_causal(cfg);
    for (auto seed : cfg.seeds) {
        train(cfg, seed);
        estimate_hi(cfg, seed);
    }
    evaluate_hi(cfg);
    if (cfg.rul) {
        for (auto seed : cfg.seeds) train_rul(cfg, seed);
        evaluate_rul(cfg);
    }
    report(cfg.out);
}

std::vector<HITrajectory> align_truth(const std::vector<HITrajectory>& estimate, const std::vector<HITrajectory>& truth) {
    std::map<int, const HITrajectory*> by_unit;
    for (const auto& t : truth) by_unit[t.unit] = &t;
    std::vector<HITrajectory> out;
    for (const auto& e : estimate) {
        const auto it = by_unit.find(e.unit);
        if (it == by_unit.end()) throw DataError("no ground truth for unit " + std::to_string(e.unit));
        std::map<long, double> at;
        for (std::size_t i = 0; i < it->second->t.size(); ++i) at[std::lround(it->second->t[i])] = it->second->h[i];
        HITrajectory a;
        a.unit = e.unit;
        for (double t : e.t) {
            const auto f = at.find(std::lround(t));
            if (f == at.end())
                throw DataError("no ground truth for unit " + std::to_string(e.unit) + ", cycle " + std::to_string(std::lround(t)));
            a.t.push_back(t);
            a.h.push_back(f->second);
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<HITrajectory> complete_trajectories(const std::vector<HITrajectory>& hi, const FleetDataset& fleet) {
    std::map<int, const HITrajectory*> by_unit;
    for (const auto& h : hi) by_unit[h.unit] = &h;
    std::vector<HITrajectory> out;
    for (const auto& u : fleet.units) {
        const auto it = by_unit.find(u.id);
        if (it == by_unit.end() || it->second->t.empty())
            throw DataError("no HI estimate for unit " + std::to_string(u.id));
        const auto& src = *it->second;
        HITrajectory full;
        full.unit = u.id;
        for (const auto& c : u.cycles) {
            // nearest estimated cycle, earlier one on ties
            const auto pos = std::lower_bound(src.t.begin(), src.t.end(), static_cast<double>(c.t));
            std::size_t j = static_cast<std::size_t>(pos - src.t.begin());
            if (j == src.t.size() || (j > 0 && c.t - src.t[j - 1] <= src.t[j] - c.t)) j = j == 0 ? 0 : j - 1;
            full.t.push_back(c.t);
            full.h.push_back(src.h[j]);
        }
        out.push_back(std::move(full));
    }
    return out;
}

std::vector<prognostics::Prediction> read_predictions_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    std::string line;
    std::getline(in, line);
    std::vector<prognostics::Prediction> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        prognostics::Prediction p;
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream ss(line);
        if (!(ss >> p.unit >> c1 >> p.cycle >> c2 >> p.rul_true >> c3 >> p.rul_pred) || c1 != ',' || c2 != ',' || c3 != ',')
            throw LoadError(file.filename().string(), row, "expected unit,cycle,rul_true,rul_pred");
        out.push_back(p);
    }
    return out;
}

json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("corrupt " + file.string() + ": " + e.what());
    }
}

void log_error(const fs::path& out, const std::string& stage, const std::string& kind, const std::string& message,
               int exit_code) {
    const json j{{"stage", stage}, {"error", kind}, {"message", message}, {"exit_code", exit_code}};
    std::cerr << j.dump() << std::endl;
    if (out.empty()) return;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) return;
    std::ofstream f(out / "error.json");
    if (f) f << j.dump(2) << '\n';
}

}  // namespace hybridhi::pipeline
