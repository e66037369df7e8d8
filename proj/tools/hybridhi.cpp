#include "hybridhi/error.hpp"
#include "hybridhi/experiment.hpp"
#include "hybridhi/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>

using namespace hybridhi;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string constraint;
};

experiment::ExperimentConfig resolve(const Options& o) {
    const char* env = std::getenv("HYBRIDHI_OUT");
    const std::string root = env ? env : "";
    auto cfg = o.config.empty() ? experiment::from_document(kv::Document{}, root) : experiment::load_config(o.config, root);
    if (!o.out.empty()) cfg.out = o.out;
    if (o.seed) cfg.seeds = {*o.seed};
    if (!o.constraint.empty()) {
        if (cfg.method != experiment::Method::proposed)
            throw ConfigError("--constraint applies to method 'proposed', not '" + experiment::to_string(cfg.method) + "'");
        cfg.constraint = models::parse_constraint(o.constraint);
    }
    cfg.validate();
    return cfg;
}

void print_summary(const metrics::MetricReport& r) {
    std::cout << r.label << ": mon " << r.mon().mean << " tren " << r.tren().mean << " prog " << r.prog().mean
              << " mutinf " << r.mutinf().mean;
    if (!r.runs.empty() && r.runs.front().has_mape) std::cout << " mape " << r.mape().mean << "%";
    std::cout << " (" << r.runs.size() << " seed" << (r.runs.size() == 1 ? "" : "s") << ")\n";
}

int execute(const std::string& stage, const Options& o) {
    if (stage == "report" && o.config.empty()) {
        const char* env = std::getenv("HYBRIDHI_OUT");
        const fs::path out = !o.out.empty() ? fs::path(o.out) : fs::path(env ? env : "runs") / "experiment";
        pipeline::report(out);
        std::cout << "report written to " << (out / "report.md").string() << "\n";
        return 0;
    }
    const auto cfg = resolve(o);
    if (stage == "generate") {
        pipeline::generate(cfg);
        std::cout << "dataset written to " << cfg.out.string() << "\n";
    } else if (stage == "train") {
        for (auto seed : cfg.seeds) {
            const auto h = pipeline::train(cfg, seed);
            std::cout << "seed " << seed << ": final loss " << (h.empty() ? 0.0 : h.back().total) << "\n";
        }
    } else if (stage == "estimate-hi") {
        for (auto seed : cfg.seeds) {
            const auto est = pipeline::estimate_hi(cfg, seed);
            std::cout << "seed " << seed << ": " << est.train.size() << " train / " << est.test.size() << " test units\n";
        }
    } else if (stage == "evaluate-hi") {
        print_summary(pipeline::evaluate_hi(cfg));
    } else if (stage == "fit-weibull") {
        const auto fit = pipeline::fit_weibull(cfg);
        std::cout << "beta " << fit.beta << " A " << fit.A << " B " << fit.B << " C " << fit.C << " P " << fit.P << "\n";
    } else if (stage == "discover-causal") {
        const auto ranking = pipeline::discover_causal(cfg);
        for (std::size_t i = 0; i < std::min<std::size_t>(5, ranking.rows.size()); ++i)
            std::cout << causal::to_string(ranking.rows[i].dag) << " median " << ranking.rows[i].median_rank << " mean "
                      << ranking.rows[i].mean_rank << "\n";
    } else if (stage == "train-rul") {
        for (auto seed : cfg.seeds) pipeline::train_rul(cfg, seed);
        std::cout << "RUL models written to " << (cfg.out / "rul").string() << "\n";
    } else if (stage == "evaluate-rul") {
        const auto doc = pipeline::evaluate_rul(cfg);
        for (const auto& [variant, s] : doc.at("summary").items()) {
            std::cout << variant << ": mae " << s.at("mae").at("mean").get<double>() << " rmse "
                      << s.at("rmse").at("mean").get<double>() << " mape " << s.at("mape").at("mean").get<double>();
            if (s.contains("avg_improvement"))
                std::cout << " improvement " << s.at("avg_improvement").at("mean").get<double>() << "%";
            std::cout << "\n";
        }
    } else if (stage == "report") {
        pipeline::report(cfg.out);
        std::cout << "report written to " << (cfg.out / "report.md").string() << "\n";
    } else if (stage == "run") {
        pipeline::run(cfg);
        std::cout << "artifacts written to " << cfg.out.string() << "\n";
    }
    return 0;
}

std::string kind_of(const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const DataError*>(&e)) return "data";
    if (dynamic_cast<const TrainingError*>(&e)) return "training";
    return "error";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised hybrid health-index estimation"};
    app.require_subcommand(1);
    Options o;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"generate", "Write the config snapshot and the (generated) dataset"},
        {"train", "Train the configured method for every seed"},
        {"estimate-hi", "Per-cycle HI of train and test units from the checkpoints"},
        {"evaluate-hi", "HI criteria and MAPE over all seeds"},
        {"fit-weibull", "Fit the expected-HI function for the functional constraint"},
        {"discover-causal", "Rank causal structures over (X_i, W_j, Z)"},
        {"train-rul", "Train RUL models with and without HI inputs"},
        {"evaluate-rul", "RUL errors and average improvement"},
        {"report", "Render report.md and plots from an artifact directory"},
        {"run", "Every enabled stage end to end"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "Experiment config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Run this seed only");
        sub->add_option("--out", o.out, "Artifact directory");
        if (name == "train" || name == "run")
            sub->add_option("--constraint", o.constraint, "none | correlation | negative_gradient | functional");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ConfigError("").exit_code();
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        return execute(stage, o);
    } catch (const Error& e) {
        fs::path out = o.out;
        if (out.empty()) {
            try {
                out = resolve(o).out;
            } catch (const std::exception&) {
            }
        }
        pipeline::log_error(out, stage, kind_of(e), e.what(), e.exit_code());
        return e.exit_code();
    } catch (const std::exception& e) {
        pipeline::log_error(o.out, stage, "internal", e.what(), 1);
        return 1;
    }
}
