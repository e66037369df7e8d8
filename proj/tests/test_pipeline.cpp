#include "hybridhi/error.hpp"
#include "hybridhi/experiment.hpp"
#include "hybridhi/pipeline.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace hybridhi;
namespace fs = std::filesystem;

namespace {

// Six short units, one epoch: seconds per run.
experiment::ExperimentConfig tiny(const fs::path& out, const std::string& extra = "") {
    const std::string text =
        "name = \"tiny\"\nout = \"" + out.string() +
        "\"\n[generator]\nn_units = 6\ncycles_min = 20\ncycles_max = 24\nsamples_per_cycle = 16\n"
        "[train]\nepochs = 1\n[rul]\nwindow = 20\nstride = 10\nepochs = 1\n" + extra;
    return experiment::from_document(kv::Document::parse(text));
}

std::string slurp(const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(pipeline, run_writes_every_artifact) {
    const auto dir = testutil::scratch_dir();
    auto cfg = tiny(dir / "out", "[causal]\nenabled = true\nmin_cycle = 5\nmax_samples = 500\n");
    cfg.rul = true;
    cfg.seeds = {0, 1};
    pipeline::run(cfg);
    const pipeline::Layout lay{cfg.out};
    for (const auto& f : {lay.config(), lay.dataset_info(), lay.scaler(), lay.metrics(), lay.causal(), lay.rul_report(),
                          lay.report(), lay.truth_test()})
        EXPECT_TRUE(fs::exists(f)) << f;
    for (std::uint64_t s : {0, 1}) {
        for (const char* f : {"model.json", "loss_history.csv", "hi_train.csv", "hi_test.csv", "normalizer.json", "metrics.json"})
            EXPECT_TRUE(fs::exists(lay.seed_dir(s) / f)) << f;
        for (const char* v : {"baseline", "estimated", "ground_truth"})
            EXPECT_TRUE(fs::exists(lay.rul_dir(s) / (std::string(v) + "_predictions.csv"))) << v;
    }
    EXPECT_TRUE(fs::exists(lay.plots() / "loss_seed0.svg"));
    EXPECT_TRUE(fs::exists(lay.plots() / "hi_seed1_unit5.svg"));

    const auto report = pipeline::read_json(lay.metrics());
    EXPECT_EQ(report.at("runs").size(), 2u);
    EXPECT_TRUE(report.at("summary").at("mape").contains("mean"));
    EXPECT_TRUE(report.at("summary").at("tren").contains("std"));
    const auto rul = pipeline::read_json(lay.rul_report());
    EXPECT_TRUE(rul.at("summary").at("ground_truth").contains("avg_improvement"));

    const auto snapshot = kv::Document::load(lay.config());
    EXPECT_EQ(snapshot.number("method.lambda", -1), 1.0);
    EXPECT_EQ(snapshot.string("method.constraint", ""), "correlation");
    const auto md = slurp(lay.report());
    EXPECT_NE(md.find("| Method | Mon | Tren | Prog | MutInf | MAPE (%) |"), std::string::npos);
    EXPECT_NE(md.find("ground-truth HI"), std::string::npos);
}

TEST(pipeline, identical_runs_give_identical_reports) {
    const auto dir = testutil::scratch_dir();
    const auto a = tiny(dir / "a"), b = tiny(dir / "b");
    pipeline::run(a);
    pipeline::run(b);
    EXPECT_EQ(slurp(a.out / "metrics.json"), slurp(b.out / "metrics.json"));
    EXPECT_FALSE(slurp(a.out / "metrics.json").empty());

    pipeline::report(a.out);
    const auto first = slurp(a.out / "report.md");
    pipeline::report(a.out);
    EXPECT_EQ(slurp(a.out / "report.md"), first);
}

TEST(pipeline, report_without_artifacts) {
    const auto dir = testutil::scratch_dir();
    try {
        pipeline::report(dir);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("no artifacts found"), std::string::npos);
    }
}

TEST(pipeline, stages_need_their_inputs) {
    const auto dir = testutil::scratch_dir();
    const auto cfg = tiny(dir / "out");
    EXPECT_THROW(pipeline::estimate_hi(cfg, 0), DataError);
    EXPECT_THROW(pipeline::evaluate_hi(cfg), DataError);
    EXPECT_THROW(pipeline::evaluate_rul(cfg), DataError);
}

TEST(pipeline, functional_run_consumes_persisted_weibull) {
    const auto dir = testutil::scratch_dir();
    auto cfg = tiny(dir / "out", "[weibull]\nsource = \"ground_truth\"\n");
    const auto fit = pipeline::fit_weibull(cfg);
    ASSERT_TRUE(fs::exists(dir / "out" / "weibull.txt"));
    cfg.constraint = models::ConstraintKind::functional;
    pipeline::train(cfg, 0);
    EXPECT_EQ(weibull::load_fit(dir / "out" / "weibull.txt").A, fit.A);
    EXPECT_FALSE(fs::exists(dir / "out" / "first_pass"));

    // first_pass source trains a correlation run to fit on
    auto fp = tiny(dir / "fp");
    fp.constraint = models::ConstraintKind::functional;
    pipeline::train(fp, 0);
    EXPECT_TRUE(fs::exists(dir / "fp" / "weibull.txt"));
    EXPECT_TRUE(fs::exists(dir / "fp" / "first_pass" / "seed_0" / "hi_train.csv"));
    EXPECT_EQ(kv::Document::load(dir / "fp" / "first_pass" / "config.toml").string("method.constraint", ""), "correlation");

    auto missing = tiny(dir / "missing", "[weibull]\nsource = \"file\"\nfile = \"" + (dir / "nope.txt").string() + "\"\n");
    missing.constraint = models::ConstraintKind::functional;
    EXPECT_THROW(pipeline::train(missing, 0), Error);
}

TEST(pipeline, residual_and_supervised_methods) {
    const auto dir = testutil::scratch_dir();
    for (const char* m : {"residual_ae", "residual_reg", "supervised"}) {
        const auto cfg = tiny(dir / m, std::string("[method]\nname = \"") + m + "\"\nwindow = 16\nstride = 8\nhealthy_cycles = 8\n");
        pipeline::run(cfg);
        const auto est = read_hi_csv(cfg.out / "seed_0" / "hi_test.csv");
        ASSERT_EQ(est.size(), 2u) << m;
        for (const auto& tr : est)
            for (double h : tr.h) {
                EXPECT_GE(h, 0.0);
                EXPECT_LE(h, 1.0);
            }
        EXPECT_EQ(fs::exists(cfg.out / "seed_0" / "pca.json"), std::string(m) != "supervised") << m;
    }
}

TEST(pipeline, loads_fleet_from_directory) {
    const auto dir = testutil::scratch_dir();
    datagen::GeneratorConfig g;
    g.n_units = 6;
    g.cycles_per_unit = {20, 22};
    g.samples_per_cycle = 16;
    const auto fleet = datagen::generate_fleet(g);
    ingest::write_fleet(fleet, dir / "csv");

    auto cfg = tiny(dir / "out");
    cfg.source = (dir / "csv").string();
    cfg.downsample = 2;
    pipeline::generate(cfg);
    const auto p = pipeline::prepare(cfg);
    EXPECT_EQ(p.train.units.size() + p.test.units.size(), 6u);
    const auto& src = *std::find_if(fleet.units.begin(), fleet.units.end(),
                                    [&](const auto& u) { return u.id == p.train.units[0].id; });
    EXPECT_EQ(p.train.units[0].cycles[0].x.rows(), (src.cycles[0].x.rows() + 1) / 2);
    EXPECT_FALSE(fs::exists(cfg.out / "dataset"));
    EXPECT_NE(slurp(cfg.out / "dataset.txt").find(fingerprint(fleet)), std::string::npos);

    cfg.source = (dir / "absent").string();
    EXPECT_THROW(pipeline::prepare(cfg), DataError);
}

TEST(pipeline, regenerates_when_generator_changes) {
    const auto dir = testutil::scratch_dir();
    auto cfg = tiny(dir / "out");
    const auto a = pipeline::prepare(cfg);
    cfg.generator.seed = 99;
    const auto b = pipeline::prepare(cfg);
    EXPECT_NE(fingerprint(a.train), fingerprint(b.train));
}

TEST(align_truth, picks_cycles_of_the_estimate) {
    const std::vector<HITrajectory> truth{{3, {0, 1, 2, 3}, {1.0, 0.7, 0.4, 0.1}}};
    const std::vector<HITrajectory> est{{3, {1, 3}, {0.6, 0.2}}};
    const auto a = pipeline::align_truth(est, truth);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].h, (std::vector<double>{0.7, 0.1}));
    EXPECT_THROW(pipeline::align_truth({{4, {0}, {1.0}}}, truth), DataError);
    EXPECT_THROW(pipeline::align_truth({{3, {7}, {1.0}}}, truth), DataError);
}

TEST(complete_trajectories, fills_with_nearest_estimate) {
    FleetDataset fleet;
    fleet.units.push_back(testutil::make_unit(2, {3, 3, 3, 3, 3, 3}));
    const std::vector<HITrajectory> hi{{2, {2, 4}, {0.8, 0.4}}};
    const auto full = pipeline::complete_trajectories(hi, fleet);
    ASSERT_EQ(full.size(), 1u);
    EXPECT_EQ(full[0].t, (std::vector<double>{0, 1, 2, 3, 4, 5}));
    EXPECT_EQ(full[0].h, (std::vector<double>{0.8, 0.8, 0.8, 0.8, 0.4, 0.4}));
    EXPECT_THROW(pipeline::complete_trajectories({}, fleet), DataError);
}

TEST(read_predictions_csv, round_trips) {
    const auto dir = testutil::scratch_dir();
    const std::vector<prognostics::Prediction> preds{{1, 10, 40, 38.5}, {2, 11, 0, 1.25}};
    prognostics::write_predictions_csv(preds, dir / "p.csv");
    const auto back = pipeline::read_predictions_csv(dir / "p.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].unit, 2);
    EXPECT_EQ(back[1].cycle, 11);
    EXPECT_EQ(back[0].rul_pred, 38.5);
    std::ofstream(dir / "bad.csv") << "unit,cycle,rul_true,rul_pred\n1;2;3;4\n";
    EXPECT_THROW(pipeline::read_predictions_csv(dir / "bad.csv"), LoadError);
}

TEST(log_error, writes_structured_record) {
    const auto dir = testutil::scratch_dir();
    pipeline::log_error(dir / "out", "train", "data", "boom", 3);
    const auto j = pipeline::read_json(dir / "out" / "error.json");
    EXPECT_EQ(j.at("stage"), "train");
    EXPECT_EQ(j.at("error"), "data");
    EXPECT_EQ(j.at("message"), "boom");
    EXPECT_EQ(j.at("exit_code"), 3);
}
