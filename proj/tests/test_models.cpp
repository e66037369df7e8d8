#include "hybridhi/datagen.hpp"
#include "hybridhi/error.hpp"
#include "hybridhi/ingest.hpp"
#include "hybridhi/models.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace hybridhi;
using namespace hybridhi::models;

namespace {

FleetDataset tiny_fleet() {
    datagen::GeneratorConfig cfg;
    cfg.n_units = 3;
    cfg.cycles_per_unit = {12, 16};
    cfg.samples_per_cycle = 8;
    cfg.n_sensors = 3;
    cfg.n_conditions = 2;
    cfg.seed = 5;
    return ingest::fit_scaler(datagen::generate_fleet(cfg)).apply(datagen::generate_fleet(cfg));
}

TrainConfig quick(int epochs = 3) {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = 8;
    c.learning_rate = 1e-3;
    c.seed = 11;
    return c;
}

}  // namespace

TEST(build_network, proposed_ae_latent_is_one_scalar_per_window) {
    Model m(autoencoder_spec(NetworkKind::proposed_ae, 14, 4, 2030), 0);
    nn::Tensor x(2, 14, 2030, 0.1);
    const auto z = m.first().forward(x, false);
    EXPECT_EQ(z.n, 2u);
    EXPECT_EQ(z.c * z.l, 1u);
}

TEST(build_network, supervised_outputs_one_value_per_window) {
    Model m(supervised_spec(6, 50), 0);
    nn::Tensor x(3, 6, 50, 0.2);
    const auto y = m.first().forward(x, false);
    EXPECT_EQ(y.n, 3u);
    EXPECT_EQ(y.c * y.l, 1u);
}

TEST(build_network, supervised_rejects_short_windows) {
    try {
        Model m(supervised_spec(6, 8), 0);
        FAIL() << "expected a shape error";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("S >= 16"), std::string::npos);
    }
}

TEST(build_network, rul_presets) {
    const auto tf = rul_spec(RulPreset::turbofan, 4, 50);
    EXPECT_EQ(tf.filters, (std::vector<std::size_t>{10, 10, 1}));
    EXPECT_EQ(tf.hidden, 50u);
    EXPECT_EQ(tf.kernel, 10u);
    const auto bat = rul_spec(RulPreset::battery, 4, 200);
    EXPECT_EQ(bat.hidden, 200u);
    Model m(tf, 1);
    const auto y = m.first().forward(nn::Tensor(2, 4, 50, 0.3), false);
    EXPECT_EQ(y.c * y.l, 1u);
}

TEST(build_network, spec_json_round_trip) {
    const auto s = autoencoder_spec(NetworkKind::symmetric_ae, 5, 2, 40, 5);
    const auto t = NetworkSpec::from_json(s.to_json());
    EXPECT_EQ(t.to_json(), s.to_json());
}

TEST(names, parse_round_trip) {
    for (auto k : {NetworkKind::proposed_ae, NetworkKind::symmetric_ae, NetworkKind::residual_ae,
                   NetworkKind::residual_reg, NetworkKind::supervised, NetworkKind::rul})
        EXPECT_EQ(parse_network_kind(to_string(k)), k);
    for (auto c : {ConstraintKind::none, ConstraintKind::correlation, ConstraintKind::negative_gradient,
                   ConstraintKind::functional})
        EXPECT_EQ(parse_constraint(to_string(c)), c);
    EXPECT_THROW(parse_constraint("monotone"), ConfigError);
    EXPECT_THROW(parse_network_kind("lstm"), ConfigError);
}

TEST(train, proposed_ae_loss_decreases_and_encodes) {
    const auto fleet = tiny_fleet();
    const auto ws = ingest::window_per_cycle(fleet, ingest::Channels::both);
    Model m(autoencoder_spec(NetworkKind::proposed_ae, 3, 2, ws.length), 3);
    ConstraintSpec c;
    c.kind = ConstraintKind::correlation;
    const auto h = train(m, ws, quick(8), c);
    ASSERT_EQ(h.size(), 8u);
    EXPECT_LT(h.back().total, h.front().total);
    EXPECT_EQ(encode(m, ws).size(), ws.size());
    const auto xh = reconstruct(m, ws);
    EXPECT_EQ(xh.n, ws.size());
    EXPECT_EQ(xh.c, 3u);
}

TEST(train, deterministic_for_a_seed) {
    const auto fleet = tiny_fleet();
    const auto ws = ingest::window_per_cycle(fleet, ingest::Channels::both);
    ConstraintSpec c;
    c.kind = ConstraintKind::negative_gradient;
    Model a(autoencoder_spec(NetworkKind::proposed_ae, 3, 2, ws.length), 3);
    Model b(autoencoder_spec(NetworkKind::proposed_ae, 3, 2, ws.length), 3);
    const auto ha = train(a, ws, quick(), c);
    const auto hb = train(b, ws, quick(), c);
    for (std::size_t i = 0; i < ha.size(); ++i) EXPECT_EQ(ha[i].total, hb[i].total);
    EXPECT_EQ(encode(a, ws), encode(b, ws));
}

TEST(train, functional_constraint_needs_a_fit) {
    const auto ws = ingest::window_per_cycle(tiny_fleet(), ingest::Channels::both);
    Model m(autoencoder_spec(NetworkKind::proposed_ae, 3, 2, ws.length), 0);
    ConstraintSpec c;
    c.kind = ConstraintKind::functional;
    EXPECT_THROW(train(m, ws, quick(1), c), ConfigError);
}

TEST(train, residual_models_need_healthy_windows) {
    auto ws = ingest::window_per_cycle(tiny_fleet(), ingest::Channels::both);
    Model m(residual_spec(NetworkKind::residual_reg, 3, 2, ws.length), 0);
    auto cfg = quick(1);
    cfg.healthy_cycles = 3;
    EXPECT_NO_THROW(train(m, ws, cfg));
    // windows that all end long after their unit's first recorded cycle
    for (auto& meta : ws.meta) meta.cycle += 1000;
    EXPECT_THROW(train(m, ws, cfg), TrainingError);
    cfg.healthy_cycles = -1;
    EXPECT_THROW(train(m, ws, cfg), ConfigError);
}

TEST(train, supervised_needs_one_label_per_window) {
    const auto ws = ingest::window_sliding(tiny_fleet(), 16, 4, ingest::Channels::both);
    Model m(supervised_spec(5, 16), 0);
    EXPECT_THROW(train(m, ws, quick(1), {}, std::vector<double>(ws.size() + 1, 0.5)), ShapeError);
    std::vector<double> labels(ws.size(), 0.5);
    EXPECT_NO_THROW(train(m, ws, quick(1), {}, labels));
    EXPECT_EQ(predict(m, ws).n, ws.size());
}

TEST(encode, channel_mismatch_is_a_shape_error) {
    const auto ws = ingest::window_per_cycle(tiny_fleet(), ingest::Channels::both);
    Model m(autoencoder_spec(NetworkKind::proposed_ae, 4, 2, ws.length), 0);
    EXPECT_THROW(encode(m, ws), ShapeError);
}

TEST(checkpoint, round_trip_reproduces_outputs) {
    const auto dir = testutil::scratch_dir();
    const auto ws = ingest::window_per_cycle(tiny_fleet(), ingest::Channels::both);
    Model m(autoencoder_spec(NetworkKind::proposed_ae, 3, 2, ws.length), 4);
    const auto cfg = quick(2);
    train(m, ws, cfg, {});
    save_checkpoint(m, cfg, dir / "model.json", "scaler.json");
    auto ck = load_checkpoint(dir / "model.json");
    EXPECT_EQ(ck.scaler_ref, "scaler.json");
    EXPECT_EQ(ck.train.epochs, 2);
    EXPECT_EQ(encode(ck.model, ws), encode(m, ws));
}

TEST(train_config, validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.learning_rate = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    EXPECT_EQ(c.epochs, 20);
    EXPECT_EQ(c.batch_size, 20u);
    EXPECT_DOUBLE_EQ(c.learning_rate, 1e-4);
}
