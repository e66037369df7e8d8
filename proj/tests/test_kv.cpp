#include "hybridhi/error.hpp"
#include "hybridhi/kv.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace hybridhi;
using hybridhi::kv::Document;

TEST(kv, parses_typed_values_and_sections) {
    const auto d = Document::parse(R"(# experiment
method = "proposed"   # trailing comment
epochs = 20
lr = 1e-4
mask = true
seeds = [1, 2, 3]

[generator]
n_units = 12
)");
    EXPECT_EQ(d.string("method", ""), "proposed");
    EXPECT_EQ(d.integer("epochs", 0), 20);
    EXPECT_DOUBLE_EQ(d.number("lr", 0), 1e-4);
    EXPECT_TRUE(d.boolean("mask", false));
    EXPECT_EQ(d.list("seeds", {}), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(d.integer("generator.n_units", 0), 12);
    EXPECT_EQ(d.integer("missing", 7), 7);
}

TEST(kv, type_mismatch_is_a_config_error) {
    const auto d = Document::parse("epochs = \"twenty\"\nratio = 0.5\n");
    EXPECT_THROW(d.integer("epochs", 0), ConfigError);
    EXPECT_THROW(d.integer("ratio", 0), ConfigError);
    EXPECT_THROW(d.boolean("ratio", false), ConfigError);
}

TEST(kv, malformed_lines_are_rejected) {
    EXPECT_THROW(Document::parse("just words\n"), ConfigError);
    EXPECT_THROW(Document::parse("x = [1, two]\n"), ConfigError);
    EXPECT_THROW(Document::parse("s = \"open\n"), ConfigError);
    EXPECT_THROW(Document::parse("[section\n"), ConfigError);
}

TEST(kv, dump_is_sorted_and_round_trips) {
    Document d;
    d.set("z", 0.1);
    d.set("a.b", std::string("q\"x"));
    d.set("m", std::vector<double>{1.5, -2});
    d.set("f", false);
    const auto text = d.dump();
    EXPECT_LT(text.find("a.b"), text.find("z ="));
    const auto back = Document::parse(text);
    EXPECT_EQ(back.values(), d.values());
    EXPECT_EQ(back.dump(), text);
}

TEST(kv, save_load) {
    const auto dir = testutil::scratch_dir();
    Document d;
    d.set("lambda", 0.0);
    d.save(dir / "c.toml");
    EXPECT_EQ(Document::load(dir / "c.toml").number("lambda", 1), 0.0);
    EXPECT_THROW(Document::load(dir / "missing.toml"), ConfigError);
}

TEST(kv, unknown_keys) {
    const auto d = Document::parse("a = 1\nb = 2\n[s]\nc = 3\n");
    EXPECT_EQ(d.unknown_keys({"a", "s.c"}), (std::vector<std::string>{"b"}));
}
