#pragma once

#include "hybridhi/diagnostics.hpp"
#include "hybridhi/fleet.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hybridhi::causal {

enum Node : std::uint8_t { X = 0, W = 1, Z = 2 };

// Three-node DAG stored as a parent bitmask per node.
struct Dag3 {
    std::array<std::uint8_t, 3> parents{};

    bool has_edge(Node from, Node to) const { return parents[to] & (1u << from); }
    bool acyclic() const;
    std::size_t edges() const;
    bool operator==(const Dag3&) const = default;
};

// e.g. "X<-[Z,W], Z<-[W]"; the empty graph prints as "empty".
std::string to_string(const Dag3& dag);

// All 25 DAGs: empty graph first, then by edge count.
std::vector<Dag3> enumerate_dags();

// Nonparametric regressor used to compute residuals.
//   "tree"     CART regression tree, residuals predicted out of fold
//   "tree_fit" CART regression tree, in-sample residuals
struct RegressorSpec {
    std::string name = "tree";
    std::size_t min_samples_leaf = 20;
    std::size_t folds = 5;
    std::size_t max_samples = 4000;  // deterministic thinning above this size

    void validate() const;
};

struct Samples {
    std::vector<double> x, w, z;
    std::size_t size() const { return x.size(); }
};

struct ScoreResult {
    double score = 0;
    bool degenerate = false;  // a residual variance hit the floor
};

// Sum over nodes of -log var(residual of node on its parents).
ScoreResult score_dag(const Samples& data, const Dag3& dag, const RegressorSpec& regressor = {});

struct DagScore {
    Dag3 dag;
    double score = 0;
    int rank = 0;  // 0 = best; ties share the better rank
    bool degenerate = false;
};

// Scores every DAG of enumerate_dags() on one sample set.
std::vector<DagScore> score_all(const Samples& data, const RegressorSpec& regressor = {});

struct RankingRow {
    Dag3 dag;
    double median_rank = 0;
    double mean_rank = 0;
};

struct Ranking {
    std::vector<RankingRow> rows;  // sorted by median, then mean rank
    std::size_t pairs = 0;
    std::size_t samples = 0;  // rows surviving the cycle filter
    Diagnostics warnings;
};

// Ranks all DAGs for every (X_i, W_j) pair with z = 1 - hi_gt, keeping
// rows whose cycle index exceeds `min_cycle`.
Ranking rank_structures(const FleetDataset& fleet, int min_cycle = 45, const RegressorSpec& regressor = {});

void write_ranking_csv(const Ranking& ranking, const std::filesystem::path& file);

}  // namespace hybridhi::causal
