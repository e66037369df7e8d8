#include "hybridhi/causal.hpp"

#include "hybridhi/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace hybridhi::causal {

namespace {

constexpr double kVarianceFloor = 1e-12;

// CART regression tree on up to two features, squared-error splits.
class RegressionTree {
public:
    void fit(const std::vector<std::array<double, 2>>& f, std::size_t n_features, const std::vector<double>& y,
             std::span<const std::size_t> rows, std::size_t min_leaf) {
        nodes_.clear();
        n_features_ = n_features;
        struct Job {
            std::vector<std::size_t> rows;
            int node;
        };
        nodes_.push_back({});
        std::vector<Job> stack;
        stack.push_back({{rows.begin(), rows.end()}, 0});
        std::vector<std::size_t> order;
        while (!stack.empty()) {
            Job job = std::move(stack.back());
            stack.pop_back();
            const auto& idx = job.rows;
            const double m = static_cast<double>(idx.size());
            double sum = 0, lo = y[idx[0]], hi = y[idx[0]];
            for (auto i : idx) {
                sum += y[i];
                lo = std::min(lo, y[i]);
                hi = std::max(hi, y[i]);
            }
            nodes_[job.node].value = sum / m;
            if (idx.size() < 2 * min_leaf || lo == hi) continue;

            // Maximizing S_L^2/n_L + S_R^2/n_R minimizes the children's SSE.
            double best = sum * sum / m * (1 + 1e-12) + 1e-300;
            int best_feature = -1;
            double best_threshold = 0;
            for (std::size_t feat = 0; feat < n_features_; ++feat) {
                order = idx;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return f[a][feat] < f[b][feat] || (f[a][feat] == f[b][feat] && a < b);
                });
                double left = 0;
                for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                    left += y[order[i]];
                    const std::size_t nl = i + 1, nr = order.size() - nl;
                    if (nl < min_leaf) continue;
                    if (nr < min_leaf) break;
                    const double a = f[order[i]][feat], b = f[order[i + 1]][feat];
                    if (!(a < b)) continue;
                    const double right = sum - left;
                    const double gain = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr);
                    if (gain > best) {
                        best = gain;
                        best_feature = static_cast<int>(feat);
                        best_threshold = 0.5 * (a + b);
                        if (!(best_threshold < b)) best_threshold = a;
                    }
                }
            }
            if (best_feature < 0) continue;

            Job left_job, right_job;
            for (auto i : idx)
                (f[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_job : right_job).rows.push_back(i);
            const int l = static_cast<int>(nodes_.size());
            nodes_.push_back({});
            nodes_.push_back({});
            nodes_[job.node].feature = best_feature;
            nodes_[job.node].threshold = best_threshold;
            nodes_[job.node].left = l;
            nodes_[job.node].right = l + 1;
            left_job.node = l;
            right_job.node = l + 1;
            stack.push_back(std::move(right_job));
            stack.push_back(std::move(left_job));
        }
    }

    double predict(const std::array<double, 2>& f) const {
        int n = 0;
        while (nodes_[n].feature >= 0)
            n = f[static_cast<std::size_t>(nodes_[n].feature)] <= nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
        return nodes_[n].value;
    }

private:
    struct TreeNode {
        int feature = -1;
        double threshold = 0;
        int left = -1, right = -1;
        double value = 0;
    };
    std::vector<TreeNode> nodes_;
    std::size_t n_features_ = 0;
};

// Samples sorted lexicographically and thinned, so every downstream step
// depends only on the multiset of samples.
std::array<std::vector<double>, 3> canonical(const Samples& data, std::size_t max_samples) {
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(data.x[a], data.w[a], data.z[a]) < std::tie(data.x[b], data.w[b], data.z[b]);
    });
    const std::size_t m = (max_samples > 0 && n > max_samples) ? max_samples : n;
    std::array<std::vector<double>, 3> out;
    for (auto& v : out) v.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t src = order[m == n ? i : i * n / m];
        out[X][i] = data.x[src];
        out[W][i] = data.w[src];
        out[Z][i] = data.z[src];
    }
    return out;
}

double variance(const std::vector<double>& v) {
    double mean = 0;
    for (double a : v) mean += a;
    mean /= static_cast<double>(v.size());
    double acc = 0;
    for (double a : v) acc += (a - mean) * (a - mean);
    return acc / static_cast<double>(v.size());
}

// Residual variance of `target` regressed on the nodes in `mask`.
double residual_variance(const std::array<std::vector<double>, 3>& cols, Node target, std::uint8_t mask,
                         const RegressorSpec& spec) {
    const auto& y = cols[target];
    if (mask == 0) return variance(y);

    const std::size_t n = y.size();
    std::vector<std::array<double, 2>> feats(n);
    std::size_t nf = 0;
    for (int node = 0; node < 3; ++node) {
        if (!(mask & (1u << node))) continue;
        for (std::size_t i = 0; i < n; ++i) feats[i][nf] = cols[static_cast<std::size_t>(node)][i];
        ++nf;
    }

    std::vector<double> resid(n);
    RegressionTree tree;
    if (spec.name == "tree_fit") {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        tree.fit(feats, nf, y, all, spec.min_samples_leaf);
        for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - tree.predict(feats[i]);
    } else {
        const std::size_t k = std::min(spec.folds, n);
        for (std::size_t fold = 0; fold < k; ++fold) {
            std::vector<std::size_t> train;
            for (std::size_t i = 0; i < n; ++i)
                if (i % k != fold) train.push_back(i);
            tree.fit(feats, nf, y, train, spec.min_samples_leaf);
            for (std::size_t i = fold; i < n; i += k) resid[i] = y[i] - tree.predict(feats[i]);
        }
    }
    return variance(resid);
}

void check_samples(const Samples& data) {
    if (data.w.size() != data.x.size() || data.z.size() != data.x.size())
        throw ShapeError("causal samples: x, w and z differ in length");
    if (data.size() < 50) throw DataError("causal scoring needs at least 50 samples, got " + std::to_string(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
        if (!std::isfinite(data.x[i]) || !std::isfinite(data.w[i]) || !std::isfinite(data.z[i]))
            throw DataError("causal samples contain non-finite values");
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

bool Dag3::acyclic() const {
    // Kahn's algorithm on three nodes.
    std::array<std::uint8_t, 3> pending = parents;
    std::uint8_t done = 0;
    for (int round = 0; round < 3; ++round) {
        bool progressed = false;
        for (int v = 0; v < 3; ++v) {
            if (done & (1u << v)) continue;
            if ((pending[static_cast<std::size_t>(v)] & ~done) == 0) {
                done |= static_cast<std::uint8_t>(1u << v);
                progressed = true;
            }
        }
        if (!progressed) break;
    }
    for (int v = 0; v < 3; ++v)
        if (parents[static_cast<std::size_t>(v)] & (1u << v)) return false;
    return done == 0b111;
}

std::size_t Dag3::edges() const {
    std::size_t n = 0;
    for (auto p : parents) n += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(p)));
    return n;
}

std::string to_string(const Dag3& dag) {
    static constexpr std::array<char, 3> names{'X', 'W', 'Z'};
    static constexpr std::array<Node, 3> node_order{X, W, Z};
    static constexpr std::array<Node, 3> parent_order{Z, W, X};
    std::string out;
    for (Node v : node_order) {
        if (!dag.parents[v]) continue;
        if (!out.empty()) out += ", ";
        out += names[v];
        out += "<-[";
        bool first = true;
        for (Node p : parent_order) {
            if (!dag.has_edge(p, v)) continue;
            if (!first) out += ',';
            out += names[p];
            first = false;
        }
        out += ']';
    }
    return out.empty() ? "empty" : out;
}

std::vector<Dag3> enumerate_dags() {
    static constexpr std::array<std::pair<Node, Node>, 3> pairs{{{X, W}, {X, Z}, {W, Z}}};
    std::vector<Dag3> out;
    for (int code = 0; code < 27; ++code) {
        Dag3 dag;
        int c = code;
        for (const auto& [a, b] : pairs) {
            const int state = c % 3;
            c /= 3;
            if (state == 1) dag.parents[b] |= static_cast<std::uint8_t>(1u << a);
            if (state == 2) dag.parents[a] |= static_cast<std::uint8_t>(1u << b);
        }
        if (dag.acyclic()) out.push_back(dag);
    }
    std::stable_sort(out.begin(), out.end(), [](const Dag3& a, const Dag3& b) { return a.edges() < b.edges(); });
    return out;
}

void RegressorSpec::validate() const {
    if (name != "tree" && name != "tree_fit") throw ConfigError("unknown regressor '" + name + "' (tree, tree_fit)");
    if (min_samples_leaf < 1) throw ConfigError("regressor min_samples_leaf must be >= 1");
    if (name == "tree" && folds < 2) throw ConfigError("regressor folds must be >= 2");
}

ScoreResult score_dag(const Samples& data, const Dag3& dag, const RegressorSpec& regressor) {
    regressor.validate();
    check_samples(data);
    if (!dag.acyclic()) throw ConfigError("score_dag: graph is cyclic");
    const auto cols = canonical(data, regressor.max_samples);
    ScoreResult out;
    for (Node v : {X, W, Z}) {
        double var = residual_variance(cols, v, dag.parents[v], regressor);
        if (var < kVarianceFloor) {
            var = kVarianceFloor;
            out.degenerate = true;
        }
        out.score -= std::log(var);
    }
    return out;
}

std::vector<DagScore> score_all(const Samples& data, const RegressorSpec& regressor) {
    regressor.validate();
    check_samples(data);
    const auto cols = canonical(data, regressor.max_samples);

    std::map<std::pair<int, int>, double> cache;
    const auto term = [&](Node v, std::uint8_t mask) {
        const auto key = std::make_pair(static_cast<int>(v), static_cast<int>(mask));
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, residual_variance(cols, v, mask, regressor)).first;
        return it->second;
    };

    std::vector<DagScore> out;
    for (const auto& dag : enumerate_dags()) {
        DagScore s;
        s.dag = dag;
        for (Node v : {X, W, Z}) {
            double var = term(v, dag.parents[v]);
            if (var < kVarianceFloor) {
                var = kVarianceFloor;
                s.degenerate = true;
            }
            s.score -= std::log(var);
        }
        out.push_back(s);
    }
    for (auto& s : out)
        s.rank = static_cast<int>(std::count_if(out.begin(), out.end(), [&](const DagScore& o) { return o.score > s.score; }));
    return out;
}

Ranking rank_structures(const FleetDataset& fleet, int min_cycle, const RegressorSpec& regressor) {
    regressor.validate();
    if (!fleet.has_ground_truth()) throw DataError("causal ranking needs ground-truth HI on every unit");
    if (fleet.n_sensors == 0 || fleet.n_conditions == 0) throw DataError("causal ranking needs sensor and condition columns");

    Ranking out;
    const auto dags = enumerate_dags();
    std::vector<std::vector<double>> ranks(dags.size());
    for (std::size_t i = 0; i < fleet.n_sensors; ++i) {
        for (std::size_t j = 0; j < fleet.n_conditions; ++j) {
            Samples s;
            for (const auto& unit : fleet.units) {
                for (std::size_t c = 0; c < unit.cycles.size(); ++c) {
                    const auto& rec = unit.cycles[c];
                    if (rec.t <= min_cycle) continue;
                    const double z = 1.0 - (*unit.hi_gt)[c];
                    for (Eigen::Index r = 0; r < rec.x.rows(); ++r) {
                        s.x.push_back(rec.x(r, static_cast<Eigen::Index>(i)));
                        s.w.push_back(rec.w(r, static_cast<Eigen::Index>(j)));
                        s.z.push_back(z);
                    }
                }
            }
            if (s.size() == 0)
                throw DataError("cycle filter (cycle > " + std::to_string(min_cycle) + ") removed every row");
            out.samples = s.size();
            const auto scores = score_all(s, regressor);
            for (std::size_t d = 0; d < dags.size(); ++d) ranks[d].push_back(scores[d].rank);
            if (std::any_of(scores.begin(), scores.end(), [](const DagScore& d) { return d.degenerate; }))
                out.warnings.push_back({"degenerate_variance", "residual variance floored for pair X" +
                                                                       std::to_string(i) + "/W" + std::to_string(j)});
            ++out.pairs;
        }
    }

    for (std::size_t d = 0; d < dags.size(); ++d) {
        const double mean = std::accumulate(ranks[d].begin(), ranks[d].end(), 0.0) / static_cast<double>(ranks[d].size());
        out.rows.push_back({dags[d], median(ranks[d]), mean});
    }
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const RankingRow& a, const RankingRow& b) {
        return std::tie(a.median_rank, a.mean_rank) < std::tie(b.median_rank, b.mean_rank);
    });
    return out;
}

void write_ranking_csv(const Ranking& ranking, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << "dag,median_rank,mean_rank\n";
    out.precision(10);
    for (const auto& row : ranking.rows)
        out << '"' << to_string(row.dag) << "\"," << row.median_rank << ',' << row.mean_rank << '\n';
}

}  // namespace hybridhi::causal
