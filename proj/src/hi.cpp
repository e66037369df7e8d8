#include "hybridhi/hi.hpp"

#include "hybridhi/error.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace hybridhi::hi {

Eigen::MatrixXd compute_residual(std::span<const double> x, std::span<const double> x_hat,
                                 std::span<const std::uint8_t> mask, std::size_t n, std::size_t p, std::size_t length) {
    if (x.size() != x_hat.size() || x.size() != n * p * length)
        throw ShapeError("compute_residual: shapes of X and its reconstruction differ");
    if (!mask.empty() && mask.size() != n * length) throw ShapeError("compute_residual: mask shape mismatch");
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t valid = 0;
        for (std::size_t s = 0; s < length; ++s) {
            if (!mask.empty() && !mask[i * length + s]) continue;
            ++valid;
            for (std::size_t c = 0; c < p; ++c) {
                const std::size_t k = (i * p + c) * length + s;
                r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) += std::abs(x[k] - x_hat[k]);
            }
        }
        if (valid > 0) r.row(static_cast<Eigen::Index>(i)) /= static_cast<double>(valid);
    }
    return r;
}

Eigen::VectorXd PcaFit::project(const Eigen::MatrixXd& residuals) const {
    if (residuals.cols() != mean.size()) throw ShapeError("PcaFit::project: residual width mismatch");
    return (residuals.rowwise() - mean.transpose()) * direction;
}

PcaFit fit_pca(const Eigen::MatrixXd& residuals) {
    if (residuals.rows() < 2) throw DataError("fit_pca: need at least 2 residual vectors");
    PcaFit fit;
    fit.mean = residuals.colwise().mean().transpose();
    const Eigen::MatrixXd centered = residuals.rowwise() - fit.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(residuals.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double top = eig.eigenvalues()(eig.eigenvalues().size() - 1);
    if (!(top > 1e-15)) throw DataError("fit_pca: residuals have zero variance");
    fit.direction = eig.eigenvectors().col(eig.eigenvectors().cols() - 1).normalized();
    Eigen::Index arg = 0;
    fit.direction.cwiseAbs().maxCoeff(&arg);
    if (fit.direction(arg) < 0) {
        fit.direction = -fit.direction;
        fit.flipped = true;
    }
    return fit;
}

std::vector<CycleSeries> per_cycle_average(std::span<const double> scalars, std::span<const ingest::WindowMeta> meta) {
    if (scalars.size() != meta.size()) throw ShapeError("per_cycle_average: one scalar per window required");
    std::map<int, std::map<int, std::pair<double, std::size_t>>> acc;
    std::vector<int> order;
    for (std::size_t i = 0; i < meta.size(); ++i) {
        if (!acc.contains(meta[i].unit)) order.push_back(meta[i].unit);
        auto& cell = acc[meta[i].unit][meta[i].cycle];
        cell.first += scalars[i];
        ++cell.second;
    }
    std::vector<CycleSeries> out;
    for (int u : order) {
        CycleSeries s;
        s.unit = u;
        for (const auto& [t, cell] : acc[u]) {
            s.t.push_back(t);
            s.value.push_back(cell.first / static_cast<double>(cell.second));
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

std::pair<double, double> early_late_means(const CycleSeries& s) {
    const std::size_t n = s.value.size();
    const std::size_t k = std::max<std::size_t>(1, n / 10);
    double early = 0, late = 0;
    for (std::size_t i = 0; i < k; ++i) {
        early += s.value[i];
        late += s.value[n - 1 - i];
    }
    return {early / static_cast<double>(k), late / static_cast<double>(k)};
}

}  // namespace

double orientation(std::span<const CycleSeries> training) {
    int votes = 0;
    double early_sum = 0, late_sum = 0;
    for (const auto& s : training) {
        if (s.value.size() < 2) continue;
        const auto [early, late] = early_late_means(s);
        early_sum += early;
        late_sum += late;
        if (early > late) ++votes;
        else if (early < late) --votes;
    }
    if (votes != 0) return votes > 0 ? 1.0 : -1.0;
    return early_sum >= late_sum ? 1.0 : -1.0;
}

HiNormalizer fit_normalizer(std::span<const CycleSeries> training) {
    HiNormalizer n;
    n.sign = orientation(training);
    double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : training)
        for (double v : s.value) {
            lo = std::min(lo, n.sign * v);
            hi = std::max(hi, n.sign * v);
        }
    if (!std::isfinite(lo)) throw DataError("fit_normalizer: no training values");
    n.lo = lo;
    n.hi = hi;
    return n;
}

HITrajectory HiNormalizer::apply(const CycleSeries& series) const {
    HITrajectory tr;
    tr.unit = series.unit;
    tr.t = series.t;
    tr.h.reserve(series.value.size());
    for (double v : series.value) {
        const double h = degenerate() ? 1.0 : (sign * v - lo) / (hi - lo);
        tr.h.push_back(std::clamp(h, 0.0, 1.0));
    }
    return tr;
}

std::vector<HITrajectory> HiNormalizer::apply(std::span<const CycleSeries> series) const {
    std::vector<HITrajectory> out;
    for (const auto& s : series) out.push_back(apply(s));
    return out;
}

std::vector<HITrajectory> residual_to_hi(const Eigen::MatrixXd& residuals, std::span<const ingest::WindowMeta> meta,
                                         const PcaFit& pca, const HiNormalizer& normalizer) {
    const Eigen::VectorXd proj = pca.project(residuals);
    const auto series = per_cycle_average(std::span<const double>(proj.data(), static_cast<std::size_t>(proj.size())), meta);
    return normalizer.apply(series);
}

std::vector<HITrajectory> latent_to_hi(std::span<const double> z, std::span<const ingest::WindowMeta> meta,
                                       const HiNormalizer& normalizer) {
    return normalizer.apply(per_cycle_average(z, meta));
}

double to_soh(double h) { return 60.0 + 40.0 * h; }

std::vector<HITrajectory> to_soh(std::vector<HITrajectory> trajectories) {
    for (auto& tr : trajectories)
        for (auto& h : tr.h) h = to_soh(h);
    return trajectories;
}

void save_normalizer(const HiNormalizer& n, const std::filesystem::path& file) {
    nlohmann::json j = {{"format", "hybridhi.normalizer/1"}, {"sign", n.sign}, {"lo", n.lo}, {"hi", n.hi}};
    std::ofstream(file) << j.dump(2) << '\n';
}

HiNormalizer load_normalizer(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    const auto j = nlohmann::json::parse(in);
    return {j.at("sign").get<double>(), j.at("lo").get<double>(), j.at("hi").get<double>()};
}

void save_pca(const PcaFit& pca, const std::filesystem::path& file) {
    nlohmann::json j = {{"format", "hybridhi.pca/1"},
                        {"mean", std::vector<double>(pca.mean.data(), pca.mean.data() + pca.mean.size())},
                        {"direction", std::vector<double>(pca.direction.data(), pca.direction.data() + pca.direction.size())},
                        {"flipped", pca.flipped}};
    std::ofstream(file) << j.dump(2) << '\n';
}

PcaFit load_pca(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    const auto j = nlohmann::json::parse(in);
    const auto m = j.at("mean").get<std::vector<double>>();
    const auto d = j.at("direction").get<std::vector<double>>();
    PcaFit p;
    p.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    p.direction = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
    p.flipped = j.value("flipped", false);
    return p;
}

}  // namespace hybridhi::hi
