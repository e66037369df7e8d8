#include "hybridhi/weibull.hpp"

#include "hybridhi/kv.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hybridhi::weibull {

namespace {

constexpr double kBetaCap = 200.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double geometric_mean(std::span<const double> times) {
    double acc = 0;
    for (double t : times) acc += std::log(t);
    return std::exp(acc / static_cast<double>(times.size()));
}

// Profile-likelihood score for the shape on times already divided by their
// geometric mean (so mean log is zero). Increasing in beta.
double shape_score(std::span<const double> scaled, double beta) {
    double num = 0, den = 0;
    for (double x : scaled) {
        const double lx = std::log(x);
        const double w = std::exp(beta * lx);
        num += w * lx;
        den += w;
    }
    return num / den - 1.0 / beta;
}

struct LinearFit {
    double A = 0, D = 0, sse = std::numeric_limits<double>::infinity();
};

LinearFit fit_given_exponent(std::span<const double> x, std::span<const double> s) {
    const double n = static_cast<double>(x.size());
    const auto sse = [&](double A, double D) {
        double acc = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = s[i] - (A - D * x[i]);
            acc += r * r;
        }
        return acc;
    };
    const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double sm = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double sxx = 0, sxs = 0, xx = 0, xs = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxs += (x[i] - xm) * (s[i] - sm);
        xx += x[i] * x[i];
        xs += x[i] * s[i];
    }

    LinearFit best;
    const auto consider = [&](double A, double D) {
        if (A < 0.8 || A > 1.5 || D < 0 || !std::isfinite(D)) return;
        const double e = sse(A, D);
        if (e < best.sse) best = {A, D, e};
    };
    if (sxx > 0) {
        const double D = -sxs / sxx;
        consider(sm + D * xm, D);
    }
    for (double A : {0.8, 1.5}) {
        if (xx > 0) consider(A, std::max(0.0, (A * n * xm - xs) / xx));
    }
    consider(std::clamp(sm, 0.8, 1.5), 0.0);
    return best;
}

}  // namespace

double g_of_t(double t, const WeibullFit& fit) {
    if (!(fit.P > 0 && fit.P < 1)) throw ConfigError("confidence P must lie in (0, 1)");
    if (!(fit.beta > 0)) throw ConfigError("Weibull shape must be positive");
    if (t < 0) throw DataError("g(t) is defined for t >= 0");
    const double eta_p = t * std::pow(-std::log1p(-fit.P), -1.0 / fit.beta);
    const double g = fit.A - std::pow(fit.B * eta_p, fit.C);
    return std::clamp(g, 0.0, fit.A);
}

double WeibullFit::operator()(double t) const { return g_of_t(t, *this); }

std::vector<double> default_thresholds() { return {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2}; }

CrossingTimes crossing_times(std::span<const HITrajectory> trajectories, std::span<const double> thresholds) {
    CrossingTimes out;
    for (double s : thresholds) {
        if (!(s > 0 && s < 1)) throw ConfigError("thresholds must lie strictly inside (0, 1)");
        std::vector<double> times;
        for (const auto& traj : trajectories) {
            for (std::size_t i = 0; i < traj.h.size(); ++i) {
                if (traj.h[i] > s) continue;
                if (i == 0) {
                    times.push_back(traj.t[0]);
                } else {
                    const double h0 = traj.h[i - 1], h1 = traj.h[i];
                    const double frac = (h0 - s) / (h0 - h1);
                    times.push_back(traj.t[i - 1] + frac * (traj.t[i] - traj.t[i - 1]));
                }
                break;
            }
        }
        if (times.empty()) {
            out.warnings.push_back({"threshold_unreached", "no unit reaches HI threshold " + std::to_string(s)});
            continue;
        }
        out.times[s] = std::move(times);
    }
    return out;
}

ShapeScale fit_weibull(std::span<const double> times) {
    if (times.size() < 3) throw FitError("Weibull fit needs at least 3 samples", kNaN);
    for (double t : times)
        if (!(t > 0) || !std::isfinite(t)) throw FitError("Weibull fit needs positive, finite samples", kNaN);

    const double gm = geometric_mean(times);
    std::vector<double> scaled(times.size());
    std::transform(times.begin(), times.end(), scaled.begin(), [gm](double t) { return t / gm; });

    ShapeScale out;
    const auto f = [&](double log_beta) { return shape_score(scaled, std::exp(log_beta)); };
    const double lo = std::log(1e-3), hi = std::log(kBetaCap);
    if (f(hi) <= 0) {
        out.beta = kBetaCap;
        out.degenerate = true;
    } else {
        std::uintmax_t iters = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(
            f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
        out.beta = std::exp(0.5 * (a + b));
    }
    out.eta = fit_scale(times, out.beta);
    return out;
}

double fit_scale(std::span<const double> times, double beta) {
    if (times.empty()) throw FitError("scale fit needs at least one sample", kNaN);
    const double m = *std::max_element(times.begin(), times.end());
    double acc = 0;
    for (double t : times) acc += std::pow(t / m, beta);
    return m * std::pow(acc / static_cast<double>(times.size()), 1.0 / beta);
}

EtaCurve fit_eta_curve(std::span<const std::pair<double, double>> eta_s_pairs) {
    if (eta_s_pairs.size() < 3) throw FitError("eta curve fit needs at least 3 thresholds", kNaN);
    double m = 0;
    for (const auto& [eta, s] : eta_s_pairs) {
        if (!(eta > 0)) throw FitError("eta values must be positive", kNaN);
        m = std::max(m, eta);
    }
    std::vector<double> scaled, s;
    for (const auto& [eta, level] : eta_s_pairs) {
        scaled.push_back(eta / m);
        s.push_back(level);
    }

    std::vector<double> x(scaled.size());
    const auto profile = [&](double log_c) {
        const double c = std::exp(log_c);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::pow(scaled[i], c);
        return fit_given_exponent(x, s);
    };

    const double lo = std::log(0.05), hi = std::log(20.0);
    constexpr int kGrid = 400;
    double best_u = lo, best_sse = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kGrid; ++k) {
        const double u = lo + (hi - lo) * k / kGrid;
        const double e = profile(u).sse;
        if (e < best_sse) best_sse = e, best_u = u;
    }
    const double step = (hi - lo) / kGrid;
    std::uintmax_t iters = 500;
    const auto [u, sse] = boost::math::tools::brent_find_minima(
        [&](double v) { return profile(v).sse; }, std::max(lo, best_u - step), std::min(hi, best_u + step),
        std::numeric_limits<double>::digits, iters);

    const LinearFit lin = profile(u);
    const double C = std::exp(u);
    const double residual = std::sqrt(sse);
    if (!std::isfinite(lin.sse) || !(lin.D > 0))
        throw FitError("eta curve fit did not converge (residual norm " + std::to_string(residual) + ")", residual);

    EtaCurve out;
    out.A = lin.A;
    out.C = C;
    out.B = std::pow(lin.D, 1.0 / C) / m;
    out.residual_norm = residual;
    return out;
}

WeibullFit fit_expected_hi(std::span<const HITrajectory> trajectories, std::span<const double> thresholds,
                           double confidence) {
    if (!(confidence > 0 && confidence < 1)) throw ConfigError("confidence P must lie in (0, 1)");
    WeibullFit fit;
    fit.P = confidence;

    const auto keep_positive = [&fit](std::vector<double> times, const std::string& label) {
        const auto before = times.size();
        std::erase_if(times, [](double t) { return !(t > 0); });
        if (times.size() != before)
            fit.warnings.push_back({"nonpositive_time", std::to_string(before - times.size()) +
                                                            " non-positive crossing time(s) dropped at " + label});
        return times;
    };

    std::vector<double> failures;
    for (const auto& traj : trajectories)
        if (!traj.t.empty()) failures.push_back(traj.t.back());
    failures = keep_positive(std::move(failures), "failure");
    const ShapeScale shape = fit_weibull(failures);
    fit.beta = shape.beta;
    if (shape.degenerate)
        fit.warnings.push_back({"beta_capped", "failure times are nearly identical; shape capped at 200"});

    auto crossings = crossing_times(trajectories, thresholds);
    fit.warnings.insert(fit.warnings.end(), crossings.warnings.begin(), crossings.warnings.end());

    std::vector<std::pair<double, double>> pairs;
    for (auto& [s, times] : crossings.times) {
        times = keep_positive(std::move(times), "threshold " + std::to_string(s));
        if (times.empty()) continue;
        const double eta = fit_scale(times, fit.beta);
        fit.eta_by_threshold[s] = eta;
        pairs.emplace_back(eta, s);
    }
    pairs.emplace_back(fit_scale(failures, fit.beta), 0.0);

    // eta should shrink as the threshold rises (higher HI is reached earlier)
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& [s, eta] : fit.eta_by_threshold) {
        if (eta > prev * (1 + 1e-9)) {
            fit.warnings.push_back({"eta_not_monotone", "eta increases with threshold at s=" + std::to_string(s)});
            break;
        }
        prev = eta;
    }

    const EtaCurve curve = fit_eta_curve(pairs);
    fit.A = curve.A;
    fit.B = curve.B;
    fit.C = curve.C;
    return fit;
}

void save_fit(const WeibullFit& fit, const std::filesystem::path& file) {
    kv::Document doc;
    doc.set("format", std::string("hybridhi.weibull/1"));
    doc.set("A", fit.A);
    doc.set("B", fit.B);
    doc.set("C", fit.C);
    doc.set("beta", fit.beta);
    doc.set("P", fit.P);
    std::vector<double> s, eta;
    for (const auto& [k, v] : fit.eta_by_threshold) {
        s.push_back(k);
        eta.push_back(v);
    }
    doc.set("thresholds", s);
    doc.set("eta", eta);
    doc.save(file);
}

WeibullFit load_fit(const std::filesystem::path& file) {
    const auto doc = kv::Document::load(file);
    if (doc.string("format", "") != "hybridhi.weibull/1")
        throw ConfigError(file.string() + " is not a Weibull fit file");
    WeibullFit fit;
    fit.A = doc.number("A", 1.0);
    fit.B = doc.number("B", 1.0);
    fit.C = doc.number("C", 1.0);
    fit.beta = doc.number("beta", 1.0);
    fit.P = doc.number("P", 0.5);
    const auto s = doc.list("thresholds", {});
    const auto eta = doc.list("eta", {});
    if (s.size() != eta.size()) throw ConfigError(file.string() + ": threshold table is ragged");
    for (std::size_t i = 0; i < s.size(); ++i) fit.eta_by_threshold[s[i]] = eta[i];
    if (!(fit.P > 0 && fit.P < 1) || !(fit.beta > 0) || !(fit.B > 0) || !(fit.C > 0))
        throw ConfigError(file.string() + ": invalid Weibull parameters");
    return fit;
}

}  // namespace hybridhi::weibull
