#include "hybridhi/losses.hpp"

#include "hybridhi/error.hpp"

#include <cmath>

namespace hybridhi::models {

namespace {

double sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

LossGrad loss_reconstruction(std::span<const double> x, std::span<const double> x_hat,
                             std::span<const std::uint8_t> mask, std::size_t n, std::size_t p, std::size_t length) {
    if (x.size() != x_hat.size() || x.size() != n * p * length || mask.size() != n * length)
        throw ShapeError("reconstruction loss: input shapes do not match");
    LossGrad out;
    out.grad.assign(x.size(), 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < length; ++s)
            if (mask[i * length + s]) count += p;
    if (count == 0) return out;

    const double inv = 1.0 / static_cast<double>(count);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < p; ++c) {
            for (std::size_t s = 0; s < length; ++s) {
                if (!mask[i * length + s]) continue;
                const std::size_t k = (i * p + c) * length + s;
                const double d = x_hat[k] - x[k];
                acc += std::abs(d);
                out.grad[k] = sign(d) * inv;
            }
        }
    }
    out.value = acc * inv;
    return out;
}

LossGrad loss_correlation(std::span<const double> z, std::span<const double> t) {
    if (z.size() != t.size()) throw ShapeError("correlation loss: z and t differ in length");
    LossGrad out;
    out.grad.assign(z.size(), 0.0);
    const std::size_t n = z.size();
    if (n < 2) return out;

    double zm = 0, tm = 0;
    for (std::size_t i = 0; i < n; ++i) {
        zm += z[i];
        tm += t[i];
    }
    zm /= static_cast<double>(n);
    tm /= static_cast<double>(n);
    double stt = 0, szz = 0, stz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        szz += (z[i] - zm) * (z[i] - zm);
        stz += (t[i] - tm) * (z[i] - zm);
    }
    if (stt * szz <= 1e-24) return out;

    const double root = std::sqrt(stt * szz);
    const double r = stz / root;
    out.value = r;
    for (std::size_t i = 0; i < n; ++i) out.grad[i] = (t[i] - tm) / root - r * (z[i] - zm) / szz;
    return out;
}

NegativeGradientLoss loss_negative_gradient(std::span<const double> z, std::span<const double> t,
                                            std::span<const int> units) {
    if (z.size() != t.size() || z.size() != units.size())
        throw ShapeError("negative-gradient loss: z, t and units differ in length");
    NegativeGradientLoss out;
    out.grad.assign(z.size(), 0.0);

    std::size_t pairs = 0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i)
        if (units[i] == units[i + 1] && t[i + 1] > t[i]) ++pairs;
    if (pairs == 0) {
        out.starved = true;
        return out;
    }

    const double inv = 1.0 / static_cast<double>(pairs);
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        if (units[i] != units[i + 1] || !(t[i + 1] > t[i])) continue;
        const double dt = t[i + 1] - t[i];
        const double slope = (z[i + 1] - z[i]) / dt;
        if (slope <= 0) continue;
        out.value += slope * inv;
        out.grad[i + 1] += inv / dt;
        out.grad[i] -= inv / dt;
    }
    return out;
}

LossGrad loss_functional(std::span<const double> z, std::span<const double> t,
                         const std::optional<weibull::WeibullFit>& g) {
    if (!g) throw ConfigError("functional constraint requires a fitted expected-HI function");
    if (z.size() != t.size()) throw ShapeError("functional loss: z and t differ in length");
    LossGrad out;
    out.grad.assign(z.size(), 0.0);
    if (z.empty()) return out;
    const double inv = 1.0 / static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double d = z[i] - (*g)(t[i]);
        out.value += std::abs(d) * inv;
        out.grad[i] = sign(d) * inv;
    }
    return out;
}

}  // namespace hybridhi::models
