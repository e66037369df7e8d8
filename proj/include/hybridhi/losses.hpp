#pragma once

#include "hybridhi/weibull.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hybridhi::models {

// Loss value with its gradient w.r.t. the predicted quantity.
struct LossGrad {
    double value = 0;
    std::vector<double> grad;
};

// Mean absolute error over unmasked entries. x and x_hat are [n, p, S]
// channels-first, mask is [n, S] (1 = real step). Fully masked windows drop
// out of the mean; sign(0) is taken as 0.
LossGrad loss_reconstruction(std::span<const double> x, std::span<const double> x_hat,
                             std::span<const std::uint8_t> mask, std::size_t n, std::size_t p, std::size_t length);

// Pearson correlation between cycle index and latent; 0 when either side
// has (numerically) zero variance.
LossGrad loss_correlation(std::span<const double> z, std::span<const double> t);

struct NegativeGradientLoss : LossGrad {
    bool starved = false;  // no unit had two samples in the batch
};

// Mean over consecutive same-unit pairs of max(0, dZ/dt). Samples are
// expected grouped by unit and ordered by t.
NegativeGradientLoss loss_negative_gradient(std::span<const double> z, std::span<const double> t,
                                            std::span<const int> units);

// Mean |g(t_i) - z_i|; throws ConfigError without a fit.
LossGrad loss_functional(std::span<const double> z, std::span<const double> t,
                         const std::optional<weibull::WeibullFit>& g);

}  // namespace hybridhi::models
