#pragma once

#include <cstddef>
#include <vector>

namespace hybridhi::nn {

// Dense batch tensor in channels-first layout [n, c, l]. Feature vectors
// (after flatten/dense layers) use l = 1.
struct Tensor {
    std::size_t n = 0, c = 0, l = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(std::size_t n_, std::size_t c_, std::size_t l_, double fill = 0.0)
        : n(n_), c(c_), l(l_), v(n_ * c_ * l_, fill) {}

    std::size_t size() const { return v.size(); }
    double& at(std::size_t i, std::size_t ch, std::size_t s) { return v[(i * c + ch) * l + s]; }
    double at(std::size_t i, std::size_t ch, std::size_t s) const { return v[(i * c + ch) * l + s]; }
    double* sample(std::size_t i) { return v.data() + i * c * l; }
    const double* sample(std::size_t i) const { return v.data() + i * c * l; }
    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && l == o.l; }
};

// Concatenates along the channel axis; all inputs share n and l.
Tensor concat_channels(const Tensor& a, const Tensor& b);
// Splits channels [0, first) and [first, c).
void split_channels(const Tensor& t, std::size_t first, Tensor& a, Tensor& b);
// Repeats a [n, c, 1] tensor over `length` steps.
Tensor broadcast_time(const Tensor& t, std::size_t length);
// Sums a [n, c, l] tensor over time into [n, c, 1].
Tensor sum_time(const Tensor& t);

}  // namespace hybridhi::nn
