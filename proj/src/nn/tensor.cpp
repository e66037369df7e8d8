#include "hybridhi/nn/tensor.hpp"

#include "hybridhi/error.hpp"

#include <algorithm>

namespace hybridhi::nn {

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n != b.n || a.l != b.l) throw ShapeError("concat_channels: batch or length mismatch");
    Tensor out(a.n, a.c + b.c, a.l);
    for (std::size_t i = 0; i < a.n; ++i) {
        std::copy_n(a.sample(i), a.c * a.l, out.sample(i));
        std::copy_n(b.sample(i), b.c * b.l, out.sample(i) + a.c * a.l);
    }
    return out;
}

void split_channels(const Tensor& t, std::size_t first, Tensor& a, Tensor& b) {
    if (first > t.c) throw ShapeError("split_channels: split point beyond channel count");
    a = Tensor(t.n, first, t.l);
    b = Tensor(t.n, t.c - first, t.l);
    for (std::size_t i = 0; i < t.n; ++i) {
        std::copy_n(t.sample(i), first * t.l, a.sample(i));
        std::copy_n(t.sample(i) + first * t.l, (t.c - first) * t.l, b.sample(i));
    }
}

Tensor broadcast_time(const Tensor& t, std::size_t length) {
    if (t.l != 1) throw ShapeError("broadcast_time: expected length-1 tensor");
    Tensor out(t.n, t.c, length);
    for (std::size_t i = 0; i < t.n; ++i)
        for (std::size_t ch = 0; ch < t.c; ++ch) std::fill_n(&out.at(i, ch, 0), length, t.at(i, ch, 0));
    return out;
}

Tensor sum_time(const Tensor& t) {
    Tensor out(t.n, t.c, 1);
    for (std::size_t i = 0; i < t.n; ++i)
        for (std::size_t ch = 0; ch < t.c; ++ch) {
            double s = 0.0;
            for (std::size_t k = 0; k < t.l; ++k) s += t.at(i, ch, k);
            out.at(i, ch, 0) = s;
        }
    return out;
}

}  // namespace hybridhi::nn
