#include "hybridhi/nn/layers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hybridhi::nn;

namespace {

Tensor random_tensor(std::size_t n, std::size_t c, std::size_t l, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0, 1);
    Tensor t(n, c, l);
    for (auto& v : t.v) v = d(rng);
    return t;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
    return s;
}

// Checks d<out, R>/d(input) and d<out, R>/d(params) against central differences.
void check_layer(Layer& layer, const Tensor& input, std::mt19937_64& rng, double tol = 1e-5) {
    const Tensor out = layer.forward(input, true);
    const Tensor r = random_tensor(out.n, out.c, out.l, rng);
    for (auto* p : layer.params()) p->zero_grad();
    const Tensor gin = layer.backward(r);

    const double err_in = oracles::gradient_rel_error(
        [&](const std::vector<double>& x) {
            Tensor t = input;
            t.v = x;
            return dot(layer.forward(t, true), r);
        },
        input.v, gin.v);
    EXPECT_LE(err_in, tol) << layer.describe().dump();

    for (auto* p : layer.params()) {
        const auto analytic = p->grad;
        const double err = oracles::gradient_rel_error(
            [&](const std::vector<double>& w) {
                const auto saved = p->value;
                p->value = w;
                const double v = dot(layer.forward(input, true), r);
                p->value = saved;
                return v;
            },
            p->value, analytic);
        EXPECT_LE(err, tol) << layer.describe().dump();
    }
}

}  // namespace

TEST(nn_gradients, conv1d) {
    std::mt19937_64 rng(1);
    for (std::size_t k : {1u, 3u, 4u, 10u}) {
        Conv1d conv(3, 4, k, rng);
        check_layer(conv, random_tensor(2, 3, 12, rng), rng);
    }
}

TEST(nn_gradients, dense) {
    std::mt19937_64 rng(2);
    Dense d(7, 3, rng);
    check_layer(d, random_tensor(4, 7, 1, rng), rng);
}

TEST(nn_gradients, relu_flatten_pool_mask) {
    std::mt19937_64 rng(3);
    ReLU relu;
    check_layer(relu, random_tensor(3, 2, 9, rng), rng);
    Flatten flat;
    check_layer(flat, random_tensor(3, 2, 5, rng), rng);
    MaxPool1d pool(2);
    check_layer(pool, random_tensor(3, 2, 9, rng), rng);
    TimeMask mask;
    std::vector<std::uint8_t> m(3 * 6, 1);
    m[4] = m[5] = m[11] = 0;
    mask.set(m);
    check_layer(mask, random_tensor(3, 2, 6, rng), rng);
}

TEST(nn_gradients, batch_norm_training_mode) {
    std::mt19937_64 rng(4);
    BatchNorm1d bn(3);
    check_layer(bn, random_tensor(5, 3, 4, rng), rng, 1e-4);
}

TEST(nn_gradients, sequential_stack) {
    std::mt19937_64 rng(5);
    Sequential s;
    s.add<Conv1d>(2, 4, 3, rng);
    s.add<ReLU>();
    s.add<Conv1d>(4, 2, 3, rng);
    s.add<Flatten>();
    s.add<Dense>(16, 1, rng);
    const Tensor x = random_tensor(3, 2, 8, rng);
    const Tensor out = s.forward(x, true);
    const Tensor r = random_tensor(out.n, out.c, out.l, rng);
    for (auto* p : s.params()) p->zero_grad();
    const Tensor gin = s.backward(r);
    EXPECT_LE(oracles::gradient_rel_error(
                  [&](const std::vector<double>& v) {
                      Tensor t = x;
                      t.v = v;
                      return dot(s.forward(t, true), r);
                  },
                  x.v, gin.v),
              1e-5);
}

TEST(conv1d, same_padding_identity_kernel) {
    std::mt19937_64 rng(6);
    Conv1d conv(1, 1, 3, rng);
    auto params = conv.params();
    params[0]->value = {0, 1, 0};
    params[1]->value = {0.5};
    Tensor x(1, 1, 4);
    x.v = {1, 2, 3, 4};
    const auto y = conv.forward(x, false);
    EXPECT_EQ(y.v, (std::vector<double>{1.5, 2.5, 3.5, 4.5}));
}

TEST(maxpool, drops_trailing_step) {
    MaxPool1d pool(2);
    Tensor x(1, 1, 5);
    x.v = {1, 3, 2, 0, 9};
    EXPECT_EQ(pool.forward(x, false).v, (std::vector<double>{3, 2}));
}

TEST(adam, first_step_moves_by_learning_rate) {
    Param p(2);
    p.value = {1.0, -1.0};
    Adam opt({&p}, 0.1);
    p.grad = {3.0, -0.001};
    opt.step();
    EXPECT_NEAR(p.value[0], 0.9, 1e-6);
    EXPECT_NEAR(p.value[1], -0.9, 1e-4);
}
