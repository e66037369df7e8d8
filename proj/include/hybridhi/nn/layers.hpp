#pragma once

#include "hybridhi/nn/tensor.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace hybridhi::nn {

struct Param {
    std::vector<double> value;
    std::vector<double> grad;

    explicit Param(std::size_t n = 0) : value(n, 0.0), grad(n, 0.0) {}
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// A differentiable layer. backward() consumes the gradient w.r.t. the
// output of the most recent forward() and accumulates parameter gradients.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& in, bool training) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<Param*> params() { return {}; }
    // Non-trainable persistent state (batch-norm running statistics).
    virtual std::vector<std::vector<double>*> buffers() { return {}; }
    virtual nlohmann::json describe() const = 0;
};

// 1-D convolution with zero "same" padding (left = (k-1)/2).
class Conv1d final : public Layer {
public:
    Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::mt19937_64& rng);
    Tensor forward(const Tensor& in, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }
    nlohmann::json describe() const override;

    std::size_t in_channels() const { return in_; }
    std::size_t out_channels() const { return out_; }

private:
    void im2col(const double* src, std::size_t length, double* cols) const;
    std::size_t in_, out_, kernel_, left_;
    Param weight_;  // [out, in * kernel]
    Param bias_;
    Tensor input_;
};

// Affine map on [n, in, 1] features.
class Dense final : public Layer {
public:
    Dense(std::size_t in_features, std::size_t out_features, std::mt19937_64& rng);
    Tensor forward(const Tensor& in, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }
    nlohmann::json describe() const override;

private:
    std::size_t in_, out_;
    Param weight_;  // [out, in]
    Param bias_;
    Tensor input_;
};

class ReLU final : public Layer {
public:
    Tensor forward(const Tensor& in, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    nlohmann::json describe() const override { return {{"type", "relu"}}; }

private:
    Tensor output_;
};

// [n, c, l] -> [n, c * l, 1]
class Flatten final : public Layer {
public:
    Tensor forward(const Tensor& in, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    nlohmann::json describe() const override { return {{"type", "flatten"}}; }

private:
    std::size_t c_ = 0, l_ = 0;
};

// Zeroes padded time steps; the mask ([n, l], 1 = real step) is set before
// each forward pass and an empty mask passes everything through.
class TimeMask final : public Layer {
public:
    void set(std::vector<std::uint8_t> mask) { mask_ = std::move(mask); }
    Tensor forward(const Tensor& in, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    nlohmann::json describe() const override { return {{"type", "time_mask"}}; }

private:
    Tensor apply(Tensor t) const;
    std::vector<std::uint8_t> mask_;
};

// Non-overlapping max pooling; trailing odd steps are dropped.
class MaxPool1d final : public Layer {
public:
    explicit MaxPool1d(std::size_t size) : size_(size) {}
    Tensor forward(const Tensor& in, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    nlohmann::json describe() const override { return {{"type", "maxpool"}, {"size", size_}}; }

private:
    std::size_t size_;
    std::size_t in_l_ = 0;
    std::vector<std::size_t> argmax_;
};

// Per-channel normalization over batch and time.
class BatchNorm1d final : public Layer {
public:
    explicit BatchNorm1d(std::size_t channels, double momentum = 0.1, double eps = 1e-5);
    Tensor forward(const Tensor& in, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Param*> params() override { return {&gamma_, &beta_}; }
    std::vector<std::vector<double>*> buffers() override { return {&running_mean_, &running_var_}; }
    nlohmann::json describe() const override;

private:
    std::size_t channels_;
    double momentum_, eps_;
    Param gamma_, beta_;
    std::vector<double> running_mean_, running_var_;
    Tensor xhat_;
    std::vector<double> inv_std_;
};

class Sequential {
public:
    Sequential() = default;
    Sequential(Sequential&&) = default;
    Sequential& operator=(Sequential&&) = default;

    template <class L, class... Args>
    L& add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *layer;
        layers_.push_back(std::move(layer));
        return ref;
    }

    Tensor forward(const Tensor& in, bool training);
    Tensor backward(const Tensor& grad_out);
    std::vector<Param*> params();
    std::vector<std::vector<double>*> buffers();
    nlohmann::json describe() const;
    std::size_t size() const { return layers_.size(); }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Adaptive-moment optimizer over a fixed parameter list.
class Adam {
public:
    explicit Adam(std::vector<Param*> params, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);
    void zero_grad();
    void step();
    double learning_rate() const { return lr_; }

private:
    std::vector<Param*> params_;
    double lr_, beta1_, beta2_, eps_;
    std::vector<std::vector<double>> m_, v_;
    std::int64_t t_ = 0;
};

}  // namespace hybridhi::nn
