#include "hybridhi/nn/layers.hpp"

#include "hybridhi/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace hybridhi::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Fan-in scaled uniform initialization, bound sqrt(6 / fan_in).
void init_uniform(Param& p, std::size_t fan_in, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : p.value) w = dist(rng);
}

}  // namespace

Conv1d::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::mt19937_64& rng)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      left_((kernel - 1) / 2),
      weight_(out_channels * in_channels * kernel),
      bias_(out_channels) {
    if (in_ == 0 || out_ == 0 || kernel_ == 0) throw ShapeError("Conv1d: dimensions must be positive");
    init_uniform(weight_, in_ * kernel_, rng);
}

void Conv1d::im2col(const double* src, std::size_t length, double* cols) const {
    for (std::size_t ci = 0; ci < in_; ++ci)
        for (std::size_t k = 0; k < kernel_; ++k) {
            double* row = cols + (ci * kernel_ + k) * length;
            const double* x = src + ci * length;
            for (std::size_t s = 0; s < length; ++s) {
                const long pos = static_cast<long>(s + k) - static_cast<long>(left_);
                row[s] = (pos >= 0 && pos < static_cast<long>(length)) ? x[pos] : 0.0;
            }
        }
}

Tensor Conv1d::forward(const Tensor& in, bool /*training*/) {
    if (in.c != in_) throw ShapeError("Conv1d: expected " + std::to_string(in_) + " channels, got " + std::to_string(in.c));
    input_ = in;
    const std::size_t L = in.l;
    Tensor out(in.n, out_, L);
    std::vector<double> cols(in_ * kernel_ * L);
    const ConstMapMat W(weight_.value.data(), static_cast<long>(out_), static_cast<long>(in_ * kernel_));
    const Eigen::Map<const Eigen::VectorXd> b(bias_.value.data(), static_cast<long>(out_));
    for (std::size_t i = 0; i < in.n; ++i) {
        im2col(in.sample(i), L, cols.data());
        const ConstMapMat C(cols.data(), static_cast<long>(in_ * kernel_), static_cast<long>(L));
        MapMat Y(out.sample(i), static_cast<long>(out_), static_cast<long>(L));
        Y.noalias() = W * C;
        Y.colwise() += b;
    }
    return out;
}

Tensor Conv1d::backward(const Tensor& grad_out) {
    const std::size_t L = input_.l;
    Tensor grad_in(input_.n, in_, L);
    std::vector<double> cols(in_ * kernel_ * L), dcols(in_ * kernel_ * L);
    const ConstMapMat W(weight_.value.data(), static_cast<long>(out_), static_cast<long>(in_ * kernel_));
    MapMat dW(weight_.grad.data(), static_cast<long>(out_), static_cast<long>(in_ * kernel_));
    Eigen::Map<Eigen::VectorXd> db(bias_.grad.data(), static_cast<long>(out_));
    for (std::size_t i = 0; i < input_.n; ++i) {
        im2col(input_.sample(i), L, cols.data());
        const ConstMapMat C(cols.data(), static_cast<long>(in_ * kernel_), static_cast<long>(L));
        const ConstMapMat G(grad_out.sample(i), static_cast<long>(out_), static_cast<long>(L));
        dW.noalias() += G * C.transpose();
        db += G.rowwise().sum();
        MapMat dC(dcols.data(), static_cast<long>(in_ * kernel_), static_cast<long>(L));
        dC.noalias() = W.transpose() * G;
        double* dx = grad_in.sample(i);
        for (std::size_t ci = 0; ci < in_; ++ci)
            for (std::size_t k = 0; k < kernel_; ++k) {
                const double* row = dcols.data() + (ci * kernel_ + k) * L;
                double* g = dx + ci * L;
                for (std::size_t s = 0; s < L; ++s) {
                    const long pos = static_cast<long>(s + k) - static_cast<long>(left_);
                    if (pos >= 0 && pos < static_cast<long>(L)) g[pos] += row[s];
                }
            }
    }
    return grad_in;
}

nlohmann::json Conv1d::describe() const {
    return {{"type", "conv1d"}, {"in", in_}, {"out", out_}, {"kernel", kernel_}};
}

Dense::Dense(std::size_t in_features, std::size_t out_features, std::mt19937_64& rng)
    : in_(in_features), out_(out_features), weight_(in_features * out_features), bias_(out_features) {
    if (in_ == 0 || out_ == 0) throw ShapeError("Dense: dimensions must be positive");
    init_uniform(weight_, in_, rng);
}

Tensor Dense::forward(const Tensor& in, bool /*training*/) {
    if (in.c * in.l != in_) throw ShapeError("Dense: expected " + std::to_string(in_) + " features, got " + std::to_string(in.c * in.l));
    input_ = in;
    Tensor out(in.n, out_, 1);
    const ConstMapMat W(weight_.value.data(), static_cast<long>(out_), static_cast<long>(in_));
    const ConstMapMat X(in.v.data(), static_cast<long>(in.n), static_cast<long>(in_));
    MapMat Y(out.v.data(), static_cast<long>(in.n), static_cast<long>(out_));
    Y.noalias() = X * W.transpose();
    Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias_.value.data(), static_cast<long>(out_));
    return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
    Tensor grad_in(input_.n, input_.c, input_.l);
    const ConstMapMat W(weight_.value.data(), static_cast<long>(out_), static_cast<long>(in_));
    const ConstMapMat X(input_.v.data(), static_cast<long>(input_.n), static_cast<long>(in_));
    const ConstMapMat G(grad_out.v.data(), static_cast<long>(grad_out.n), static_cast<long>(out_));
    MapMat dW(weight_.grad.data(), static_cast<long>(out_), static_cast<long>(in_));
    dW.noalias() += G.transpose() * X;
    Eigen::Map<Eigen::RowVectorXd>(bias_.grad.data(), static_cast<long>(out_)) += G.colwise().sum();
    MapMat dX(grad_in.v.data(), static_cast<long>(input_.n), static_cast<long>(in_));
    dX.noalias() = G * W;
    return grad_in;
}

nlohmann::json Dense::describe() const { return {{"type", "dense"}, {"in", in_}, {"out", out_}}; }

Tensor ReLU::forward(const Tensor& in, bool /*training*/) {
    output_ = in;
    for (auto& x : output_.v) x = x > 0.0 ? x : 0.0;
    return output_;
}

Tensor ReLU::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.v.size(); ++i)
        if (output_.v[i] <= 0.0) g.v[i] = 0.0;
    return g;
}

Tensor TimeMask::apply(Tensor t) const {
    if (mask_.empty()) return t;
    if (mask_.size() != t.n * t.l) throw ShapeError("TimeMask: mask does not match the batch");
    for (std::size_t i = 0; i < t.n; ++i)
        for (std::size_t c = 0; c < t.c; ++c)
            for (std::size_t s = 0; s < t.l; ++s)
                if (!mask_[i * t.l + s]) t.at(i, c, s) = 0.0;
    return t;
}

Tensor TimeMask::forward(const Tensor& in, bool /*training*/) { return apply(in); }

Tensor TimeMask::backward(const Tensor& grad_out) { return apply(grad_out); }

Tensor Flatten::forward(const Tensor& in, bool /*training*/) {
    c_ = in.c;
    l_ = in.l;
    Tensor out = in;
    out.c = in.c * in.l;
    out.l = 1;
    return out;
}

Tensor Flatten::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    g.c = c_;
    g.l = l_;
    return g;
}

Tensor MaxPool1d::forward(const Tensor& in, bool /*training*/) {
    in_l_ = in.l;
    const std::size_t L = in.l / size_;
    if (L == 0) throw ShapeError("MaxPool1d: input length " + std::to_string(in.l) + " shorter than pool size");
    Tensor out(in.n, in.c, L);
    argmax_.assign(out.size(), 0);
    for (std::size_t i = 0; i < in.n; ++i)
        for (std::size_t ch = 0; ch < in.c; ++ch)
            for (std::size_t s = 0; s < L; ++s) {
                std::size_t best = s * size_;
                for (std::size_t k = 1; k < size_; ++k)
                    if (in.at(i, ch, s * size_ + k) > in.at(i, ch, best)) best = s * size_ + k;
                out.at(i, ch, s) = in.at(i, ch, best);
                argmax_[(i * in.c + ch) * L + s] = best;
            }
    return out;
}

Tensor MaxPool1d::backward(const Tensor& grad_out) {
    Tensor g(grad_out.n, grad_out.c, in_l_);
    for (std::size_t i = 0; i < grad_out.n; ++i)
        for (std::size_t ch = 0; ch < grad_out.c; ++ch)
            for (std::size_t s = 0; s < grad_out.l; ++s)
                g.at(i, ch, argmax_[(i * grad_out.c + ch) * grad_out.l + s]) += grad_out.at(i, ch, s);
    return g;
}

BatchNorm1d::BatchNorm1d(std::size_t channels, double momentum, double eps)
    : channels_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_(channels),
      beta_(channels),
      running_mean_(channels, 0.0),
      running_var_(channels, 1.0) {
    std::fill(gamma_.value.begin(), gamma_.value.end(), 1.0);
}

Tensor BatchNorm1d::forward(const Tensor& in, bool training) {
    if (in.c != channels_) throw ShapeError("BatchNorm1d: channel mismatch");
    Tensor out(in.n, in.c, in.l);
    xhat_ = Tensor(in.n, in.c, in.l);
    inv_std_.assign(channels_, 0.0);
    const double count = static_cast<double>(in.n * in.l);
    for (std::size_t ch = 0; ch < channels_; ++ch) {
        double mean = running_mean_[ch], var = running_var_[ch];
        if (training) {
            double s = 0.0;
            for (std::size_t i = 0; i < in.n; ++i)
                for (std::size_t k = 0; k < in.l; ++k) s += in.at(i, ch, k);
            mean = s / count;
            double ss = 0.0;
            for (std::size_t i = 0; i < in.n; ++i)
                for (std::size_t k = 0; k < in.l; ++k) ss += (in.at(i, ch, k) - mean) * (in.at(i, ch, k) - mean);
            var = ss / count;
            const double unbiased = count > 1 ? ss / (count - 1) : var;
            running_mean_[ch] = (1 - momentum_) * running_mean_[ch] + momentum_ * mean;
            running_var_[ch] = (1 - momentum_) * running_var_[ch] + momentum_ * unbiased;
        }
        const double inv = 1.0 / std::sqrt(var + eps_);
        inv_std_[ch] = inv;
        for (std::size_t i = 0; i < in.n; ++i)
            for (std::size_t k = 0; k < in.l; ++k) {
                const double xh = (in.at(i, ch, k) - mean) * inv;
                xhat_.at(i, ch, k) = xh;
                out.at(i, ch, k) = gamma_.value[ch] * xh + beta_.value[ch];
            }
    }
    return out;
}

Tensor BatchNorm1d::backward(const Tensor& grad_out) {
    Tensor g(grad_out.n, grad_out.c, grad_out.l);
    const double count = static_cast<double>(grad_out.n * grad_out.l);
    for (std::size_t ch = 0; ch < channels_; ++ch) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t i = 0; i < grad_out.n; ++i)
            for (std::size_t k = 0; k < grad_out.l; ++k) {
                sum_g += grad_out.at(i, ch, k);
                sum_gx += grad_out.at(i, ch, k) * xhat_.at(i, ch, k);
            }
        gamma_.grad[ch] += sum_gx;
        beta_.grad[ch] += sum_g;
        const double scale = gamma_.value[ch] * inv_std_[ch] / count;
        for (std::size_t i = 0; i < grad_out.n; ++i)
            for (std::size_t k = 0; k < grad_out.l; ++k)
                g.at(i, ch, k) = scale * (count * grad_out.at(i, ch, k) - sum_g - xhat_.at(i, ch, k) * sum_gx);
    }
    return g;
}

nlohmann::json BatchNorm1d::describe() const {
    return {{"type", "batchnorm"}, {"channels", channels_}, {"momentum", momentum_}, {"eps", eps_}};
}

Tensor Sequential::forward(const Tensor& in, bool training) {
    Tensor x = in;
    for (auto& layer : layers_) x = layer->forward(x, training);
    return x;
}

Tensor Sequential::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<Param*> Sequential::params() {
    std::vector<Param*> out;
    for (auto& layer : layers_)
        for (Param* p : layer->params()) out.push_back(p);
    return out;
}

std::vector<std::vector<double>*> Sequential::buffers() {
    std::vector<std::vector<double>*> out;
    for (auto& layer : layers_)
        for (auto* b : layer->buffers()) out.push_back(b);
    return out;
}

nlohmann::json Sequential::describe() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& layer : layers_) arr.push_back(layer->describe());
    return arr;
}

Adam::Adam(std::vector<Param*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const Param* p : params_) {
        m_.emplace_back(p->value.size(), 0.0);
        v_.emplace_back(p->value.size(), 0.0);
    }
}

void Adam::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

void Adam::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Param& p = *params_[i];
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            const double g = p.grad[j];
            m[j] = beta1_ * m[j] + (1 - beta1_) * g;
            v[j] = beta2_ * v[j] + (1 - beta2_) * g * g;
            p.value[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
        }
    }
}

}  // namespace hybridhi::nn
