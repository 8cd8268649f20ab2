#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "trafficpinn/errors.hpp"

namespace tpinn {

// Squashing applied after the affine output layer.
enum class Head { sigmoid, identity };

struct MlpShape {
    int input_dim = 2;
    int width = 32;
    int hidden_layers = 2;
    int output_dim = 1;
};

template <typename Scalar>
struct DenseLayer {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weight; // out x in
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;
};

// Feedforward network: tanh on every hidden layer, affine output layer followed
// by the head. Input coordinate 0 is time, coordinate 1 is space.
template <typename Scalar>
class Mlp {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Mlp() = default;
    Mlp(std::vector<DenseLayer<Scalar>> layers, Head head) : layers_(std::move(layers)), head_(head) { validate(); }

    static Mlp zeros(const MlpShape& shape, Head head) {
        if (shape.input_dim < 1 || shape.output_dim < 1 || shape.width < 1 || shape.hidden_layers < 0)
            throw ConfigError("invalid network shape");
        std::vector<DenseLayer<Scalar>> layers;
        int fan_in = shape.input_dim;
        for (int l = 0; l <= shape.hidden_layers; ++l) {
            const int fan_out = l == shape.hidden_layers ? shape.output_dim : shape.width;
            layers.push_back({Matrix::Zero(fan_out, fan_in), Vector::Zero(fan_out)});
            fan_in = fan_out;
        }
        return Mlp(std::move(layers), head);
    }

    Mlp zeros_like() const {
        Mlp out = *this;
        for (auto& layer : out.layers_) {
            layer.weight.setZero();
            layer.bias.setZero();
        }
        return out;
    }

    void validate() const {
        if (layers_.empty()) throw ConfigError("network needs at least one layer");
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& layer = layers_[l];
            if (layer.bias.size() != layer.weight.rows()) throw ConfigError("bias size does not match weight rows");
            if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows())
                throw ConfigError("layer shapes do not chain");
            if (!layer.weight.allFinite() || !layer.bias.allFinite()) throw NumericalError("non-finite network parameter");
        }
    }

    Eigen::Index input_dim() const { return layers_.front().weight.cols(); }
    Eigen::Index output_dim() const { return layers_.back().weight.rows(); }
    Head head() const { return head_; }
    const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }
    std::vector<DenseLayer<Scalar>>& layers() { return layers_; }

    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
        return n;
    }

    // Parameters in layer order; each weight matrix row-major, then its bias.
    Vector flatten() const {
        Vector out(parameter_count());
        Eigen::Index k = 0;
        for (const auto& layer : layers_) {
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out[k++] = layer.weight(r, c);
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out[k++] = layer.bias[r];
        }
        return out;
    }

    template <typename Derived>
    void assign(const Eigen::MatrixBase<Derived>& flat) {
        if (flat.size() != parameter_count()) throw ConfigError("flat parameter size mismatch");
        Eigen::Index k = 0;
        for (auto& layer : layers_) {
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat[k++];
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = flat[k++];
        }
    }

    bool operator==(const Mlp& other) const {
        if (head_ != other.head_ || layers_.size() != other.layers_.size()) return false;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& a = layers_[l];
            const auto& b = other.layers_[l];
            if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols()) return false;
            if (a.weight != b.weight || a.bias != b.bias) return false;
        }
        return true;
    }

private:
    std::vector<DenseLayer<Scalar>> layers_;
    Head head_ = Head::identity;
};

using MlpParams = Mlp<double>;

namespace detail {

// Activation value and its first three derivatives, elementwise.
template <typename Scalar>
struct ActivationDerivs {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Array f, d1, d2, d3;
};

enum class Activation { tanh, sigmoid, identity };

// Writes into `out`, reusing its storage when the shapes are unchanged.
template <typename Scalar>
void activate_into(const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z, Activation kind, bool need_higher,
                   ActivationDerivs<Scalar>& out) {
    switch (kind) {
    case Activation::tanh:
        out.f = z.tanh();
        out.d1 = Scalar(1) - out.f.square();
        if (need_higher) {
            out.d2 = Scalar(-2) * out.f * out.d1;
            out.d3 = Scalar(-2) * out.d1.square() + Scalar(4) * out.f.square() * out.d1;
        }
        break;
    case Activation::sigmoid:
        out.f = Scalar(1) / (Scalar(1) + (-z).exp());
        out.d1 = out.f * (Scalar(1) - out.f);
        if (need_higher) {
            out.d2 = out.d1 * (Scalar(1) - Scalar(2) * out.f);
            out.d3 = out.d2 * (Scalar(1) - Scalar(2) * out.f) - Scalar(2) * out.d1.square();
        }
        break;
    case Activation::identity:
        out.f = z;
        out.d1.setOnes(z.rows(), z.cols());
        if (need_higher) {
            out.d2.setZero(z.rows(), z.cols());
            out.d3.setZero(z.rows(), z.cols());
        }
        break;
    }
}

template <typename Scalar>
ActivationDerivs<Scalar> activate(const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z, Activation kind,
                                  bool need_higher) {
    ActivationDerivs<Scalar> out;
    activate_into(z, kind, need_higher, out);
    return out;
}

inline Activation head_activation(Head h) { return h == Head::sigmoid ? Activation::sigmoid : Activation::identity; }

} // namespace detail

// Directional derivative channels carried through the network for a batch.
// `dt` and `dx` are first derivatives along the seed directions; `dxx` is the
// second derivative along the x seed (requires dx).
struct JetChannels {
    bool dt = false;
    bool dx = false;
    bool dxx = false;
};

// Outputs (or output adjoints) of a scalar-output network over a batch.
template <typename Scalar>
struct JetBatch {
    using RowArray = Eigen::Array<Scalar, 1, Eigen::Dynamic>;
    RowArray value, d_t, d_x, d_xx;
};

// Records one batched forward pass with derivative channels so that
// reverse-mode gradients of any function of (value, d_t, d_x, d_xx) can be
// pulled back onto the parameters.
template <typename Scalar>
class JetTape {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    // inputs: input_dim x B. seed_t / seed_x: derivative of the input vector with
    // respect to the physical t / x (only read when the channel is enabled).
    JetBatch<Scalar> forward(const Mlp<Scalar>& net, const Matrix& inputs, const Vector& seed_t, const Vector& seed_x,
                             JetChannels channels) {
        if (inputs.rows() != net.input_dim()) throw ConfigError("network input dimension mismatch");
        if (net.output_dim() != 1) throw ConfigError("jet tape requires a scalar-output network");
        if (channels.dxx && !channels.dx) throw ConfigError("second derivative channel requires dx");
        channels_ = channels;
        seed_t_ = seed_t;
        seed_x_ = seed_x;
        inputs_ = inputs;
        const Eigen::Index batch = inputs.cols();
        const auto& layers = net.layers();
        const std::size_t n_layers = layers.size();
        cache_.resize(n_layers);

        for (std::size_t l = 0; l < n_layers; ++l) {
            const auto& W = layers[l].weight;
            auto& c = cache_[l];
            if (l == 0) {
                c.z.noalias() = W * inputs_;
                if (channels.dt) c.zt = (W * seed_t).replicate(1, batch);
                if (channels.dx) c.zx = (W * seed_x).replicate(1, batch);
                if (channels.dxx) c.zxx.setZero(W.rows(), batch);
            } else {
                const auto& p = cache_[l - 1];
                c.z.noalias() = W * p.act.f.matrix();
                if (channels.dt) c.zt.noalias() = W * p.ht;
                if (channels.dx) c.zx.noalias() = W * p.hx;
                if (channels.dxx) c.zxx.noalias() = W * p.hxx;
            }
            c.z.colwise() += layers[l].bias;

            const auto kind = l + 1 == n_layers ? detail::head_activation(net.head()) : detail::Activation::tanh;
            detail::activate_into<Scalar>(c.z.array(), kind, channels.dt || channels.dx, c.act);
            if (l + 1 < n_layers) {
                if (channels.dt) c.ht = (c.act.d1 * c.zt.array()).matrix();
                if (channels.dx) c.hx = (c.act.d1 * c.zx.array()).matrix();
                if (channels.dxx) c.hxx = (c.act.d2 * c.zx.array().square() + c.act.d1 * c.zxx.array()).matrix();
            }
        }
        const auto& last = cache_.back();
        JetBatch<Scalar> out;
        out.value = last.act.f.row(0);
        if (channels.dt) out.d_t = last.act.d1.row(0) * last.zt.array().row(0);
        if (channels.dx) out.d_x = last.act.d1.row(0) * last.zx.array().row(0);
        if (channels.dxx)
            out.d_xx = last.act.d2.row(0) * last.zx.array().row(0).square() + last.act.d1.row(0) * last.zxx.array().row(0);
        return out;
    }

    // Accumulates d(loss)/d(params) into `grad` (same shape as the taped net) given
    // adjoints of the recorded outputs. Channels disabled in the forward pass may
    // be absent from the adjoint; enabled ones must be supplied. Optionally
    // returns the adjoint of the input values.
    void backward(const Mlp<Scalar>& net, const JetBatch<Scalar>& adjoint, Mlp<Scalar>& grad,
                  Matrix* input_adjoint = nullptr) const {
        const auto& layers = net.layers();
        auto& glayers = grad.layers();
        const std::size_t n_layers = layers.size();

        Array hb = adjoint.value;
        Array htb, hxb, hxxb;
        if (channels_.dt) htb = adjoint.d_t;
        if (channels_.dx) hxb = adjoint.d_x;
        if (channels_.dxx) hxxb = adjoint.d_xx;
        for (std::size_t li = n_layers; li-- > 0;) {
            const auto& c = cache_[li];
            const auto& a = c.act;
            Array zb = hb * a.d1;
            Array ztb, zxb, zxxb;
            if (channels_.dt) {
                zb += htb * a.d2 * c.zt.array();
                ztb = htb * a.d1;
            }
            if (channels_.dx) {
                zb += hxb * a.d2 * c.zx.array();
                zxb = hxb * a.d1;
            }
            if (channels_.dxx) {
                zb += hxxb * (a.d3 * c.zx.array().square() + a.d2 * c.zxx.array());
                zxb += Scalar(2) * hxxb * a.d2 * c.zx.array();
                zxxb = hxxb * a.d1;
            }

            auto& gW = glayers[li].weight;
            glayers[li].bias += zb.rowwise().sum().matrix();
            if (li == 0) {
                gW.noalias() += zb.matrix() * inputs_.transpose();
                if (channels_.dt) gW.noalias() += ztb.rowwise().sum().matrix() * seed_t_.transpose();
                if (channels_.dx) gW.noalias() += zxb.rowwise().sum().matrix() * seed_x_.transpose();
                if (input_adjoint) *input_adjoint = layers[0].weight.transpose() * zb.matrix();
                break;
            }
            const auto& p = cache_[li - 1];
            gW.noalias() += zb.matrix() * p.act.f.matrix().transpose();
            if (channels_.dt) gW.noalias() += ztb.matrix() * p.ht.transpose();
            if (channels_.dx) gW.noalias() += zxb.matrix() * p.hx.transpose();
            if (channels_.dxx) gW.noalias() += zxxb.matrix() * p.hxx.transpose();

            const auto Wt = layers[li].weight.transpose();
            hb = (Wt * zb.matrix()).array();
            if (channels_.dt) htb = (Wt * ztb.matrix()).array();
            if (channels_.dx) hxb = (Wt * zxb.matrix()).array();
            if (channels_.dxx) hxxb = (Wt * zxxb.matrix()).array();
        }
    }

private:
    struct LayerCache {
        Matrix z, zt, zx, zxx; // pre-activation value and channels
        Matrix ht, hx, hxx;    // post-activation channels (hidden layers only)
        detail::ActivationDerivs<Scalar> act;
    };

    JetChannels channels_;
    Vector seed_t_, seed_x_;
    Matrix inputs_;
    std::vector<LayerCache> cache_;
};

// Plain batched evaluation: inputs input_dim x B -> outputs output_dim x B.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> forward(const Mlp<Scalar>& net,
                                                             const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& inputs) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (inputs.rows() != net.input_dim()) throw ConfigError("network input dimension mismatch");
    Matrix h = inputs;
    const auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Matrix z = layers[l].weight * h;
        z.colwise() += layers[l].bias;
        const auto kind = l + 1 == layers.size() ? detail::head_activation(net.head()) : detail::Activation::tanh;
        h = detail::activate<Scalar>(z.array(), kind, false).f.matrix();
    }
    return h;
}

// Single-point convenience for scalar-output networks.
template <typename Scalar>
Scalar forward_scalar(const Mlp<Scalar>& net, Scalar in0, Scalar in1) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x(2, 1);
    x << in0, in1;
    return forward(net, x)(0, 0);
}

// Uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpParams xavier_init(const MlpShape& shape, Head head, std::uint64_t seed);

// Adds W1[:, 0] * delta_s to the first-layer bias (time is input coordinate 0).
MlpParams shift_time_input(const MlpParams& params, double delta_s);

// Text checkpoint with layer shapes and row-major values; bit-exact round trip.
void write_checkpoint(std::ostream& out, const MlpParams& params);
MlpParams read_checkpoint(std::istream& in);

} // namespace tpinn
