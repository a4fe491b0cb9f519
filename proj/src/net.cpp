#include "skillplan/net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace skillplan::net {
namespace {

// tanh through exp: Eigen vectorises exp for doubles but not tanh.
void tanh_inplace(Eigen::MatrixXd& z) {
    auto a = z.array();
    a = 1.0 - 2.0 / ((2.0 * a).exp() + 1.0);
}

}  // namespace

NetParams::NetParams(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) {
        throw std::invalid_argument("a network needs at least an input and an output width");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        if (widths_[l] <= 0 || widths_[l + 1] <= 0) {
            throw std::invalid_argument("layer widths must be positive");
        }
        offsets_.push_back(total);
        total += static_cast<std::size_t>(widths_[l + 1]) * static_cast<std::size_t>(widths_[l] + 1);
    }
    values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
}

Eigen::Map<NetParams::RowMajor> NetParams::weight(std::size_t layer) {
    return {values_.data() + offsets_[layer], widths_[layer + 1], widths_[layer]};
}

Eigen::Map<const NetParams::RowMajor> NetParams::weight(std::size_t layer) const {
    return {values_.data() + offsets_[layer], widths_[layer + 1], widths_[layer]};
}

Eigen::Map<Eigen::VectorXd> NetParams::bias(std::size_t layer) {
    const std::size_t off = offsets_[layer] + static_cast<std::size_t>(widths_[layer + 1] * widths_[layer]);
    return {values_.data() + off, widths_[layer + 1]};
}

Eigen::Map<const Eigen::VectorXd> NetParams::bias(std::size_t layer) const {
    const std::size_t off = offsets_[layer] + static_cast<std::size_t>(widths_[layer + 1] * widths_[layer]);
    return {values_.data() + off, widths_[layer + 1]};
}

GradBuffer GradBuffer::zeros_like(const NetParams& params) {
    return GradBuffer{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.parameter_count()))};
}

bool GradBuffer::congruent_with(const NetParams& params) const {
    return static_cast<std::size_t>(values.size()) == params.parameter_count();
}

GradBuffer& GradBuffer::operator+=(const GradBuffer& other) {
    values += other.values;
    return *this;
}

std::vector<int> default_widths(int inputs, int outputs, int hidden_layers, int hidden_width) {
    std::vector<int> w;
    w.push_back(inputs);
    for (int i = 0; i < hidden_layers; ++i) {
        w.push_back(hidden_width);
    }
    w.push_back(outputs);
    return w;
}

NetParams init_xavier(const std::vector<int>& widths, std::uint64_t seed) {
    NetParams params(widths);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const double fan_in = widths[l];
        const double fan_out = widths[l + 1];
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / (fan_in + fan_out)));
        auto w = params.weight(l);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = normal(rng);
            }
        }
        params.bias(l).setZero();
    }
    return params;
}

Eigen::MatrixXd forward(const NetParams& params, const Eigen::MatrixXd& inputs, ForwardCache& cache) {
    if (inputs.rows() != params.input_width()) {
        throw std::invalid_argument("forward: input width mismatch");
    }
    if (!inputs.allFinite()) {
        throw std::invalid_argument("forward: non-finite input");
    }
    const std::size_t layers = params.layer_count();
    cache.activations.resize(layers + 1);
    cache.activations[0] = inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd& z = cache.activations[l + 1];
        z.noalias() = params.weight(l) * cache.activations[l];
        z.colwise() += params.bias(l);
        if (l + 1 < layers) {
            tanh_inplace(z);
        }
    }
    return cache.activations.back();
}

Eigen::MatrixXd forward(const NetParams& params, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != params.input_width()) {
        throw std::invalid_argument("forward: input width mismatch");
    }
    if (!inputs.allFinite()) {
        throw std::invalid_argument("forward: non-finite input");
    }
    const std::size_t layers = params.layer_count();
    Eigen::MatrixXd a = inputs;
    Eigen::MatrixXd z;
    for (std::size_t l = 0; l < layers; ++l) {
        z.noalias() = params.weight(l) * a;
        z.colwise() += params.bias(l);
        if (l + 1 < layers) {
            tanh_inplace(z);
        }
        a.swap(z);
    }
    return a;
}

void backward_accumulate(const NetParams& params, const ForwardCache& cache, const Eigen::MatrixXd& output_cotangent,
                         Eigen::Ref<Eigen::VectorXd> grad) {
    const std::size_t layers = params.layer_count();
    if (cache.activations.size() != layers + 1) {
        throw std::invalid_argument("backward: cache does not match the network");
    }
    if (output_cotangent.rows() != params.output_width() ||
        output_cotangent.cols() != cache.activations.back().cols()) {
        throw std::invalid_argument("backward: cotangent shape mismatch");
    }
    if (static_cast<std::size_t>(grad.size()) != params.parameter_count()) {
        throw std::invalid_argument("backward: gradient buffer shape mismatch");
    }
    // Temporary NetParams-shaped view over the gradient buffer.
    const std::vector<int>& w = params.widths();
    std::size_t offset = 0;
    std::vector<std::size_t> offsets(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        offsets[l] = offset;
        offset += static_cast<std::size_t>(w[l + 1]) * static_cast<std::size_t>(w[l] + 1);
    }

    Eigen::MatrixXd& delta = cache.delta;
    Eigen::MatrixXd& back = cache.scratch;
    delta = output_cotangent;
    for (std::size_t l = layers; l-- > 0;) {
        const Eigen::MatrixXd& a_in = cache.activations[l];
        Eigen::Map<NetParams::RowMajor> gw(grad.data() + offsets[l], w[l + 1], w[l]);
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets[l] + static_cast<std::size_t>(w[l + 1] * w[l]), w[l + 1]);
        gw.noalias() += delta * a_in.transpose();
        gb += delta.rowwise().sum();
        if (l > 0) {
            back.noalias() = params.weight(l).transpose() * delta;
            delta.resize(back.rows(), back.cols());
            delta.array() = back.array() * (1.0 - a_in.array().square());
        }
    }
}

GradBuffer backward(const NetParams& params, const ForwardCache& cache, const Eigen::MatrixXd& output_cotangent) {
    GradBuffer g = GradBuffer::zeros_like(params);
    backward_accumulate(params, cache, output_cotangent, g.values);
    return g;
}

GradBuffer backward(const NetParams& params, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& output_cotangent) {
    ForwardCache cache;
    forward(params, inputs, cache);
    return backward(params, cache, output_cotangent);
}

}  // namespace skillplan::net
