#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace skillplan::net {

/// Parameters of a fully connected tanh network with an identity output
/// layer. All weights and biases live in one flat vector so optimizers can
/// treat the network as a point in R^n; layer views map into it.
///
/// Layout per layer l (row-major weights, then bias):
///   W_l : widths[l+1] x widths[l]
///   b_l : widths[l+1]
class NetParams {
public:
    NetParams() = default;
    explicit NetParams(std::vector<int> widths);

    const std::vector<int>& widths() const { return widths_; }
    std::size_t layer_count() const { return widths_.empty() ? 0 : widths_.size() - 1; }
    int input_width() const { return widths_.front(); }
    int output_width() const { return widths_.back(); }
    std::size_t parameter_count() const { return static_cast<std::size_t>(values_.size()); }

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMajor> weight(std::size_t layer);
    Eigen::Map<const RowMajor> weight(std::size_t layer) const;
    Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

    Eigen::VectorXd& values() { return values_; }
    const Eigen::VectorXd& values() const { return values_; }

private:
    std::vector<int> widths_;
    std::vector<std::size_t> offsets_;
    Eigen::VectorXd values_;
};

/// Accumulated loss gradient, congruent with a NetParams layout.
struct GradBuffer {
    Eigen::VectorXd values;

    static GradBuffer zeros_like(const NetParams& params);
    bool congruent_with(const NetParams& params) const;
    GradBuffer& operator+=(const GradBuffer& other);
};

/// Hidden-layer widths of the default skill network: 8 layers of 40 units.
std::vector<int> default_widths(int inputs, int outputs, int hidden_layers = 8, int hidden_width = 40);

/// Xavier/Glorot normal initialisation: W ~ N(0, 2/(fan_in+fan_out)), b = 0.
NetParams init_xavier(const std::vector<int>& widths, std::uint64_t seed);

/// Activations of each layer, kept for the backward pass. Samples are columns.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations;  // activations[0] is the input
    // Backward-pass scratch, kept so repeated passes of one batch size reuse
    // their buffers.
    mutable Eigen::MatrixXd delta;
    mutable Eigen::MatrixXd scratch;
};

/// Batched forward pass; inputs are (input_width x batch). Throws on
/// non-finite inputs or a width mismatch.
Eigen::MatrixXd forward(const NetParams& params, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd forward(const NetParams& params, const Eigen::MatrixXd& inputs, ForwardCache& cache);

/// Reverse-mode gradient of <cotangent, forward(inputs)> with respect to
/// every parameter, summed over the batch.
GradBuffer backward(const NetParams& params, const ForwardCache& cache, const Eigen::MatrixXd& output_cotangent);
GradBuffer backward(const NetParams& params, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& output_cotangent);

/// Adds the gradient into `grad` (avoids an allocation per call).
void backward_accumulate(const NetParams& params, const ForwardCache& cache, const Eigen::MatrixXd& output_cotangent,
                         Eigen::Ref<Eigen::VectorXd> grad);

}  // namespace skillplan::net
