#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gt {

/// Row-major float matrix. Batches are stored one sample per row.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), values(r * c, fill) {}

    float& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    float operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    std::span<float> row(std::size_t r) { return {values.data() + r * cols, cols}; }
    std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

    bool operator==(const DenseMatrix&) const = default;
};

/// Affine layer y = x W + b, with W stored in_dim x out_dim.
struct DenseLayer {
    DenseMatrix weight;
    std::vector<float> bias;

    std::size_t in_dim() const { return weight.rows; }
    std::size_t out_dim() const { return weight.cols; }

    bool operator==(const DenseLayer&) const = default;
};

/// GELU on every hidden layer, identity on the last.
struct MlpParams {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
    std::size_t parameter_count() const;

    bool operator==(const MlpParams&) const = default;
};

/// Exact-erf GELU: 0.5 x (1 + erf(x / sqrt 2)).
float gelu(float x) noexcept;
/// d/dx gelu = Phi(x) + x phi(x).
float gelu_derivative(float x) noexcept;

/// Widths run input -> hidden... -> output. Weights uniform in
/// +-sqrt(6 / (fan_in + fan_out)) from `seed`; biases zero.
MlpParams init_mlp(std::span<const std::size_t> widths, std::uint64_t seed);

/// Zero-valued parameters with the same shapes as `like`.
MlpParams zeros_like(const MlpParams& like);

struct MlpCache {
    /// layer_inputs[l] is the batch fed into layer l.
    std::vector<DenseMatrix> layer_inputs;
    /// pre_activations[l] is x W + b of layer l, before GELU.
    std::vector<DenseMatrix> pre_activations;
};

struct ForwardResult {
    DenseMatrix output;
    MlpCache cache;
};

ForwardResult mlp_forward(const MlpParams& params, const DenseMatrix& input);

struct BackwardResult {
    MlpParams param_grads;
    DenseMatrix input_grad;
};

BackwardResult mlp_backward(const MlpParams& params, const MlpCache& cache, const DenseMatrix& output_grad);

/// Allocation-free single-sample evaluation. Produces exactly the same
/// floats as the corresponding row of mlp_forward.
class MlpEvaluator {
public:
    explicit MlpEvaluator(const MlpParams& params);

    void operator()(std::span<const float> input, std::span<float> output);

private:
    const MlpParams* params_;
    std::vector<float> a_;
    std::vector<float> b_;
};

struct LayerMoments {
    std::vector<double> weight;
    std::vector<double> bias;

    bool operator==(const LayerMoments&) const = default;
};

struct AdamState {
    std::vector<LayerMoments> first;
    std::vector<LayerMoments> second;
    std::uint64_t step_count = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    /// Zero moments shaped like `params`.
    static AdamState for_params(const MlpParams& params, double lr = 1e-3);

    bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads);

} // namespace gt
