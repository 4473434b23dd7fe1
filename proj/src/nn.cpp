#include "gt/nn.hpp"

#include <cmath>
#include <numbers>

#include "gt/error.hpp"
#include "gt/rng.hpp"

namespace gt {

namespace {

// y = b + x W for one sample. Shared by the batch and single-sample paths so
// both produce identical floats.
void affine_row(const DenseLayer& layer, const float* x, float* y) {
    const std::size_t in = layer.in_dim();
    const std::size_t out = layer.out_dim();
    const float* w = layer.weight.values.data();
    for (std::size_t o = 0; o < out; ++o) {
        y[o] = layer.bias[o];
    }
    for (std::size_t i = 0; i < in; ++i) {
        const float xi = x[i];
        const float* wi = w + i * out;
        for (std::size_t o = 0; o < out; ++o) {
            y[o] += xi * wi[o];
        }
    }
}

void check_shapes(const MlpParams& a, const MlpParams& b, const char* what) {
    if (a.layers.size() != b.layers.size()) {
        throw DimensionError(std::string(what) + ": layer count mismatch");
    }
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].weight.rows != b.layers[l].weight.rows || a.layers[l].weight.cols != b.layers[l].weight.cols ||
            a.layers[l].bias.size() != b.layers[l].bias.size()) {
            throw DimensionError(std::string(what) + ": shape mismatch at layer " + std::to_string(l));
        }
    }
}

} // namespace

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.weight.values.size() + layer.bias.size();
    }
    return n;
}

float gelu(float x) noexcept {
    const double xd = x;
    return static_cast<float>(0.5 * xd * (1.0 + std::erf(xd * std::numbers::sqrt2 / 2.0)));
}

float gelu_derivative(float x) noexcept {
    const double xd = x;
    const double cdf = 0.5 * (1.0 + std::erf(xd * std::numbers::sqrt2 / 2.0));
    const double pdf = std::exp(-0.5 * xd * xd) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
    return static_cast<float>(cdf + xd * pdf);
}

MlpParams init_mlp(std::span<const std::size_t> widths, std::uint64_t seed) {
    if (widths.size() < 2) {
        throw ValidationError("init_mlp: need at least input and output widths");
    }
    MlpParams params;
    SplitMix64 rng(seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t in = widths[l];
        const std::size_t out = widths[l + 1];
        if (in == 0 || out == 0) {
            throw ValidationError("init_mlp: zero layer width");
        }
        DenseLayer layer{DenseMatrix(in, out), std::vector<float>(out, 0.0f)};
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (auto& w : layer.weight.values) {
            w = static_cast<float>((2.0 * rng.uniform() - 1.0) * limit);
        }
        params.layers.push_back(std::move(layer));
    }
    return params;
}

MlpParams zeros_like(const MlpParams& like) {
    MlpParams z;
    z.layers.reserve(like.layers.size());
    for (const auto& layer : like.layers) {
        z.layers.push_back({DenseMatrix(layer.in_dim(), layer.out_dim()), std::vector<float>(layer.out_dim(), 0.0f)});
    }
    return z;
}

ForwardResult mlp_forward(const MlpParams& params, const DenseMatrix& input) {
    if (params.layers.empty()) {
        throw DimensionError("mlp_forward: empty network");
    }
    if (input.cols != params.input_dim()) {
        throw DimensionError("mlp_forward: input width " + std::to_string(input.cols) + " != " +
                             std::to_string(params.input_dim()));
    }
    ForwardResult result;
    auto& cache = result.cache;
    cache.layer_inputs.reserve(params.layers.size());
    cache.pre_activations.reserve(params.layers.size());

    DenseMatrix current = input;
    const std::size_t batch = input.rows;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        DenseMatrix pre(batch, layer.out_dim());
        for (std::size_t b = 0; b < batch; ++b) {
            affine_row(layer, current.row(b).data(), pre.row(b).data());
        }
        cache.layer_inputs.push_back(std::move(current));
        const bool hidden = l + 1 < params.layers.size();
        current = pre;
        if (hidden) {
            for (auto& v : current.values) {
                v = gelu(v);
            }
        }
        cache.pre_activations.push_back(std::move(pre));
    }
    result.output = std::move(current);
    return result;
}

BackwardResult mlp_backward(const MlpParams& params, const MlpCache& cache, const DenseMatrix& output_grad) {
    const std::size_t n_layers = params.layers.size();
    if (cache.layer_inputs.size() != n_layers || cache.pre_activations.size() != n_layers) {
        throw DimensionError("mlp_backward: cache does not match network depth");
    }
    const std::size_t batch = cache.layer_inputs.front().rows;
    if (output_grad.rows != batch || output_grad.cols != params.output_dim()) {
        throw DimensionError("mlp_backward: output gradient shape mismatch with cache");
    }

    BackwardResult result{zeros_like(params), {}};
    DenseMatrix delta = output_grad; // dL/d(pre-activation) of the current layer
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& layer = params.layers[l];
        const auto& x = cache.layer_inputs[l];
        auto& grad = result.param_grads.layers[l];
        const std::size_t in = layer.in_dim();
        const std::size_t out = layer.out_dim();
        if (x.cols != in || delta.cols != out) {
            throw DimensionError("mlp_backward: cache shape mismatch at layer " + std::to_string(l));
        }

        for (std::size_t b = 0; b < batch; ++b) {
            const float* xb = x.row(b).data();
            const float* db = delta.row(b).data();
            for (std::size_t i = 0; i < in; ++i) {
                const float xi = xb[i];
                float* gw = grad.weight.values.data() + i * out;
                for (std::size_t o = 0; o < out; ++o) {
                    gw[o] += xi * db[o];
                }
            }
            for (std::size_t o = 0; o < out; ++o) {
                grad.bias[o] += db[o];
            }
        }

        DenseMatrix input_grad(batch, in);
        const float* w = layer.weight.values.data();
        for (std::size_t b = 0; b < batch; ++b) {
            const float* db = delta.row(b).data();
            float* gb = input_grad.row(b).data();
            for (std::size_t i = 0; i < in; ++i) {
                const float* wi = w + i * out;
                float acc = 0.0f;
                for (std::size_t o = 0; o < out; ++o) {
                    acc += db[o] * wi[o];
                }
                gb[i] = acc;
            }
        }

        if (l > 0) {
            const auto& pre = cache.pre_activations[l - 1];
            for (std::size_t k = 0; k < input_grad.values.size(); ++k) {
                input_grad.values[k] *= gelu_derivative(pre.values[k]);
            }
        }
        delta = std::move(input_grad);
    }
    result.input_grad = std::move(delta);
    return result;
}

MlpEvaluator::MlpEvaluator(const MlpParams& params) : params_(&params) {
    std::size_t widest = params.input_dim();
    for (const auto& layer : params.layers) {
        widest = std::max(widest, layer.out_dim());
    }
    a_.resize(widest);
    b_.resize(widest);
}

void MlpEvaluator::operator()(std::span<const float> input, std::span<float> output) {
    const auto& layers = params_->layers;
    if (input.size() != params_->input_dim() || output.size() != params_->output_dim()) {
        throw DimensionError("MlpEvaluator: input/output width mismatch");
    }
    std::copy(input.begin(), input.end(), a_.begin());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        affine_row(layers[l], a_.data(), b_.data());
        const std::size_t out = layers[l].out_dim();
        if (l + 1 < layers.size()) {
            for (std::size_t o = 0; o < out; ++o) {
                b_[o] = gelu(b_[o]);
            }
        }
        std::swap(a_, b_);
    }
    std::copy_n(a_.begin(), output.size(), output.begin());
}

AdamState AdamState::for_params(const MlpParams& params, double lr) {
    AdamState state;
    state.lr = lr;
    for (const auto& layer : params.layers) {
        LayerMoments m{std::vector<double>(layer.weight.values.size(), 0.0), std::vector<double>(layer.bias.size(), 0.0)};
        state.first.push_back(m);
        state.second.push_back(std::move(m));
    }
    return state;
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads) {
    check_shapes(params, grads, "adam_step");
    if (state.first.size() != params.layers.size() || state.second.size() != params.layers.size()) {
        throw DimensionError("adam_step: moment buffers do not match parameters");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);

    auto update = [&](std::vector<float>& p, const std::vector<float>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        if (m.size() != p.size() || v.size() != p.size()) {
            throw DimensionError("adam_step: moment buffer shape mismatch");
        }
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double gk = g[k];
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * gk;
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * gk * gk;
            const double m_hat = m[k] / c1;
            const double v_hat = v[k] / c2;
            p[k] = static_cast<float>(p[k] - state.lr * m_hat / (std::sqrt(v_hat) + state.eps));
        }
    };

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        update(params.layers[l].weight.values, grads.layers[l].weight.values, state.first[l].weight,
               state.second[l].weight);
        update(params.layers[l].bias, grads.layers[l].bias, state.first[l].bias, state.second[l].bias);
    }
}

} // namespace gt
