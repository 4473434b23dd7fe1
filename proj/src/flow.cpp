#include "gt/flow.hpp"

#include <cmath>

#include "gt/error.hpp"

namespace gt {

std::vector<float> FlowModel::normalize_cond(std::span<const float> obs) const {
    if (obs.size() != cond_dim) {
        throw DimensionError("observation width " + std::to_string(obs.size()) + " != model cond_dim " +
                             std::to_string(cond_dim));
    }
    std::vector<float> out(cond_dim);
    for (std::size_t i = 0; i < cond_dim; ++i) {
        out[i] = (obs[i] - cond_offset[i]) / cond_scale[i];
    }
    return out;
}

void FlowModel::validate() const {
    if (net.input_dim() != chunk_dim + cond_dim + 1) {
        throw DimensionError("flow model: network input width must be D + C + 1");
    }
    if (net.output_dim() != chunk_dim) {
        throw DimensionError("flow model: network output width must be D");
    }
    if (cond_offset.size() != cond_dim || cond_scale.size() != cond_dim) {
        throw DimensionError("flow model: normalization stats must have C entries");
    }
    if (action_horizon * action_dim != chunk_dim) {
        throw DimensionError("flow model: action_horizon * action_dim must equal D");
    }
}

CheckpointTrailer FlowModel::trailer() const {
    CheckpointTrailer t;
    t.chunk_dim = static_cast<std::uint32_t>(chunk_dim);
    t.cond_dim = static_cast<std::uint32_t>(cond_dim);
    t.action_horizon = static_cast<std::uint32_t>(action_horizon);
    t.action_dim = static_cast<std::uint32_t>(action_dim);
    t.default_num_steps = static_cast<std::uint32_t>(default_num_steps);
    t.cond_offset = cond_offset;
    t.cond_scale = cond_scale;
    t.config_digest = config_digest;
    return t;
}

FlowModel FlowModel::from_checkpoint(DecodedCheckpoint ckpt) {
    FlowModel m;
    m.net = std::move(ckpt.params);
    const auto& t = ckpt.trailer;
    m.chunk_dim = t.chunk_dim;
    m.cond_dim = t.cond_dim;
    m.action_horizon = t.action_horizon;
    m.action_dim = t.action_dim;
    m.default_num_steps = static_cast<int>(t.default_num_steps);
    m.cond_offset = t.cond_offset;
    m.cond_scale = t.cond_scale;
    m.config_digest = t.config_digest;
    m.validate();
    return m;
}

void save_model(const std::string& path, const FlowModel& model) {
    model.validate();
    save_checkpoint(path, model.net, model.trailer());
}

FlowModel load_model(const std::string& path) { return FlowModel::from_checkpoint(load_checkpoint(path)); }

NetworkField::NetworkField(const FlowModel& model)
    : model_(&model), eval_(model.net), input_(model.chunk_dim + model.cond_dim + 1) {}

void NetworkField::velocity(std::span<const float> z, std::span<const float> cond, float tau, std::span<float> out) {
    const std::size_t d = model_->chunk_dim;
    const std::size_t c = model_->cond_dim;
    std::copy(z.begin(), z.end(), input_.begin());
    std::copy(cond.begin(), cond.end(), input_.begin() + static_cast<std::ptrdiff_t>(d));
    input_[d + c] = tau;
    eval_(input_, out);
}

std::vector<float> corrupt(std::span<const float> x, std::span<const float> eps, float tau) {
    if (x.size() != eps.size()) {
        throw DimensionError("corrupt: x and eps widths differ");
    }
    if (!(tau >= 0.0f && tau <= 1.0f)) {
        throw ValidationError("corrupt: tau must lie in [0, 1]");
    }
    std::vector<float> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        z[i] = (1.0f - tau) * x[i] + tau * eps[i];
    }
    return z;
}

std::vector<float> sample(VelocityField& field, std::span<const float> cond, std::span<const float> z1, int num_steps) {
    if (num_steps < 1) {
        throw ValidationError("sample: num_steps must be >= 1");
    }
    if (z1.size() != field.chunk_dim() || cond.size() != field.cond_dim()) {
        throw DimensionError("sample: z1/cond width mismatch with velocity field");
    }
    std::vector<float> z(z1.begin(), z1.end());
    std::vector<float> u(z.size());
    const double dt = 1.0 / num_steps;
    for (int k = num_steps; k >= 1; --k) {
        const float tau = static_cast<float>(k * dt);
        field.velocity(z, cond, tau, u);
        for (std::size_t i = 0; i < z.size(); ++i) {
            z[i] = static_cast<float>(z[i] - dt * u[i]);
        }
    }
    return z;
}

std::vector<float> sample(const FlowModel& model, std::span<const float> cond, std::span<const float> z1, int num_steps) {
    NetworkField field(model);
    return sample(field, cond, z1, num_steps);
}

namespace {

DenseMatrix assemble_inputs(const FlowModel& model, std::span<const FlowExample> batch, std::span<const FlowDraw> draws,
                            DenseMatrix& target) {
    const std::size_t d = model.chunk_dim;
    const std::size_t c = model.cond_dim;
    DenseMatrix input(batch.size(), d + c + 1);
    target = DenseMatrix(batch.size(), d);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& ex = batch[b];
        const auto& dr = draws[b];
        if (ex.x.size() != d || ex.cond.size() != c || dr.eps.size() != d) {
            throw DimensionError("fm_loss: example width mismatch with model");
        }
        auto row = input.row(b);
        auto tgt = target.row(b);
        for (std::size_t i = 0; i < d; ++i) {
            row[i] = (1.0f - dr.tau) * ex.x[i] + dr.tau * dr.eps[i];
            tgt[i] = dr.eps[i] - ex.x[i];
        }
        std::copy(ex.cond.begin(), ex.cond.end(), row.begin() + static_cast<std::ptrdiff_t>(d));
        row[d + c] = dr.tau;
    }
    return input;
}

} // namespace

FlowLoss fm_loss_with_draws(const FlowModel& model, std::span<const FlowExample> batch, std::span<const FlowDraw> draws) {
    if (batch.empty()) {
        throw ValidationError("fm_loss: empty batch");
    }
    if (draws.size() != batch.size()) {
        throw DimensionError("fm_loss: one noise draw per example required");
    }
    DenseMatrix target;
    const DenseMatrix input = assemble_inputs(model, batch, draws, target);
    auto fwd = mlp_forward(model.net, input);

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    DenseMatrix out_grad(batch.size(), model.chunk_dim);
    double total = 0.0;
    for (std::size_t k = 0; k < target.values.size(); ++k) {
        const double r = static_cast<double>(fwd.output.values[k]) - target.values[k];
        total += r * r;
        out_grad.values[k] = static_cast<float>(2.0 * r * inv_b);
    }
    auto back = mlp_backward(model.net, fwd.cache, out_grad);
    return {total * inv_b, std::move(back.param_grads)};
}

std::vector<FlowDraw> draw_flow_noise(std::size_t batch, std::size_t chunk_dim, SplitMix64& rng) {
    std::vector<FlowDraw> draws(batch);
    for (auto& d : draws) {
        d.tau = static_cast<float>(rng.uniform());
        d.eps.resize(chunk_dim);
        for (auto& e : d.eps) {
            e = static_cast<float>(rng.normal());
        }
    }
    return draws;
}

FlowLoss fm_loss(const FlowModel& model, std::span<const FlowExample> batch, SplitMix64& rng) {
    const auto draws = draw_flow_noise(batch.size(), model.chunk_dim, rng);
    return fm_loss_with_draws(model, batch, draws);
}

} // namespace gt
