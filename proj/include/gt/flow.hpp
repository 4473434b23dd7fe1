#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gt/checkpoint.hpp"
#include "gt/nn.hpp"
#include "gt/rng.hpp"

namespace gt {

/// Conditional velocity network u(z, cond, tau) over flattened action chunks.
/// Network input layout is [z (D) | normalized cond (C) | tau (1)].
struct FlowModel {
    MlpParams net;
    std::size_t chunk_dim = 0;
    std::size_t cond_dim = 0;
    std::size_t action_horizon = 0;
    std::size_t action_dim = 0;
    int default_num_steps = 8;
    std::vector<float> cond_offset;
    std::vector<float> cond_scale;
    std::uint64_t config_digest = 0;

    /// (obs - offset) / scale, per dimension.
    std::vector<float> normalize_cond(std::span<const float> obs) const;

    /// Throws DimensionError if the network does not match D, C.
    void validate() const;

    CheckpointTrailer trailer() const;
    static FlowModel from_checkpoint(DecodedCheckpoint ckpt);

    bool operator==(const FlowModel&) const = default;
};

void save_model(const std::string& path, const FlowModel& model);
FlowModel load_model(const std::string& path);

/// Velocity field evaluated by the Euler sampler. Implementations may keep
/// scratch state, so one instance must not be shared across threads.
class VelocityField {
public:
    virtual ~VelocityField() = default;
    virtual std::size_t chunk_dim() const = 0;
    virtual std::size_t cond_dim() const = 0;
    virtual void velocity(std::span<const float> z, std::span<const float> cond, float tau,
                          std::span<float> out) = 0;
};

/// FlowModel adapter; `cond` passed to velocity() must already be normalized.
class NetworkField final : public VelocityField {
public:
    explicit NetworkField(const FlowModel& model);

    std::size_t chunk_dim() const override { return model_->chunk_dim; }
    std::size_t cond_dim() const override { return model_->cond_dim; }
    void velocity(std::span<const float> z, std::span<const float> cond, float tau, std::span<float> out) override;

private:
    const FlowModel* model_;
    MlpEvaluator eval_;
    std::vector<float> input_;
};

/// Linear-path corruption (1 - tau) x + tau eps.
std::vector<float> corrupt(std::span<const float> x, std::span<const float> eps, float tau);

/// Deterministic Euler integration from tau = 1 to tau = 0 on a uniform grid
/// of `num_steps` intervals: z <- z - u(z, cond, tau) / num_steps.
std::vector<float> sample(VelocityField& field, std::span<const float> cond, std::span<const float> z1, int num_steps);
std::vector<float> sample(const FlowModel& model, std::span<const float> cond, std::span<const float> z1, int num_steps);

/// One training example. `cond` is the normalized condition.
struct FlowExample {
    std::span<const float> x;
    std::span<const float> cond;
};

/// Noise drawn for one example.
struct FlowDraw {
    float tau = 0.0f;
    std::vector<float> eps;
};

struct FlowLoss {
    double loss = 0.0;
    MlpParams grads;
};

/// Mean over the batch of ||u(corrupt(x, eps, tau), cond, tau) - (eps - x)||^2
/// with the noise supplied explicitly.
FlowLoss fm_loss_with_draws(const FlowModel& model, std::span<const FlowExample> batch, std::span<const FlowDraw> draws);

/// Draws tau ~ U(0,1) then eps ~ N(0, I) for each example, in batch order.
std::vector<FlowDraw> draw_flow_noise(std::size_t batch, std::size_t chunk_dim, SplitMix64& rng);

FlowLoss fm_loss(const FlowModel& model, std::span<const FlowExample> batch, SplitMix64& rng);

} // namespace gt
