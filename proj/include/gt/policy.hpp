#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gt/env.hpp"
#include "gt/flow.hpp"

namespace gt {

/// Constant initial noise for the sampler.
struct Ticket {
    std::vector<float> values;
    std::string id;
    std::uint64_t origin_seed = 0;
    std::uint64_t origin_index = 0;

    /// Builds a ticket, computing its id. Throws ValidationError on non-finite values.
    static Ticket from_values(std::vector<float> values, std::uint64_t origin_seed = 0, std::uint64_t origin_index = 0);
    /// The `index`-th N(0, I) ticket of search stream `seed`.
    static Ticket draw(std::uint64_t seed, std::uint64_t index, std::size_t dim);

    bool operator==(const Ticket&) const = default;
};

/// First 8 hex digits of the FNV-1a hash of the little-endian float bytes.
std::string ticket_id(std::span<const float> values);

std::string ticket_to_json(const Ticket& t);
Ticket ticket_from_json(const std::string& text);

class NoiseSource {
public:
    static NoiseSource gaussian(std::uint64_t stream_seed);
    static NoiseSource ticket(Ticket t);

    bool is_ticket() const { return is_ticket_; }
    std::uint64_t stream_seed() const { return stream_seed_; }
    const Ticket& ticket_value() const { return ticket_; }

    /// Noise for draw `index`. Tickets ignore the index.
    std::vector<float> draw(std::uint64_t index, std::size_t dim) const;

    /// Source used inside one episode: Gaussian streams are re-keyed by the
    /// episode seed so episodes are independent of evaluation order.
    NoiseSource for_episode(std::uint64_t episode_seed) const;

private:
    bool is_ticket_ = false;
    std::uint64_t stream_seed_ = 0;
    Ticket ticket_;
};

struct PolicyConfig {
    int num_steps = 8;
    int exec_horizon = kChunkSteps;

    void validate(std::size_t action_horizon = kChunkSteps) const;
    bool operator==(const PolicyConfig&) const = default;
};

/// Observer for every z1 handed to the sampler.
using NoiseTap = std::function<void(std::span<const float>)>;

/// Holds per-thread sampler scratch; cheap to construct.
class Policy {
public:
    Policy(const FlowModel& model, PolicyConfig cfg);

    /// Decoded H x action_dim chunk, flattened; no clipping here.
    std::vector<float> act(std::span<const float> obs, const NoiseSource& noise, std::uint64_t draw_index);
    EpisodeResult rollout(const EnvSpec& spec, const NoiseSource& noise, std::uint64_t episode_seed);

    void set_tap(NoiseTap tap) { tap_ = std::move(tap); }
    const PolicyConfig& config() const { return cfg_; }

private:
    const FlowModel* model_;
    PolicyConfig cfg_;
    NetworkField field_;
    NoiseTap tap_;
};

std::vector<float> act(const FlowModel& model, const PolicyConfig& cfg, std::span<const float> obs,
                       const NoiseSource& noise, std::uint64_t draw_index = 0);
EpisodeResult rollout(const EnvSpec& spec, const FlowModel& model, const PolicyConfig& cfg, const NoiseSource& noise,
                      std::uint64_t episode_seed);

} // namespace gt
