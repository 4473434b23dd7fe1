#include "gt/policy.hpp"

#include <bit>
#include <cmath>
#include <json.hpp>

#include "gt/binary_io.hpp"
#include "gt/error.hpp"
#include "gt/rng.hpp"

namespace gt {

std::string ticket_id(std::span<const float> values) {
    ByteWriter w;
    w.f32s(values);
    return hex64(content_hash(w.data())).substr(0, 8);
}

Ticket Ticket::from_values(std::vector<float> values, std::uint64_t origin_seed, std::uint64_t origin_index) {
    if (values.empty()) {
        throw ValidationError("ticket: empty value vector");
    }
    for (float v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError("ticket: values must be finite");
        }
    }
    Ticket t;
    t.id = ticket_id(values);
    t.values = std::move(values);
    t.origin_seed = origin_seed;
    t.origin_index = origin_index;
    return t;
}

Ticket Ticket::draw(std::uint64_t seed, std::uint64_t index, std::size_t dim) {
    return from_values(gaussian_vector(seed, index, dim), seed, index);
}

std::string ticket_to_json(const Ticket& t) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["dim"] = t.values.size();
    j["values"] = t.values;
    j["origin"] = {{"seed", t.origin_seed}, {"index", t.origin_index}};
    return j.dump(2) + "\n";
}

Ticket ticket_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("ticket: malformed JSON: ") + e.what());
    }
    try {
        auto values = j.at("values").get<std::vector<float>>();
        if (j.at("dim").get<std::size_t>() != values.size()) {
            throw ArtifactError("ticket: dim does not match the number of values");
        }
        auto t = Ticket::from_values(std::move(values), j.at("origin").at("seed").get<std::uint64_t>(),
                                     j.at("origin").at("index").get<std::uint64_t>());
        if (t.id != j.at("id").get<std::string>()) {
            throw ArtifactError("ticket: stored id " + j.at("id").get<std::string>() + " does not match values (" +
                                t.id + ")");
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("ticket: missing or mistyped field: ") + e.what());
    }
}

NoiseSource NoiseSource::gaussian(std::uint64_t stream_seed) {
    NoiseSource n;
    n.stream_seed_ = stream_seed;
    return n;
}

NoiseSource NoiseSource::ticket(Ticket t) {
    NoiseSource n;
    n.is_ticket_ = true;
    n.ticket_ = std::move(t);
    return n;
}

std::vector<float> NoiseSource::draw(std::uint64_t index, std::size_t dim) const {
    if (is_ticket_) {
        if (ticket_.values.size() != dim) {
            throw DimensionError("ticket " + ticket_.id + " has " + std::to_string(ticket_.values.size()) +
                                 " values, model expects " + std::to_string(dim));
        }
        return ticket_.values;
    }
    return gaussian_vector(stream_seed_, index, dim);
}

NoiseSource NoiseSource::for_episode(std::uint64_t episode_seed) const {
    if (is_ticket_) {
        return *this;
    }
    return gaussian(mix64(stream_seed_ ^ mix64(episode_seed)));
}

void PolicyConfig::validate(std::size_t action_horizon) const {
    if (num_steps < 1) {
        throw ValidationError("policy: num_steps must be >= 1");
    }
    if (exec_horizon < 1 || static_cast<std::size_t>(exec_horizon) > action_horizon) {
        throw ValidationError("policy: exec_horizon must lie in [1, H]");
    }
}

Policy::Policy(const FlowModel& model, PolicyConfig cfg) : model_(&model), cfg_(cfg), field_(model) {
    model.validate();
    cfg_.validate(model.action_horizon);
}

std::vector<float> Policy::act(std::span<const float> obs, const NoiseSource& noise, std::uint64_t draw_index) {
    const auto cond = model_->normalize_cond(obs);
    const auto z1 = noise.draw(draw_index, model_->chunk_dim);
    if (tap_) {
        tap_(z1);
    }
    return sample(field_, cond, z1, cfg_.num_steps);
}

EpisodeResult Policy::rollout(const EnvSpec& spec, const NoiseSource& noise, std::uint64_t episode_seed) {
    if (model_->action_dim != static_cast<std::size_t>(kActionDim)) {
        throw DimensionError("policy: model action_dim does not match the environment");
    }
    const NoiseSource source = noise.for_episode(episode_seed);
    EnvState s = reset(spec, episode_seed);
    TrajectoryDigest digest;
    digest.add(s);
    EpisodeResult res;
    std::uint64_t draw = 0;
    while (!s.done) {
        const auto chunk = act(observe(spec, s), source, draw++);
        for (int i = 0; i < cfg_.exec_horizon && !s.done; ++i) {
            const auto out = step(spec, s, decode_action(std::span<const float>(chunk).subspan(
                                               static_cast<std::size_t>(i) * kActionDim, kActionDim)));
            s = out.state;
            res.ret += out.reward;
            digest.add(s);
        }
    }
    res.success = s.success;
    res.length = s.t;
    res.digest = digest.value();
    return res;
}

std::vector<float> act(const FlowModel& model, const PolicyConfig& cfg, std::span<const float> obs,
                       const NoiseSource& noise, std::uint64_t draw_index) {
    Policy p(model, cfg);
    return p.act(obs, noise, draw_index);
}

EpisodeResult rollout(const EnvSpec& spec, const FlowModel& model, const PolicyConfig& cfg, const NoiseSource& noise,
                      std::uint64_t episode_seed) {
    Policy p(model, cfg);
    return p.rollout(spec, noise, episode_seed);
}

} // namespace gt
