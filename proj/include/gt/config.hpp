#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gt/env.hpp"
#include "gt/policy.hpp"
#include "gt/search.hpp"
#include "gt/train.hpp"

namespace gt {

inline constexpr int kConfigVersion = 1;

struct DataConfig {
    int n_demos = 1000;
    StyleWeights style_weights{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    /// Horizon used while recording demos; absent means the task horizon.
    std::optional<int> demo_horizon;
    int stride = kChunkSteps;
    bool operator==(const DataConfig&) const = default;
};

struct TrainSection {
    int epochs = 100;
    std::size_t batch_size = 20;
    double lr = 1e-3;
    std::vector<std::size_t> hidden{256, 256, 256};
    double validation_fraction = 0.1;
    bool operator==(const TrainSection&) const = default;
};

struct SearchSection {
    int n_tickets = 100;
    int n_envs = 25;
    bool operator==(const SearchSection&) const = default;
};

struct HeldoutSection {
    int n_envs = 200;
    int base_episodes = 200;
    bool operator==(const HeldoutSection&) const = default;
};

struct CrossTaskSection {
    int n_tickets = 50;
    int n_search_envs = 25;
    int n_eval_envs = 100;
    bool operator==(const CrossTaskSection&) const = default;
};

struct RunConfig {
    int version = kConfigVersion;
    std::uint64_t seed = 0;
    std::string out_dir = "run";
    EnvSpec task;
    DataConfig data;
    TrainSection train;
    PolicyConfig policy;
    SearchSection search;
    HeldoutSection heldout;
    CrossTaskSection cross_task;
    /// (n_tickets, n_envs) prefixes of the main search re-scored on held-out seeds.
    std::vector<std::pair<std::size_t, std::size_t>> tradeoff_splits;

    void validate() const;
    bool operator==(const RunConfig&) const = default;

    EnvSpec demo_spec() const;
    TrainConfig train_config() const;
    PolicyConfig policy_config(std::optional<int> steps) const;
};

RunConfig parse_run_config(const std::string& json_text);
std::string serialize_run_config(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

/// Sub-seeds: derive_seed(global, tag) for each role tag below.
struct SeedPlan {
    std::uint64_t data = 0;
    std::uint64_t train = 0;
    std::uint64_t tickets = 0;
    std::uint64_t search_envs = 0;
    std::uint64_t heldout_envs = 0;
    std::uint64_t base_noise = 0;

    static SeedPlan from_global(std::uint64_t g);
};

/// n episode seeds mix64(base + i), i = 0..n-1.
std::vector<std::uint64_t> episode_seeds(std::uint64_t base, std::size_t n);

/// Per-task seed bases for the cross-task protocol.
std::uint64_t cross_search_seed(std::uint64_t g, int task);
std::uint64_t cross_eval_seed(std::uint64_t g, int task);
std::uint64_t cross_ticket_seed(std::uint64_t g, int task);

} // namespace gt
