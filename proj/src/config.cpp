#include "gt/config.hpp"

#include <cmath>
#include <json.hpp>
#include <set>

#include "gt/binary_io.hpp"
#include "gt/error.hpp"

namespace gt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ValidationError("config: '" + where + "' must be an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) {
            throw ValidationError("config: unknown key '" + key + "' in '" + where + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) {
        return;
    }
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: '" + where + "." + key + "' has the wrong type");
    }
}

AxisBounds read_bounds(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ValidationError("config: '" + where + "' must be [lo, hi]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Vec2 read_point(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ValidationError("config: '" + where + "' must be [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

void RunConfig::validate() const {
    if (version != kConfigVersion) {
        throw ValidationError("config: unsupported version " + std::to_string(version));
    }
    task.validate();
    demo_spec().validate();
    if (data.n_demos < 1) {
        throw ValidationError("config: data.n_demos must be >= 1");
    }
    if (data.stride < 1 || data.stride > kChunkSteps) {
        throw ValidationError("config: data.stride must lie in [1, 8]");
    }
    double total = 0.0;
    for (double w : data.style_weights) {
        if (!(w >= 0.0)) {
            throw ValidationError("config: style weights must be non-negative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("config: style weights must sum to 1");
    }
    train_config().validate();
    if (train.hidden.empty()) {
        throw ValidationError("config: train.hidden must list at least one width");
    }
    for (auto h : train.hidden) {
        if (h == 0) {
            throw ValidationError("config: hidden widths must be positive");
        }
    }
    policy.validate();
    if (search.n_tickets < 1 || search.n_envs < 1) {
        throw ValidationError("config: search.n_tickets and search.n_envs must be >= 1");
    }
    if (heldout.n_envs < 1 || heldout.base_episodes < 1 || heldout.base_episodes > heldout.n_envs) {
        throw ValidationError("config: heldout.base_episodes must lie in [1, heldout.n_envs]");
    }
    if (cross_task.n_tickets < 1 || cross_task.n_search_envs < 1 || cross_task.n_eval_envs < 1) {
        throw ValidationError("config: cross_task counts must be >= 1");
    }
    for (auto [n, e] : tradeoff_splits) {
        if (n < 1 || e < 1 || n > static_cast<std::size_t>(search.n_tickets) ||
            e > static_cast<std::size_t>(search.n_envs)) {
            throw ValidationError("config: trade-off split " + std::to_string(n) + "x" + std::to_string(e) +
                                  " must fit inside the search (n_tickets x n_envs)");
        }
    }
}

EnvSpec RunConfig::demo_spec() const {
    EnvSpec s = task;
    if (data.demo_horizon) {
        s.horizon = *data.demo_horizon;
    }
    return s;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.epochs = train.epochs;
    t.batch_size = train.batch_size;
    t.lr = train.lr;
    t.seed = SeedPlan::from_global(seed).train;
    t.validation_fraction = train.validation_fraction;
    return t;
}

PolicyConfig RunConfig::policy_config(std::optional<int> steps) const {
    PolicyConfig p = policy;
    if (steps) {
        p.num_steps = *steps;
    }
    p.validate();
    return p;
}

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    only_keys(j, "config",
              {"version", "seed", "out_dir", "task", "data", "train", "policy", "search", "heldout", "cross_task",
               "tradeoff_splits"});
    RunConfig c;
    read(j, "version", c.version, "config");
    read(j, "seed", c.seed, "config");
    read(j, "out_dir", c.out_dir, "config");

    if (j.contains("task")) {
        const auto& t = j["task"];
        only_keys(t, "task", {"name", "horizon", "x", "y", "success_radius", "goals", "fixed_task"});
        std::string name = std::string(task_name(c.task.task));
        read(t, "name", name, "task");
        c.task.task = parse_task(name);
        read(t, "horizon", c.task.horizon, "task");
        if (t.contains("x")) {
            c.task.x = read_bounds(t["x"], "task.x");
        }
        if (t.contains("y")) {
            c.task.y = read_bounds(t["y"], "task.y");
        }
        read(t, "success_radius", c.task.success_radius, "task");
        read(t, "fixed_task", c.task.fixed_task, "task");
        if (t.contains("goals")) {
            if (!t["goals"].is_array()) {
                throw ValidationError("config: 'task.goals' must be a list of [x, y]");
            }
            for (const auto& g : t["goals"]) {
                c.task.goals.push_back(read_point(g, "task.goals[]"));
            }
        }
    }
    if (c.task.task == Task::multi_goal && c.task.goals.empty()) {
        c.task.goals = default_goals(c.task);
    }

    if (j.contains("data")) {
        const auto& d = j["data"];
        only_keys(d, "data", {"n_demos", "style_weights", "demo_horizon", "stride"});
        read(d, "n_demos", c.data.n_demos, "data");
        read(d, "stride", c.data.stride, "data");
        if (d.contains("demo_horizon") && !d["demo_horizon"].is_null()) {
            int h = 0;
            read(d, "demo_horizon", h, "data");
            c.data.demo_horizon = h;
        }
        if (d.contains("style_weights")) {
            const auto& w = d["style_weights"];
            if (!w.is_object()) {
                throw ValidationError("config: data.style_weights must map style names to weights");
            }
            c.data.style_weights.fill(0.0);
            for (const auto& [name, value] : w.items()) {
                if (!value.is_number()) {
                    throw ValidationError("config: style weight for '" + name + "' must be a number");
                }
                c.data.style_weights[Style::parse(name).index()] = value.get<double>();
            }
        }
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        only_keys(t, "train", {"epochs", "batch_size", "lr", "hidden", "validation_fraction"});
        read(t, "epochs", c.train.epochs, "train");
        read(t, "batch_size", c.train.batch_size, "train");
        read(t, "lr", c.train.lr, "train");
        read(t, "hidden", c.train.hidden, "train");
        read(t, "validation_fraction", c.train.validation_fraction, "train");
    }
    if (j.contains("policy")) {
        const auto& p = j["policy"];
        only_keys(p, "policy", {"num_steps", "exec_horizon"});
        read(p, "num_steps", c.policy.num_steps, "policy");
        read(p, "exec_horizon", c.policy.exec_horizon, "policy");
    }
    if (j.contains("search")) {
        const auto& s = j["search"];
        only_keys(s, "search", {"n_tickets", "n_envs"});
        read(s, "n_tickets", c.search.n_tickets, "search");
        read(s, "n_envs", c.search.n_envs, "search");
    }
    if (j.contains("heldout")) {
        const auto& h = j["heldout"];
        only_keys(h, "heldout", {"n_envs", "base_episodes"});
        read(h, "n_envs", c.heldout.n_envs, "heldout");
        read(h, "base_episodes", c.heldout.base_episodes, "heldout");
    }
    if (j.contains("cross_task")) {
        const auto& x = j["cross_task"];
        only_keys(x, "cross_task", {"n_tickets", "n_search_envs", "n_eval_envs"});
        read(x, "n_tickets", c.cross_task.n_tickets, "cross_task");
        read(x, "n_search_envs", c.cross_task.n_search_envs, "cross_task");
        read(x, "n_eval_envs", c.cross_task.n_eval_envs, "cross_task");
    }
    if (j.contains("tradeoff_splits")) {
        read(j, "tradeoff_splits", c.tradeoff_splits, "config");
    }
    c.validate();
    return c;
}

std::string serialize_run_config(const RunConfig& c) {
    ordered_json j;
    j["version"] = c.version;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    ordered_json t;
    t["name"] = std::string(task_name(c.task.task));
    t["horizon"] = c.task.horizon;
    t["x"] = {c.task.x.lo, c.task.x.hi};
    t["y"] = {c.task.y.lo, c.task.y.hi};
    t["success_radius"] = c.task.success_radius;
    if (c.task.task == Task::multi_goal) {
        t["goals"] = ordered_json::array();
        for (const auto& g : c.task.goals) {
            t["goals"].push_back({g.x, g.y});
        }
        t["fixed_task"] = c.task.fixed_task;
    }
    j["task"] = t;
    ordered_json d;
    d["n_demos"] = c.data.n_demos;
    ordered_json w;
    for (std::uint8_t i = 0; i < kStyleCount; ++i) {
        w[Style::from_index(i).name()] = c.data.style_weights[i];
    }
    d["style_weights"] = w;
    d["demo_horizon"] = c.data.demo_horizon ? ordered_json(*c.data.demo_horizon) : ordered_json(nullptr);
    d["stride"] = c.data.stride;
    j["data"] = d;
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"lr", c.train.lr},
                  {"hidden", c.train.hidden},
                  {"validation_fraction", c.train.validation_fraction}};
    j["policy"] = {{"num_steps", c.policy.num_steps}, {"exec_horizon", c.policy.exec_horizon}};
    j["search"] = {{"n_tickets", c.search.n_tickets}, {"n_envs", c.search.n_envs}};
    j["heldout"] = {{"n_envs", c.heldout.n_envs}, {"base_episodes", c.heldout.base_episodes}};
    j["cross_task"] = {{"n_tickets", c.cross_task.n_tickets},
                       {"n_search_envs", c.cross_task.n_search_envs},
                       {"n_eval_envs", c.cross_task.n_eval_envs}};
    j["tradeoff_splits"] = c.tradeoff_splits;
    return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const ArtifactError&) {
        throw ValidationError("config file not readable: " + path);
    }
    return parse_run_config(text);
}

SeedPlan SeedPlan::from_global(std::uint64_t g) {
    SeedPlan p;
    p.data = derive_seed(g, "data");
    p.train = derive_seed(g, "train");
    p.tickets = derive_seed(g, "tickets");
    p.search_envs = derive_seed(g, "search-envs");
    p.heldout_envs = derive_seed(g, "heldout-envs");
    p.base_noise = derive_seed(g, "base-noise");
    return p;
}

std::vector<std::uint64_t> episode_seeds(std::uint64_t base, std::size_t n) {
    std::vector<std::uint64_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = mix64(base + i);
    }
    return out;
}

std::uint64_t cross_search_seed(std::uint64_t g, int task) {
    return derive_seed(g, "cross-search-task" + std::to_string(task));
}

std::uint64_t cross_eval_seed(std::uint64_t g, int task) {
    return derive_seed(g, "cross-eval-task" + std::to_string(task));
}

std::uint64_t cross_ticket_seed(std::uint64_t g, int task) {
    return derive_seed(g, "cross-tickets-task" + std::to_string(task));
}

} // namespace gt
