#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gt/dataset.hpp"

namespace gt {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    bool operator==(const Vec2&) const = default;
};

enum class Task : std::uint8_t { reach_pick, push, multi_goal };

std::string_view task_name(Task t);
Task parse_task(std::string_view name);

struct AxisBounds {
    double lo = 0.0;
    double hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
    bool operator==(const AxisBounds&) const = default;
};

inline constexpr double kMaxSpeed = 0.05;      // m per step
inline constexpr double kSlowFactor = 0.5;
inline constexpr double kWorkspacePad = 0.10;
inline constexpr double kAgentRadius = 0.02;   // push contact
inline constexpr double kDiskRadius = 0.02;
inline constexpr Vec2 kHome{0.0, 0.15};
inline constexpr int kChunkSteps = 8;          // H
inline constexpr int kActionDim = 3;           // vx/vmax, vy/vmax, grab
inline constexpr int kChunkDim = kChunkSteps * kActionDim;

struct EnvSpec {
    Task task = Task::reach_pick;
    int horizon = 240;
    AxisBounds x{-0.25, 0.25};
    AxisBounds y{0.25, 0.55};
    double success_radius = 0.03;
    /// Multi-goal destinations; task-id k means "deliver the object to goals[k]".
    std::vector<Vec2> goals;
    /// Multi-goal only: pin the task-id instead of sampling it (-1 = sample).
    int fixed_task = -1;

    void validate() const;
    std::size_t obs_dim() const;
    /// Agent/object region: object bounds padded by kWorkspacePad, extended to contain kHome.
    AxisBounds arena_x() const;
    AxisBounds arena_y() const;
    /// Push target.
    Vec2 center() const { return {x.mid(), y.mid()}; }

    bool operator==(const EnvSpec&) const = default;
};

/// Four goals on the corners of the object region, padded outward by 0.05.
std::vector<Vec2> default_goals(const EnvSpec& spec);

struct EnvState {
    Vec2 agent;
    Vec2 object;
    bool grabbed = false;
    int t = 0;
    int task_id = 0;
    bool done = false;
    bool success = false;

    bool operator==(const EnvState&) const = default;
};

struct Action {
    Vec2 velocity;     // m per step, clipped to kMaxSpeed by step()
    double grab = 0.0; // fires at >= 0.5
};

/// Chunk rows are (vx / kMaxSpeed, vy / kMaxSpeed, grab).
Action decode_action(std::span<const float> row);
std::array<float, kActionDim> encode_action(const Action& a);

EnvState reset(const EnvSpec& spec, std::uint64_t episode_seed);
std::vector<float> observe(const EnvSpec& spec, const EnvState& state);

struct StepResult {
    EnvState state;
    double reward = 0.0;
    bool done = false;
};

/// Throws ValidationError when called on a finished episode.
StepResult step(const EnvSpec& spec, const EnvState& state, const Action& action);

/// Hash of a quantized (1e-6 m) state sequence.
class TrajectoryDigest {
public:
    void add(const EnvState& s);
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

struct EpisodeResult {
    double ret = 0.0;
    bool success = false;
    int length = 0;
    std::uint64_t digest = 0;

    bool operator==(const EpisodeResult&) const = default;
};

enum class PathStyle : std::uint8_t { direct, arc_left, arc_right };
enum class Pace : std::uint8_t { fast, slow };

struct Style {
    PathStyle path = PathStyle::direct;
    Pace pace = Pace::fast;

    std::uint8_t index() const { return static_cast<std::uint8_t>(static_cast<int>(path) * 2 + static_cast<int>(pace)); }
    static Style from_index(std::uint8_t i);
    std::string name() const; // e.g. "arc-left-slow"
    static Style parse(std::string_view name);
    bool operator==(const Style&) const = default;
};

inline constexpr int kStyleCount = 6;
using StyleWeights = std::array<double, kStyleCount>;

/// Heading offset of the arc styles relative to the agent-target axis.
inline constexpr double kArcOffset = 1.0471975511965976; // 60 degrees

/// H-step action chunk from `state` following `style`.
std::vector<float> scripted_expert(const EnvSpec& spec, const EnvState& state, Style style);

/// Rolls the expert with chunked execution; deterministic in its inputs.
EpisodeResult expert_rollout(const EnvSpec& spec, std::uint64_t episode_seed, Style style, int exec_horizon = kChunkSteps);

struct GenerationResult {
    Dataset dataset;
    int skipped = 0;
};

using LogFn = std::function<void(const std::string&)>;

/// Rolls n_demos expert episodes (style drawn per episode from `weights`),
/// slicing each into (observation, next-H-actions) pairs every `stride`
/// steps. Failed episodes are skipped; more than 5% skipped is an error.
GenerationResult generate_dataset(const EnvSpec& spec, int n_demos, std::uint64_t seed, const StyleWeights& weights,
                                  int stride = kChunkSteps, const LogFn& log = {});

/// Episode seed used for demo `index`.
std::uint64_t demo_episode_seed(std::uint64_t seed, std::uint64_t index);

} // namespace gt
