#include "gt/env.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numbers>
#include <optional>

#include "gt/error.hpp"
#include "gt/rng.hpp"

namespace gt {

std::string_view task_name(Task t) {
    switch (t) {
    case Task::reach_pick:
        return "reach-pick";
    case Task::push:
        return "push";
    case Task::multi_goal:
        return "multi-goal";
    }
    return "unknown";
}

Task parse_task(std::string_view name) {
    if (name == "reach-pick") {
        return Task::reach_pick;
    }
    if (name == "push") {
        return Task::push;
    }
    if (name == "multi-goal") {
        return Task::multi_goal;
    }
    throw ValidationError("unknown task '" + std::string(name) + "' (expected reach-pick, push or multi-goal)");
}

void EnvSpec::validate() const {
    if (horizon < 1) {
        throw ValidationError("env: horizon must be >= 1");
    }
    if (!(x.lo < x.hi) || !(y.lo < y.hi)) {
        throw ValidationError("env: workspace bounds must be well ordered");
    }
    if (!(success_radius > 0.0)) {
        throw ValidationError("env: success radius must be positive");
    }
    if (task == Task::multi_goal) {
        if (goals.empty()) {
            throw ValidationError("env: multi-goal needs at least one goal");
        }
        if (fixed_task >= static_cast<int>(goals.size())) {
            throw ValidationError("env: fixed_task out of range");
        }
    }
}

std::size_t EnvSpec::obs_dim() const { return 5 + (task == Task::multi_goal ? goals.size() : 0); }

AxisBounds EnvSpec::arena_x() const { return {std::min(x.lo - kWorkspacePad, kHome.x), std::max(x.hi + kWorkspacePad, kHome.x)}; }

AxisBounds EnvSpec::arena_y() const { return {std::min(y.lo - kWorkspacePad, kHome.y), std::max(y.hi + kWorkspacePad, kHome.y)}; }

std::vector<Vec2> default_goals(const EnvSpec& spec) {
    constexpr double kOut = 0.05;
    return {{spec.x.lo - kOut, spec.y.lo - kOut},
            {spec.x.hi + kOut, spec.y.lo - kOut},
            {spec.x.lo - kOut, spec.y.hi + kOut},
            {spec.x.hi + kOut, spec.y.hi + kOut}};
}

Action decode_action(std::span<const float> row) {
    return {{static_cast<double>(row[0]) * kMaxSpeed, static_cast<double>(row[1]) * kMaxSpeed}, row[2]};
}

std::array<float, kActionDim> encode_action(const Action& a) {
    return {static_cast<float>(a.velocity.x / kMaxSpeed), static_cast<float>(a.velocity.y / kMaxSpeed),
            static_cast<float>(a.grab)};
}

namespace {

double unit(std::uint64_t w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }

Vec2 clamp_to(Vec2 p, AxisBounds bx, AxisBounds by, double inset = 0.0) {
    return {std::clamp(p.x, bx.lo + inset, bx.hi - inset), std::clamp(p.y, by.lo + inset, by.hi - inset)};
}

Vec2 clip_speed(Vec2 v, double limit) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
        return {};
    }
    const double n = v.norm();
    return n > limit ? v * (limit / n) : v;
}

} // namespace

EnvState reset(const EnvSpec& spec, std::uint64_t episode_seed) {
    spec.validate();
    EnvState s;
    s.agent = kHome;
    s.object = {spec.x.lo + (spec.x.hi - spec.x.lo) * unit(counter_word(episode_seed, 0x0b1ec7, 0)),
                spec.y.lo + (spec.y.hi - spec.y.lo) * unit(counter_word(episode_seed, 0x0b1ec7, 1))};
    if (spec.task == Task::multi_goal) {
        s.task_id = spec.fixed_task >= 0
                        ? spec.fixed_task
                        : static_cast<int>(counter_word(episode_seed, 0x7a5c, 0) % spec.goals.size());
    }
    return s;
}

std::vector<float> observe(const EnvSpec& spec, const EnvState& state) {
    std::vector<float> obs{static_cast<float>(state.agent.x), static_cast<float>(state.agent.y),
                           static_cast<float>(state.object.x), static_cast<float>(state.object.y),
                           state.grabbed ? 1.0f : 0.0f};
    if (spec.task == Task::multi_goal) {
        for (std::size_t k = 0; k < spec.goals.size(); ++k) {
            obs.push_back(static_cast<int>(k) == state.task_id ? 1.0f : 0.0f);
        }
    }
    return obs;
}

StepResult step(const EnvSpec& spec, const EnvState& state, const Action& action) {
    if (state.done || state.t >= spec.horizon) {
        throw ValidationError("env: step called after the episode ended");
    }
    EnvState n = state;
    const Vec2 v = clip_speed(action.velocity, kMaxSpeed);
    const auto ax = spec.arena_x();
    const auto ay = spec.arena_y();
    n.agent = clamp_to(n.agent + v, ax, ay);
    const bool fire = action.grab >= 0.5;
    const double r = spec.success_radius;

    switch (spec.task) {
    case Task::reach_pick:
        if (fire && (n.agent - n.object).norm() <= r) {
            n.grabbed = true;
            n.success = true;
        }
        break;
    case Task::push: {
        // Sub-stepped so a fast agent cannot tunnel through the disk; each
        // sub-step pushes the disk radially out of contact.
        constexpr double contact = kAgentRadius + kDiskRadius;
        constexpr double kSubStep = 0.005;
        const Vec2 moved = n.agent - state.agent;
        const int subs = std::max(1, static_cast<int>(std::ceil(moved.norm() / kSubStep)));
        for (int k = 1; k <= subs; ++k) {
            const Vec2 p = state.agent + moved * (static_cast<double>(k) / subs);
            const Vec2 sep = n.object - p;
            const double d = sep.norm();
            if (d < contact && d > 1e-12) {
                n.object = clamp_to(p + sep * (contact / d), ax, ay, kDiskRadius);
            }
        }
        n.object = clamp_to(n.object, ax, ay, kDiskRadius);
        if ((n.object - spec.center()).norm() <= r) {
            n.success = true;
        }
        break;
    }
    case Task::multi_goal:
        if (n.grabbed) {
            if (fire) {
                n.object = n.agent;
            } else {
                n.grabbed = false;
            }
        } else if (fire && (n.agent - n.object).norm() <= r) {
            n.grabbed = true;
            n.object = n.agent;
        }
        if (n.grabbed && (n.object - spec.goals[static_cast<std::size_t>(n.task_id)]).norm() <= r) {
            n.success = true;
        }
        break;
    }

    n.t += 1;
    StepResult out;
    if (n.success) {
        out.reward = 1.0;
        n.done = true;
    }
    if (n.t >= spec.horizon) {
        n.done = true;
    }
    out.done = n.done;
    out.state = n;
    return out;
}

void TrajectoryDigest::add(const EnvState& s) {
    auto feed = [this](std::int64_t v) {
        auto u = static_cast<std::uint64_t>(v);
        for (int k = 0; k < 8; ++k) {
            h_ ^= (u >> (8 * k)) & 0xffu;
            h_ *= 0x100000001b3ULL;
        }
    };
    auto q = [](double m) { return static_cast<std::int64_t>(std::llround(m * 1e6)); };
    feed(q(s.agent.x));
    feed(q(s.agent.y));
    feed(q(s.object.x));
    feed(q(s.object.y));
    feed(s.grabbed ? 1 : 0);
    feed(s.t);
}

Style Style::from_index(std::uint8_t i) {
    if (i >= kStyleCount) {
        throw ValidationError("style index out of range");
    }
    return {static_cast<PathStyle>(i / 2), static_cast<Pace>(i % 2)};
}

std::string Style::name() const {
    std::string out;
    switch (path) {
    case PathStyle::direct:
        out = "direct";
        break;
    case PathStyle::arc_left:
        out = "arc-left";
        break;
    case PathStyle::arc_right:
        out = "arc-right";
        break;
    }
    return out + (pace == Pace::fast ? "-fast" : "-slow");
}

Style Style::parse(std::string_view name) {
    for (std::uint8_t i = 0; i < kStyleCount; ++i) {
        auto s = from_index(i);
        if (s.name() == name) {
            return s;
        }
    }
    throw ValidationError("unknown style '" + std::string(name) + "'");
}

namespace {

// Constant-curvature path from `start` to `end` whose initial heading is
// rotated by `offset` (left positive) from the chord. offset = 0 is a segment.
struct ArcPath {
    Vec2 start;
    double heading = 0.0;
    double curvature = 0.0;
    double length = 0.0;

    static ArcPath plan(Vec2 start, Vec2 end, double offset) {
        ArcPath p;
        p.start = start;
        const Vec2 chord = end - start;
        const double c = chord.norm();
        const double axis = std::atan2(chord.y, chord.x);
        if (c < 1e-12 || offset == 0.0) {
            p.heading = axis;
            p.length = c;
            return p;
        }
        p.heading = axis + offset;
        const double s = std::sin(std::abs(offset));
        p.curvature = -(offset > 0 ? 1.0 : -1.0) * 2.0 * s / c;
        p.length = c * std::abs(offset) / s;
        return p;
    }

    Vec2 point(double s) const {
        if (curvature == 0.0) {
            return start + Vec2{std::cos(heading), std::sin(heading)} * s;
        }
        const double h = heading + curvature * s;
        return start + Vec2{std::sin(h) - std::sin(heading), std::cos(heading) - std::cos(h)} * (1.0 / curvature);
    }
};

double path_offset(PathStyle p) {
    switch (p) {
    case PathStyle::direct:
        return 0.0;
    case PathStyle::arc_left:
        return kArcOffset;
    case PathStyle::arc_right:
        return -kArcOffset;
    }
    return 0.0;
}

double pace_speed(Pace p) { return p == Pace::fast ? kMaxSpeed : kMaxSpeed * kSlowFactor; }

double wrap_angle(double a) {
    while (a > std::numbers::pi) {
        a -= 2.0 * std::numbers::pi;
    }
    while (a <= -std::numbers::pi) {
        a += 2.0 * std::numbers::pi;
    }
    return a;
}

double segment_distance(Vec2 a, Vec2 b, Vec2 p) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (a + ab * t - p).norm();
}

// Single push-expert velocity: get behind the disk (orbiting around it when
// the direct route would touch it), then drive it along the line to center.
Vec2 push_velocity(const EnvSpec& spec, const EnvState& s, Style style, double speed) {
    constexpr double contact = kAgentRadius + kDiskRadius;
    const Vec2 center = spec.center();
    const Vec2 disk = s.object;
    const Vec2 to_c = center - disk;
    const double dc = to_c.norm();
    if (dc < 1e-12) {
        return {};
    }
    const Vec2 u = to_c * (1.0 / dc);
    const Vec2 rel = s.agent - disk;
    const double d = rel.norm();
    const double cos_behind = d > 1e-12 ? rel.dot(u * -1.0) / d : -1.0;

    if (cos_behind >= std::cos(25.0 * std::numbers::pi / 180.0) && d <= contact + 0.025) {
        const Vec2 aim = disk - u * contact + u * std::min(speed, dc);
        return clip_speed(aim - s.agent, speed);
    }

    const Vec2 pre = disk - u * (contact + 0.01);
    const double clearance = contact + 0.005;
    const auto arc = ArcPath::plan(s.agent, pre, path_offset(style.path));
    bool clear = true;
    for (int k = 0; k <= 16 && clear; ++k) {
        if (arc.curvature == 0.0) {
            clear = segment_distance(s.agent, pre, disk) >= clearance;
            break;
        }
        clear = (arc.point(arc.length * k / 16.0) - disk).norm() >= clearance;
    }
    if (clear) {
        return clip_speed(arc.point(std::min(speed, arc.length)) - s.agent, speed);
    }

    const double orbit = contact + 0.03;
    const double a = std::atan2(rel.y, rel.x);
    const double diff = wrap_angle(std::atan2(-u.y, -u.x) - a);
    double dir;
    switch (style.path) {
    case PathStyle::arc_left:
        dir = 1.0;
        break;
    case PathStyle::arc_right:
        dir = -1.0;
        break;
    default:
        dir = diff >= 0.0 ? 1.0 : -1.0;
        break;
    }
    double remaining = dir > 0 ? (diff >= 0 ? diff : diff + 2 * std::numbers::pi)
                               : (diff <= 0 ? -diff : 2 * std::numbers::pi - diff);
    const double dtheta = std::min(speed / orbit, remaining);
    const Vec2 next = disk + Vec2{std::cos(a + dir * dtheta), std::sin(a + dir * dtheta)} * orbit;
    return clip_speed(next - s.agent, speed);
}

} // namespace

std::vector<float> scripted_expert(const EnvSpec& spec, const EnvState& state, Style style) {
    spec.validate();
    std::vector<float> chunk(kChunkDim, 0.0f);
    EnvSpec sim_spec = spec;
    sim_spec.horizon = INT_MAX;
    EnvState sim = state;
    sim.t = 0;
    sim.done = false;
    const double speed = pace_speed(style.pace);
    const double grab_radius = 0.5 * spec.success_radius;

    std::optional<ArcPath> arc;
    double along = 0.0;
    bool planned_grabbed = sim.grabbed;

    for (int i = 0; i < kChunkSteps; ++i) {
        float* row = chunk.data() + static_cast<std::ptrdiff_t>(i) * kActionDim;
        if (sim.done) {
            row[2] = 1.0f; // hold after completion
            continue;
        }
        Action act;
        if (spec.task == Task::push) {
            act.velocity = push_velocity(spec, sim, style, speed);
        } else {
            const bool carrying = spec.task == Task::multi_goal && sim.grabbed;
            const Vec2 target = carrying ? spec.goals[static_cast<std::size_t>(sim.task_id)] : sim.object;
            // One path per chunk; replan only when the phase changes.
            if (!arc || planned_grabbed != sim.grabbed) {
                arc = ArcPath::plan(sim.agent, target, path_offset(style.path));
                along = 0.0;
                planned_grabbed = sim.grabbed;
            }
            along = std::min(along + speed, arc->length);
            act.velocity = clip_speed(arc->point(along) - sim.agent, speed);
            const Vec2 post = sim.agent + act.velocity;
            act.grab = carrying || (post - sim.object).norm() <= grab_radius ? 1.0 : 0.0;
        }
        const auto enc = encode_action(act);
        std::copy(enc.begin(), enc.end(), row);
        sim = step(sim_spec, sim, decode_action(std::span<const float>(row, kActionDim))).state;
    }
    return chunk;
}

EpisodeResult expert_rollout(const EnvSpec& spec, std::uint64_t episode_seed, Style style, int exec_horizon) {
    EnvState s = reset(spec, episode_seed);
    TrajectoryDigest digest;
    digest.add(s);
    EpisodeResult res;
    while (!s.done) {
        const auto chunk = scripted_expert(spec, s, style);
        for (int i = 0; i < exec_horizon && !s.done; ++i) {
            auto out = step(spec, s, decode_action(std::span<const float>(chunk).subspan(i * kActionDim, kActionDim)));
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

std::uint64_t demo_episode_seed(std::uint64_t seed, std::uint64_t index) { return counter_word(seed, 0xde770, index); }

GenerationResult generate_dataset(const EnvSpec& spec, int n_demos, std::uint64_t seed, const StyleWeights& weights,
                                  int stride, const LogFn& log) {
    spec.validate();
    if (n_demos < 1) {
        throw ValidationError("generate_dataset: n_demos must be >= 1");
    }
    if (stride < 1 || stride > kChunkSteps) {
        throw ValidationError("generate_dataset: stride must lie in [1, H]");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw ValidationError("generate_dataset: style weights must be non-negative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("generate_dataset: style weights must sum to 1");
    }

    GenerationResult out;
    auto& ds = out.dataset;
    ds.env_id = std::string(task_name(spec.task));
    ds.seed = seed;
    ds.cond_dim = static_cast<std::uint32_t>(spec.obs_dim());
    ds.chunk_dim = kChunkDim;
    ds.action_horizon = kChunkSteps;
    ds.action_dim = kActionDim;

    for (int d = 0; d < n_demos; ++d) {
        const double u = unit(counter_word(seed, 0x57e1e, static_cast<std::uint64_t>(d)));
        std::uint8_t idx = 0;
        double acc = 0.0;
        for (std::uint8_t k = 0; k < kStyleCount; ++k) {
            acc += weights[k];
            idx = k;
            if (u < acc && weights[k] > 0.0) {
                break;
            }
        }
        while (weights[idx] == 0.0 && idx > 0) {
            --idx;
        }
        const Style style = Style::from_index(idx);

        EnvState s = reset(spec, demo_episode_seed(seed, static_cast<std::uint64_t>(d)));
        std::vector<DataPair> pairs;
        while (!s.done) {
            DataPair p;
            p.cond = observe(spec, s);
            p.chunk = scripted_expert(spec, s, style);
            p.style = style.index();
            p.episode = static_cast<std::uint32_t>(d);
            for (int i = 0; i < stride && !s.done; ++i) {
                s = step(spec, s, decode_action(std::span<const float>(p.chunk).subspan(i * kActionDim, kActionDim)))
                        .state;
            }
            pairs.push_back(std::move(p));
        }
        if (!s.success) {
            ++out.skipped;
            if (log) {
                log("expert failed on demo " + std::to_string(d) + " (" + style.name() + "), skipped");
            }
            continue;
        }
        ds.pairs.insert(ds.pairs.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
    }
    if (out.skipped * 20 > n_demos) {
        throw ValidationError("generate_dataset: experts failed on " + std::to_string(out.skipped) + " of " +
                              std::to_string(n_demos) + " demos (more than 5%)");
    }
    ds.validate();
    return out;
}

} // namespace gt
