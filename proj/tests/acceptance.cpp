// End-to-end acceptance gates. Prints one PASS/FAIL line per criterion and
// exits non-zero if any gate fails. `acceptance 3 6` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli_driver.hpp"
#include "gt/binary_io.hpp"
#include "gt/config.hpp"
#include "gt/error.hpp"
#include "gt/flow.hpp"
#include "gt/format.hpp"
#include "gt/nn.hpp"
#include "gt/rng.hpp"
#include "gt/search.hpp"
#include "gt/train.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gt;
using testing_cli::fixture;

namespace {

// Tolerances and gates.
constexpr double kBaseLo = 0.40;
constexpr double kBaseHi = 0.75;
constexpr double kMinDelta = 0.10;
constexpr int kGoldenSeedsNeeded = 2;
constexpr double kOracleTol = 1e-2;
constexpr double kEulerTol = 1e-5;
constexpr double kGradRelTol = 1e-3;
constexpr double kGradFloor = 1e-3;
constexpr float kGradStep = 1e-3f;

struct Outcome {
    bool pass = false;
    std::string detail;
};

const fs::path& work_root() {
    static const fs::path root = [] {
        auto p = fs::temp_directory_path() / "gt_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

// Writes `cfg` next to its run directory and returns the config path.
std::string stage_config(RunConfig cfg, const std::string& name) {
    cfg.out_dir = (work_root() / name).string();
    fs::create_directories(work_root() / "configs");
    const auto path = work_root() / "configs" / (name + ".json");
    write_file_atomic(path.string(), serialize_run_config(cfg));
    return path.string();
}

void cli(const std::vector<std::string>& args, std::initializer_list<int> accepted = {kExitOk}) {
    const int code = testing_cli::run(args);
    if (std::find(accepted.begin(), accepted.end(), code) == accepted.end()) {
        std::string joined;
        for (const auto& a : args) {
            joined += a + ' ';
        }
        throw std::runtime_error("gt " + joined + "exited with " + std::to_string(code));
    }
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            rows.push_back(split_csv_line(line));
        }
    }
    return rows;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1 and 8: golden tickets on the biased reach-pick fixture, step ablation.

struct SeedRun {
    std::uint64_t seed = 0;
    double base = 0.0;
    double ticket = 0.0;
    double delta = 0.0;
    bool golden = false;
};

std::vector<SeedRun> g_seed_runs;
std::string g_seed1_dir;

Outcome golden_existence() {
    const auto base_cfg = load_run_config(fixture("reach_biased.json"));
    int golden = 0;
    bool base_in_range = true;
    std::string detail;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto cfg = base_cfg;
        cfg.seed = seed;
        const auto name = "golden_s" + std::to_string(seed);
        const auto path = stage_config(cfg, name);
        const auto t0 = std::chrono::steady_clock::now();
        for (const char* stage : {"gen-data", "train", "eval-base", "search"}) {
            cli({stage, "--config", path});
        }
        cli({"verify", "--config", path, "--require-golden"}, {kExitOk, kExitNotGolden});
        const auto v = read_json(work_root() / name / "verdict_s8.json");
        SeedRun r{seed, v.at("base_rate").get<double>(), v.at("heldout_rate").get<double>(),
                  v.at("delta").get<double>(), v.at("is_golden").get<bool>()};
        g_seed_runs.push_back(r);
        if (seed == 1) {
            g_seed1_dir = (work_root() / name).string();
        }
        const bool in_range = r.base >= kBaseLo && r.base <= kBaseHi;
        base_in_range = base_in_range && in_range;
        const bool win = r.golden && r.delta >= kMinDelta;
        golden += win ? 1 : 0;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        detail += "seed " + std::to_string(seed) + ": base " + fmt3(r.base) + " ticket " + fmt3(r.ticket) +
                  " delta " + fmt3(r.delta) + (win ? " golden" : " not-golden") + (in_range ? "" : " base-out-of-range") +
                  " (" + std::to_string(static_cast<int>(secs)) + "s); ";
    }
    detail += std::to_string(golden) + "/3 golden with delta >= " + fmt3(kMinDelta);
    // Reproduction of the recorded first run; other compilers may shift a few episodes.
    const auto recorded = read_json(fixture("recorded_rates.json")).at("seeds");
    int reproduced = 0;
    for (const auto& r : g_seed_runs) {
        const auto& rec = recorded.at(std::to_string(r.seed));
        reproduced += rec.at("base_rate").get<double>() == r.base && rec.at("heldout_rate").get<double>() == r.ticket;
    }
    detail += "; recorded rates reproduced on " + std::to_string(reproduced) + "/3 seeds (reported)";
    return {base_in_range && golden >= kGoldenSeedsNeeded, detail};
}

Outcome step_ablation() {
    if (g_seed1_dir.empty()) {
        const auto cfg = load_run_config(fixture("reach_biased.json"));
        const auto path = stage_config(cfg, "golden_s1");
        for (const char* stage : {"gen-data", "train", "eval-base", "search", "verify"}) {
            cli({stage, "--config", path});
        }
        g_seed1_dir = (work_root() / "golden_s1").string();
    }
    const auto path = (work_root() / "configs" / "golden_s1.json").string();
    for (const char* stage : {"eval-base", "search", "verify"}) {
        cli({stage, "--config", path, "--steps", "2"});
    }
    cli({"pareto", "--config", path, "--steps", "2"});
    cli({"pareto", "--config", path, "--steps", "8"});
    cli({"report", "--out", g_seed1_dir});

    const fs::path rd = fs::path(g_seed1_dir) / "report";
    std::string problems;
    auto expect_header = [&](const std::string& file, const std::string& header) {
        const auto rows = read_csv(rd / file);
        std::string got;
        if (!rows.empty()) {
            for (std::size_t i = 0; i < rows[0].size(); ++i) {
                got += (i ? "," : "") + rows[0][i];
            }
        }
        if (got != header) {
            problems += file + " header '" + got + "'; ";
        }
        return rows;
    };
    auto rate_ok = [](const std::string& s) {
        const double v = parse_double(s);
        return v >= 0.0 && v <= 1.0;
    };

    const auto ablation = expect_header("step_ablation.csv", "steps,base_rate,ticket_rate,delta,ticket_id,is_golden");
    std::map<int, std::pair<double, double>> by_steps;
    for (std::size_t i = 1; i < ablation.size(); ++i) {
        const auto& r = ablation[i];
        if (r.size() != 6 || !rate_ok(r[1]) || !rate_ok(r[2]) || r[4].size() != 8 || (r[5] != "0" && r[5] != "1") ||
            std::abs(parse_double(r[2]) - parse_double(r[1]) - parse_double(r[3])) > 1e-12) {
            problems += "bad step_ablation row " + std::to_string(i) + "; ";
            continue;
        }
        by_steps[std::stoi(r[0])] = {parse_double(r[1]), parse_double(r[2])};
    }
    if (by_steps.size() != 2 || !by_steps.count(2) || !by_steps.count(8)) {
        problems += "step_ablation must hold exactly steps 2 and 8; ";
    }
    const auto bars = expect_header("success_bars.csv", "steps,policy,ticket_id,success_rate,ci,episodes");
    if (bars.size() != 5) {
        problems += "success_bars needs 4 rows; ";
    }
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].size() != 6 || !rate_ok(bars[i][3]) || std::stoi(bars[i][5]) <= 0) {
            problems += "bad success_bars row " + std::to_string(i) + "; ";
        }
    }
    const auto scatter = expect_header("pareto_scatter.csv", "steps,ticket_id,success_rate,mean_success_len,on_frontier");
    std::set<int> frontier_steps;
    for (std::size_t i = 1; i < scatter.size(); ++i) {
        if (scatter[i].size() != 5 || !rate_ok(scatter[i][2]) || !(parse_double(scatter[i][3]) > 0.0)) {
            problems += "bad pareto_scatter row " + std::to_string(i) + "; ";
        } else if (scatter[i][4] == "1") {
            frontier_steps.insert(std::stoi(scatter[i][0]));
        }
    }
    if (frontier_steps != std::set<int>{2, 8}) {
        problems += "pareto_scatter lacks a frontier for both step counts; ";
    }
    const auto budget =
        expect_header("budget_tradeoff.csv", "steps,n_tickets,n_envs,budget,best_id,search_score,heldout_rate,gap");
    if (budget.size() < 5) {
        problems += "budget_tradeoff needs two splits per step count; ";
    }
    if (!problems.empty()) {
        return {false, problems};
    }
    const auto& s2 = by_steps[2];
    const auto& s8 = by_steps[8];
    const double gap2 = s2.second - s2.first;
    const double gap8 = s8.second - s8.first;
    return {true, "2 steps: base " + fmt3(s2.first) + " ticket " + fmt3(s2.second) + "; 8 steps: base " +
                      fmt3(s8.first) + " ticket " + fmt3(s8.second) + "; improvement is " +
                      (gap2 > gap8 ? "larger" : "not larger") + " at 2 steps (reported, not gated)"};
}

// ---------------------------------------------------------------------------
// 2: one (cond, chunk) pair, repeated to fill each epoch.

Outcome single_datapoint_oracle() {
    constexpr std::size_t kRepeats = 1000;
    Dataset ds;
    ds.env_id = "oracle";
    ds.cond_dim = 5;
    ds.chunk_dim = 24;
    ds.action_horizon = 8;
    ds.action_dim = 3;
    const auto cond = gaussian_vector(101, 0, 5);
    auto chunk = gaussian_vector(102, 0, 24);
    for (auto& v : chunk) {
        v = std::tanh(v);
    }
    for (std::size_t i = 0; i < kRepeats; ++i) {
        ds.pairs.push_back({cond, chunk, 0, 0});
    }
    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 20;
    tc.lr = 1e-3;
    tc.seed = 5;
    tc.validation_fraction = 0.1;
    const auto model = train(tc, ds, {256, 256, 256}).model;
    const auto norm_cond = model.normalize_cond(cond);
    std::string detail;
    bool pass = true;
    for (int steps : {2, 8}) {
        double worst = 0.0;
        for (std::uint64_t k = 0; k < 10; ++k) {
            const auto z1 = gaussian_vector(103, k, 24);
            const auto out = sample(model, norm_cond, z1, steps);
            for (std::size_t i = 0; i < 24; ++i) {
                worst = std::max(worst, static_cast<double>(std::abs(out[i] - chunk[i])));
            }
        }
        pass = pass && worst <= kOracleTol;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d steps worst |x - x*| = %.4g; ", steps, worst);
        detail += buf;
    }
    return {pass, detail + "tolerance " + format_double(kOracleTol)};
}

// ---------------------------------------------------------------------------
// 3: analytic single-point field.

class PointField final : public VelocityField {
public:
    explicit PointField(std::vector<float> target) : target_(std::move(target)) {}
    std::size_t chunk_dim() const override { return target_.size(); }
    std::size_t cond_dim() const override { return 0; }
    void velocity(std::span<const float> z, std::span<const float>, float tau, std::span<float> out) override {
        for (std::size_t i = 0; i < z.size(); ++i) {
            out[i] = (z[i] - target_[i]) / tau;
        }
    }

private:
    std::vector<float> target_;
};

Outcome euler_exactness() {
    double worst = 0.0;
    int cases = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + trial % 24;
        const auto target = gaussian_vector(201, trial, dim);
        const auto z1 = gaussian_vector(202, trial, dim);
        for (int steps : {1, 2, 8, 64}) {
            PointField f(target);
            const auto out = sample(f, {}, z1, steps);
            for (std::size_t i = 0; i < dim; ++i) {
                worst = std::max(worst, static_cast<double>(std::abs(out[i] - target[i])));
            }
            ++cases;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d cases, worst error %.3g (tolerance %g)", cases, worst, kEulerTol);
    return {worst <= kEulerTol, buf};
}

// ---------------------------------------------------------------------------
// 4: backprop against central differences of the double-precision oracle.

Outcome gradient_suite() {
    int checked = 0;
    int failures = 0;
    for (std::uint64_t trial = 0; trial < 25; ++trial) {
        SplitMix64 rng(300 + trial);
        const std::size_t in = 1 + rng.below(6);
        const std::size_t depth = 1 + rng.below(3);
        std::vector<std::size_t> widths{in};
        for (std::size_t d = 0; d < depth; ++d) {
            widths.push_back(2 + rng.below(8));
        }
        widths.push_back(1 + rng.below(4));
        const std::size_t out = widths.back();
        auto p = init_mlp(widths, 400 + trial);
        for (auto& layer : p.layers) {
            for (auto& b : layer.bias) {
                b = static_cast<float>(0.1 * rng.normal());
            }
        }
        const std::size_t batch = 1 + rng.below(4);
        DenseMatrix x(batch, in);
        DenseMatrix g(batch, out);
        std::vector<std::vector<double>> xs(batch), probe(batch);
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t i = 0; i < in; ++i) {
                x(b, i) = static_cast<float>(rng.normal());
                xs[b].push_back(x(b, i));
            }
            for (std::size_t j = 0; j < out; ++j) {
                g(b, j) = static_cast<float>(rng.normal());
                probe[b].push_back(g(b, j));
            }
        }
        const auto fwd = mlp_forward(p, x);
        const auto bwd = mlp_backward(p, fwd.cache, g);
        auto check = [&](float& param, double analytic, const std::function<double()>& loss) {
            const float saved = param;
            param = saved + kGradStep;
            const double up = loss();
            param = saved - kGradStep;
            const double down = loss();
            param = saved;
            const double fd = (up - down) / (static_cast<double>(saved + kGradStep) - static_cast<double>(saved - kGradStep));
            const double rel = std::abs(analytic - fd) / std::max({kGradFloor, std::abs(analytic), std::abs(fd)});
            failures += rel > kGradRelTol ? 1 : 0;
            ++checked;
        };
        auto param_loss = [&] { return oracle::probe_loss(p, xs, probe); };
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            auto& layer = p.layers[l];
            for (std::size_t k = 0; k < layer.weight.values.size(); ++k) {
                check(layer.weight.values[k], bwd.param_grads.layers[l].weight.values[k], param_loss);
            }
            for (std::size_t k = 0; k < layer.bias.size(); ++k) {
                check(layer.bias[k], bwd.param_grads.layers[l].bias[k], param_loss);
            }
        }
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t i = 0; i < in; ++i) {
                float xi = x(b, i);
                check(xi, bwd.input_grad(b, i), [&] {
                    auto moved = xs;
                    moved[b][i] = xi;
                    return oracle::probe_loss(p, moved, probe);
                });
            }
        }
    }
    return {failures == 0 && checked > 0,
            "25 net/input pairs, " + std::to_string(checked) + " partials, " + std::to_string(failures) + " failures"};
}

// ---------------------------------------------------------------------------
// 5: search against a mocked reward table.

Outcome search_argmax() {
    int wrong = 0;
    int tie_instances = 0;
    for (std::uint64_t inst = 0; inst < 100; ++inst) {
        SplitMix64 rng(500 + inst);
        const std::size_t n = 1 + rng.below(40);
        const std::size_t e = 1 + rng.below(10);
        const int levels = inst < 10 ? 1 : 1 + static_cast<int>(rng.below(4));
        std::vector<std::vector<double>> table(n, std::vector<double>(e));
        for (auto& row : table) {
            for (auto& v : row) {
                v = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
            }
        }
        std::vector<std::uint64_t> seeds;
        std::map<std::uint64_t, std::size_t> seed_index;
        for (std::size_t j = 0; j < e; ++j) {
            seeds.push_back(mix64(inst * 1000 + j));
            seed_index[seeds.back()] = j;
        }
        const RolloutFactory factory = [&table, &seed_index]() -> Rollout {
            return [&table, &seed_index](const NoiseSource& noise, std::uint64_t seed) {
                const double r = table[noise.ticket_value().origin_index][seed_index.at(seed)];
                return EpisodeResult{r, r > 0.0, 1, 0};
            };
        };
        SearchConfig sc{static_cast<int>(n), seeds, inst};
        const auto res = search(factory, 4, sc, 1 + static_cast<int>(inst % 3));

        std::size_t want = 0;
        double best = -1.0;
        std::vector<double> means;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (double v : table[i]) {
                s += v;
            }
            means.push_back(s / static_cast<double>(e));
            if (means.back() > best) {
                best = means.back();
                want = i;
            }
        }
        tie_instances += std::count(means.begin(), means.end(), best) > 1 ? 1 : 0;
        wrong += (res.best != want || res.best_ticket().origin_index != want ||
                  res.best_ticket() != Ticket::draw(inst, want, 4))
                     ? 1
                     : 0;
    }
    return {wrong == 0, "100 instances (" + std::to_string(tie_instances) + " with tied maxima, 10 all-equal), " +
                            std::to_string(wrong) + " wrong picks"};
}

// ---------------------------------------------------------------------------
// 6: frontier against the pairwise oracle.

TicketReport report_point(double rate, std::optional<double> len) {
    TicketReport r;
    r.success_rate = rate;
    r.mean_success_len = len;
    return r;
}

Outcome pareto_equivalence() {
    int mismatches = 0;
    for (std::uint64_t inst = 0; inst < 50; ++inst) {
        SplitMix64 rng(600 + inst);
        std::vector<TicketReport> reports;
        const std::uint64_t grid = 2 + rng.below(50); // coarse grids force ties
        for (int i = 0; i < 400; ++i) {
            const double rate = static_cast<double>(rng.below(51)) / 50.0;
            std::optional<double> len;
            if (rate > 0.0) {
                len = 10.0 + static_cast<double>(rng.below(grid));
            }
            reports.push_back(report_point(rate, len));
        }
        mismatches += pareto(reports) != oracle::brute_force_frontier(reports) ? 1 : 0;
    }
    const std::vector<std::vector<TicketReport>> edges{
        {},
        {report_point(0.5, 10)},
        {report_point(0.5, 10), report_point(0.5, 10), report_point(0.5, 10)},
        {report_point(0.0, std::nullopt), report_point(0.0, std::nullopt)},
        {report_point(0.9, 200), report_point(0.8, 180), report_point(0.7, 210)},
        {report_point(1.0, 30), report_point(1.0, 20), report_point(1.0, 20), report_point(0.0, std::nullopt)},
        {report_point(0.3, 5), report_point(0.6, 50), report_point(0.6, 5)},
    };
    int edge_mismatches = 0;
    for (const auto& e : edges) {
        edge_mismatches += pareto(e) != oracle::brute_force_frontier(e) ? 1 : 0;
    }
    const auto fixture_reports = reports_from_csv(slurp(fixture("pareto_reports.csv")));
    std::vector<std::string> expected_ids;
    {
        std::istringstream in(slurp(fixture("pareto_frontier.txt")));
        std::string id;
        while (in >> id) {
            expected_ids.push_back(id);
        }
    }
    std::vector<std::string> got_ids;
    for (auto i : pareto(fixture_reports)) {
        got_ids.push_back(fixture_reports[i].ticket_id);
    }
    const auto cli_dir = testing_cli::fresh_dir("acceptance_pareto");
    const bool cli_ok =
        testing_cli::run({"pareto", "--reports", fixture("pareto_reports.csv"), "--out", cli_dir.string()}) == 0 &&
        slurp(cli_dir / "pareto_s8.csv") == slurp(fixture("pareto_frontier.csv"));
    const bool fixture_ok = fixture_reports.size() == 400 && got_ids == expected_ids;
    return {mismatches == 0 && edge_mismatches == 0 && fixture_ok && cli_ok,
            "50 random x 400 reports: " + std::to_string(mismatches) + " mismatches; " + std::to_string(edges.size()) +
                " edge cases: " + std::to_string(edge_mismatches) + " mismatches; stored 400-report fixture " +
                (fixture_ok ? "matches" : "differs") + " (" + std::to_string(expected_ids.size()) +
                " frontier ids); gt pareto CSV " + (cli_ok ? "identical to" : "differs from") + " the stored frontier CSV"};
}

// ---------------------------------------------------------------------------
// 7: rerun every stage and compare every artifact byte for byte.

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), dir).string()] = slurp(e.path());
        }
    }
    return files;
}

std::string compare_runs(const fs::path& a, const fs::path& b) {
    const auto fa = snapshot(a);
    const auto fb = snapshot(b);
    std::string diffs;
    for (const auto& [name, bytes] : fa) {
        auto it = fb.find(name);
        if (it == fb.end()) {
            diffs += name + " missing in rerun; ";
        } else if (it->second != bytes) {
            diffs += name + " differs; ";
        }
    }
    for (const auto& [name, bytes] : fb) {
        if (!fa.count(name)) {
            diffs += name + " only in rerun; ";
        }
    }
    return diffs;
}

Outcome determinism() {
    auto reach = load_run_config(fixture("reach_biased.json"));
    reach.data.n_demos = 300;
    reach.train.epochs = 40;
    reach.train.hidden = {64, 64};
    reach.search = {16, 6};
    reach.heldout = {30, 30};
    reach.tradeoff_splits = {{16, 3}, {8, 6}};
    auto multi = load_run_config(fixture("multi_goal.json"));
    multi.data.n_demos = 300;
    multi.train.epochs = 40;
    multi.train.hidden = {64, 64};
    multi.cross_task = {6, 3, 8};
    multi.heldout = {12, 12};

    std::string diffs;
    std::size_t files = 0;
    for (const auto& [tag, jobs] : {std::pair{"a", "1"}, std::pair{"b", "1"}, std::pair{"c", "8"}}) {
        const auto rp = stage_config(reach, std::string("det_reach_") + tag);
        cli({"gen-data", "--config", rp});
        cli({"train", "--config", rp});
        for (const char* s : {"2", "8"}) {
            cli({"eval-base", "--config", rp, "--steps", s, "--jobs", jobs});
            cli({"search", "--config", rp, "--steps", s, "--jobs", jobs});
            cli({"verify", "--config", rp, "--steps", s, "--jobs", jobs});
            cli({"pareto", "--config", rp, "--steps", s});
        }
        cli({"report", "--config", rp});
        const auto mp = stage_config(multi, std::string("det_multi_") + tag);
        cli({"gen-data", "--config", mp});
        cli({"train", "--config", mp});
        cli({"eval-base", "--config", mp, "--jobs", jobs});
        cli({"cross-task", "--config", mp, "--jobs", jobs});
    }
    for (const char* kind : {"det_reach_", "det_multi_"}) {
        const auto a = work_root() / (std::string(kind) + "a");
        files += snapshot(a).size();
        for (const char* other : {"b", "c"}) {
            const auto d = compare_runs(a, work_root() / (std::string(kind) + other));
            if (!d.empty()) {
                diffs += std::string(kind) + other + ": " + d;
            }
        }
    }
    return {diffs.empty() && files > 0, diffs.empty() ? std::to_string(files) +
                                                            " artifacts byte-identical across two --jobs 1 runs and a "
                                                            "--jobs 8 run"
                                                      : diffs};
}

// ---------------------------------------------------------------------------
// 9: cross-task matrix on the K=4 multi-goal fixture.

Outcome cross_task() {
    const auto cfg = load_run_config(fixture("multi_goal.json"));
    const auto path = stage_config(cfg, "cross_k4");
    for (const char* stage : {"gen-data", "train", "eval-base", "cross-task"}) {
        cli({stage, "--config", path});
    }
    const fs::path dir = work_root() / "cross_k4";
    const auto m = read_csv(dir / "cross_task_s8.csv");
    const auto base = read_csv(dir / "base_tasks_s8.csv");
    const std::size_t k = cfg.task.goals.size();
    std::string problems;
    if (m.size() != k + 2 || m[0].size() != k + 2 || m[0][1] != "base") {
        return {false, "matrix shape is not (tasks + avg) x (base + " + std::to_string(k) + " tickets)"};
    }
    for (std::size_t t = 0; t < k; ++t) {
        const auto& row = m[t + 1];
        if (row.size() != k + 2 || row[0] != "task" + std::to_string(t)) {
            problems += "bad row " + std::to_string(t) + "; ";
            continue;
        }
        for (std::size_t c = 1; c < row.size(); ++c) {
            const double v = parse_double(row[c]);
            if (!(v >= 0.0 && v <= 1.0)) {
                problems += "entry out of [0,1]; ";
            }
        }
        if (base.size() != k + 1 || base[t + 1][0] != row[0] || base[t + 1][1] != row[1]) {
            problems += "base for task" + std::to_string(t) + " differs from eval-base; ";
        }
    }
    const auto summary = read_json(dir / "cross_task_summary_s8.json");
    const auto winners = summary.at("tickets_beating_base_on_2plus_tasks");
    std::string rates = "base";
    for (std::size_t t = 0; t < k; ++t) {
        rates += " " + fmt3(parse_double(m[t + 1][1]));
    }
    return {problems.empty(), problems.empty() ? "4x5 matrix in [0,1], base column equals eval-base (" + rates +
                                                     "); " + std::to_string(winners.size()) +
                                                     " ticket(s) beat base on >= 2 tasks (reported)"
                                               : problems};
}

} // namespace

int main(int argc, char** argv) {
    setenv("GT_LOG", "warn", 0);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"golden-ticket existence on the biased reach-pick fixture", golden_existence},
        {"single-datapoint denoising oracle", single_datapoint_oracle},
        {"Euler exactness on the analytic field", euler_exactness},
        {"backprop vs central differences", gradient_suite},
        {"random search picks the first maximum", search_argmax},
        {"Pareto frontier equals the brute-force set", pareto_equivalence},
        {"determinism of every pipeline artifact", determinism},
        {"step-count ablation report bundle", step_ablation},
        {"cross-task matrix on the multi-goal fixture", cross_task},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }
    std::vector<std::string> lines;
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) {
            continue;
        }
        std::fprintf(stderr, "running criterion %d: %s\n", id, criteria[i].first);
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        char head[160];
        std::snprintf(head, sizeof head, "%s [%d] %s (%.1fs): ", o.pass ? "PASS" : "FAIL", id, criteria[i].first, secs);
        lines.push_back(head + o.detail);
        std::printf("%s\n", lines.back().c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    std::printf("\n==== acceptance summary ====\n");
    for (const auto& l : lines) {
        std::printf("%s\n", l.c_str());
    }
    return all ? 0 : 1;
}
