#include "gt/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fmt/core.h>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gt/binary_io.hpp"
#include "gt/config.hpp"
#include "gt/error.hpp"
#include "gt/format.hpp"

namespace fs = std::filesystem;

namespace gt {

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    std::optional<int> steps;
    bool require_golden = false;
    std::string reports_path;
};

std::shared_ptr<spdlog::logger> make_logger() {
    auto log = spdlog::get("gt");
    if (!log) {
        log = spdlog::stderr_color_mt("gt");
        log->set_pattern("[%l] %v");
    }
    const char* level = std::getenv("GT_LOG");
    log->set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
    return log;
}

// Artifact names inside a run directory.
struct Paths {
    fs::path dir;

    fs::path dataset() const { return dir / "dataset.gtds"; }
    fs::path manifest() const { return dir / "dataset_manifest.json"; }
    fs::path model() const { return dir / "model.gtck"; }
    fs::path loss_trace() const { return dir / "loss_trace.csv"; }
    fs::path base_report(int s) const { return dir / fmt::format("base_report_s{}.csv", s); }
    fs::path base_tasks(int s) const { return dir / fmt::format("base_tasks_s{}.csv", s); }
    fs::path search_reports(int s) const { return dir / fmt::format("search_reports_s{}.csv", s); }
    fs::path tickets_dir(int s) const { return dir / fmt::format("tickets_s{}", s); }
    fs::path best_ticket(int s) const { return dir / fmt::format("best_ticket_s{}.json", s); }
    fs::path verdict(int s) const { return dir / fmt::format("verdict_s{}.json", s); }
    fs::path tradeoff(int s) const { return dir / fmt::format("tradeoff_s{}.csv", s); }
    fs::path pareto(int s) const { return dir / fmt::format("pareto_s{}.csv", s); }
    fs::path cross_task(int s) const { return dir / fmt::format("cross_task_s{}.csv", s); }
    fs::path cross_summary(int s) const { return dir / fmt::format("cross_task_summary_s{}.json", s); }
    fs::path cross_tickets_dir(int s) const { return dir / fmt::format("cross_tickets_s{}", s); }
    fs::path report_dir() const { return dir / "report"; }
};

void write_artifact(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    write_file_atomic(path.string(), contents);
}

struct Context {
    RunConfig cfg;
    SeedPlan seeds;
    Paths paths;
    PolicyConfig policy;
    int steps = 8;
    int jobs = 1;
    std::shared_ptr<spdlog::logger> log;
};

Context load_context(const Options& o, const std::shared_ptr<spdlog::logger>& log) {
    if (o.config_path.empty()) {
        throw ValidationError("--config is required for this subcommand");
    }
    Context c;
    c.cfg = load_run_config(o.config_path);
    if (!o.out_dir.empty()) {
        c.cfg.out_dir = o.out_dir;
    }
    c.seeds = SeedPlan::from_global(c.cfg.seed);
    c.paths.dir = c.cfg.out_dir;
    c.policy = c.cfg.policy_config(o.steps);
    c.steps = c.policy.num_steps;
    c.jobs = o.jobs;
    c.log = log;
    return c;
}

void check_dataset_matches(const Dataset& ds, const EnvSpec& spec) {
    if (ds.env_id != task_name(spec.task)) {
        throw DimensionError("dataset was generated for task '" + ds.env_id + "', config asks for '" +
                             std::string(task_name(spec.task)) + "'");
    }
    if (ds.cond_dim != spec.obs_dim() || ds.chunk_dim != static_cast<std::uint32_t>(kChunkDim)) {
        throw DimensionError("dataset widths (C=" + std::to_string(ds.cond_dim) + ", D=" +
                             std::to_string(ds.chunk_dim) + ") do not match the configured task (C=" +
                             std::to_string(spec.obs_dim()) + ", D=" + std::to_string(kChunkDim) + ")");
    }
}

FlowModel load_checked_model(const Context& c) {
    auto model = load_model(c.paths.model().string());
    if (model.cond_dim != c.cfg.task.obs_dim() || model.chunk_dim != static_cast<std::size_t>(kChunkDim) ||
        model.action_dim != static_cast<std::size_t>(kActionDim)) {
        throw DimensionError("checkpoint " + c.paths.model().string() + " has C=" + std::to_string(model.cond_dim) +
                             ", D=" + std::to_string(model.chunk_dim) + " but the configured task needs C=" +
                             std::to_string(c.cfg.task.obs_dim()) + ", D=" + std::to_string(kChunkDim) +
                             "; retrain with this config");
    }
    return model;
}

std::vector<std::uint64_t> search_seeds(const Context& c) {
    return episode_seeds(c.seeds.search_envs, static_cast<std::size_t>(c.cfg.search.n_envs));
}

std::vector<std::uint64_t> heldout_seeds(const Context& c) {
    return episode_seeds(c.seeds.heldout_envs, static_cast<std::size_t>(c.cfg.heldout.n_envs));
}

EnvSpec task_spec(const Context& c, int task) {
    EnvSpec s = c.cfg.task;
    s.fixed_task = task;
    return s;
}

std::vector<std::vector<std::uint64_t>> cross_eval_seeds(const Context& c) {
    std::vector<std::vector<std::uint64_t>> out;
    for (std::size_t k = 0; k < c.cfg.task.goals.size(); ++k) {
        out.push_back(episode_seeds(cross_eval_seed(c.cfg.seed, static_cast<int>(k)),
                                    static_cast<std::size_t>(c.cfg.cross_task.n_eval_envs)));
    }
    return out;
}

void require_multi_goal(const Context& c) {
    if (c.cfg.task.task != Task::multi_goal) {
        throw ValidationError("cross-task needs a multi-goal task config");
    }
}

int cmd_gen_data(const Context& c) {
    const auto spec = c.cfg.demo_spec();
    auto gen = generate_dataset(spec, c.cfg.data.n_demos, c.seeds.data, c.cfg.data.style_weights, c.cfg.data.stride,
                                [&](const std::string& m) { c.log->debug("{}", m); });
    const auto bytes = encode_dataset(gen.dataset);
    write_artifact(c.paths.dataset(), bytes);
    nlohmann::ordered_json m;
    m["version"] = kDatasetVersion;
    m["env_id"] = gen.dataset.env_id;
    m["seed"] = gen.dataset.seed;
    m["n_demos"] = c.cfg.data.n_demos;
    m["n_pairs"] = gen.dataset.pairs.size();
    m["skipped"] = gen.skipped;
    nlohmann::ordered_json w;
    for (std::uint8_t i = 0; i < kStyleCount; ++i) {
        w[Style::from_index(i).name()] = c.cfg.data.style_weights[i];
    }
    m["style_weights"] = w;
    m["demo_horizon"] = spec.horizon;
    m["content_hash"] = hex64(content_hash(bytes));
    write_artifact(c.paths.manifest(), m.dump(2) + "\n");
    fmt::print("gen-data: {} demos -> {} pairs ({} skipped), hash {}\n", c.cfg.data.n_demos, gen.dataset.pairs.size(),
               gen.skipped, hex64(content_hash(bytes)));
    return kExitOk;
}

int cmd_train(const Context& c) {
    const auto bytes = read_file(c.paths.dataset().string());
    if (fs::exists(c.paths.manifest())) {
        std::string recorded;
        try {
            recorded = nlohmann::json::parse(read_file(c.paths.manifest().string())).at("content_hash").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ArtifactError("corrupt manifest " + c.paths.manifest().string() + ": " + e.what());
        }
        if (recorded != hex64(content_hash(bytes))) {
            throw ArtifactError("dataset " + c.paths.dataset().string() +
                                " does not match its manifest hash; rerun gen-data");
        }
    }
    const auto ds = decode_dataset(bytes);
    check_dataset_matches(ds, c.cfg.task);
    auto result = train(c.cfg.train_config(), ds, c.cfg.train.hidden, [&](const EpochLoss& e) {
        c.log->info("epoch {:>3}  train {:.5f}  val {:.5f}", e.epoch, e.train_loss, e.val_loss);
    });
    result.model.default_num_steps = c.cfg.policy.num_steps;
    save_model(c.paths.model().string(), result.model);
    write_artifact(c.paths.loss_trace(), loss_trace_csv(result.trace));
    const auto& last = result.trace.back();
    fmt::print("train: {} epochs on {} pairs, final train {:.5f} val {:.5f}\n", c.cfg.train.epochs, ds.pairs.size(),
               last.train_loss, last.val_loss);
    return kExitOk;
}

int cmd_eval_base(const Context& c) {
    const auto model = load_checked_model(c);
    const auto base_noise = NoiseSource::gaussian(c.seeds.base_noise);
    const auto held = heldout_seeds(c);
    const std::vector<std::uint64_t> seeds(held.begin(), held.begin() + c.cfg.heldout.base_episodes);
    const auto report = evaluate(policy_rollouts(model, c.policy, c.cfg.task), base_noise, seeds, c.jobs);
    write_artifact(c.paths.base_report(c.steps), reports_to_csv({report}));
    fmt::print("eval-base ({} steps): success {:.3f} +/- {:.3f} over {} episodes\n", c.steps, report.success_rate,
               report.ci, seeds.size());
    if (c.cfg.task.task == Task::multi_goal) {
        const auto per_task = cross_eval_seeds(c);
        std::string csv = "task,success_rate,ci,episodes\n";
        for (std::size_t k = 0; k < per_task.size(); ++k) {
            const auto r = evaluate(policy_rollouts(model, c.policy, task_spec(c, static_cast<int>(k))), base_noise,
                                    per_task[k], c.jobs);
            csv += fmt::format("task{},{},{},{}\n", k, format_double(r.success_rate), format_double(r.ci),
                               per_task[k].size());
            fmt::print("  task{}: {:.3f}\n", k, r.success_rate);
        }
        write_artifact(c.paths.base_tasks(c.steps), csv);
    }
    return kExitOk;
}

SearchConfig main_search_config(const Context& c) {
    SearchConfig sc;
    sc.n_tickets = c.cfg.search.n_tickets;
    sc.search_env_seeds = search_seeds(c);
    sc.ticket_seed = c.seeds.tickets;
    return sc;
}

int cmd_search(const Context& c) {
    const auto model = load_checked_model(c);
    const auto sc = main_search_config(c);
    c.log->info("searching {} tickets x {} environments with {} job(s)", sc.n_tickets, sc.search_env_seeds.size(),
                c.jobs);
    const auto res = search(policy_rollouts(model, c.policy, c.cfg.task), model.chunk_dim, sc, c.jobs);
    write_artifact(c.paths.search_reports(c.steps), reports_to_csv(res.ranked_reports()));
    for (const auto& t : res.tickets) {
        write_artifact(c.paths.tickets_dir(c.steps) / (t.id + ".json"), ticket_to_json(t));
    }
    write_artifact(c.paths.best_ticket(c.steps), ticket_to_json(res.best_ticket()));
    const auto& best = res.reports[res.best];
    fmt::print("search ({} steps): best ticket {} (index {}) mean return {:.3f}, success {:.3f}\n", c.steps,
               best.ticket_id, res.best, best.mean_return, best.success_rate);
    return kExitOk;
}

// Rebuilds a search result in draw order from the persisted ranking.
SearchResult reload_search(const Context& c, std::size_t dim) {
    const auto path = c.paths.search_reports(c.steps);
    const auto reports = reports_from_csv(read_file(path.string()));
    std::map<std::string, TicketReport> by_id;
    for (const auto& r : reports) {
        by_id[r.ticket_id] = r;
    }
    SearchResult sr;
    const auto sc = main_search_config(c);
    for (int i = 0; i < sc.n_tickets; ++i) {
        auto t = Ticket::draw(sc.ticket_seed, static_cast<std::uint64_t>(i), dim);
        auto it = by_id.find(t.id);
        if (it == by_id.end() || it->second.per_env_returns.size() != sc.search_env_seeds.size()) {
            throw ArtifactError(path.string() + " does not match the configured search (ticket " + t.id +
                                " missing or wrong width); rerun search");
        }
        sr.reports.push_back(it->second);
        sr.tickets.push_back(std::move(t));
    }
    std::vector<double> scores;
    for (const auto& r : sr.reports) {
        scores.push_back(r.mean_return);
    }
    sr.best = first_argmax(scores);
    sr.ranking = rank_by_score(scores);
    return sr;
}

int cmd_verify(const Context& c, bool require_golden) {
    const auto model = load_checked_model(c);
    const auto candidate = ticket_from_json(read_file(c.paths.best_ticket(c.steps).string()));
    const auto factory = policy_rollouts(model, c.policy, c.cfg.task);
    const auto held = heldout_seeds(c);
    const auto verdict = verify_golden(factory, candidate, held, search_seeds(c), c.seeds.base_noise,
                                       static_cast<std::size_t>(c.cfg.heldout.base_episodes), c.jobs);
    write_artifact(c.paths.verdict(c.steps), verdict_to_json(verdict));

    auto splits = c.cfg.tradeoff_splits;
    if (splits.empty()) {
        const auto n = static_cast<std::size_t>(c.cfg.search.n_tickets);
        const auto e = static_cast<std::size_t>(c.cfg.search.n_envs);
        splits = {{n, std::max<std::size_t>(1, e / 5)}, {std::max<std::size_t>(1, n / 5), e}};
    }
    const auto rows = budget_tradeoff(factory, reload_search(c, model.chunk_dim), splits, held, c.jobs);
    write_artifact(c.paths.tradeoff(c.steps), tradeoff_csv(rows));

    fmt::print("verify ({} steps): ticket {} held-out {:.3f} +/- {:.3f} vs base {:.3f} +/- {:.3f}, delta {:+.3f} -> {}\n",
               c.steps, verdict.ticket_id, verdict.heldout_rate, verdict.heldout_ci, verdict.base_rate,
               verdict.base_ci, verdict.delta, verdict.is_golden ? "golden" : "not golden");
    if (require_golden && !verdict.is_golden) {
        return kExitNotGolden;
    }
    return kExitOk;
}

int cmd_pareto(const Options& o, const std::shared_ptr<spdlog::logger>& log) {
    fs::path reports_path;
    fs::path out;
    int steps = o.steps.value_or(8);
    if (!o.config_path.empty()) {
        const auto c = load_context(o, log);
        steps = c.steps;
        out = c.paths.pareto(steps);
        reports_path = c.paths.search_reports(steps);
    }
    if (!o.reports_path.empty()) {
        reports_path = o.reports_path;
    }
    if (!o.out_dir.empty()) {
        out = Paths{o.out_dir}.pareto(steps);
    }
    if (reports_path.empty() || out.empty()) {
        throw ValidationError("pareto needs --config, or --reports together with --out");
    }
    const auto reports = reports_from_csv(read_file(reports_path.string()));
    if (reports.empty()) {
        throw ValidationError("pareto: " + reports_path.string() + " holds no reports");
    }
    std::vector<TicketReport> frontier;
    for (auto i : pareto(reports)) {
        frontier.push_back(reports[i]);
    }
    write_artifact(out, reports_to_csv(frontier));
    fmt::print("pareto: {} of {} reports on the frontier -> {}\n", frontier.size(), reports.size(), out.string());
    return kExitOk;
}

int cmd_cross_task(const Context& c) {
    require_multi_goal(c);
    const auto model = load_checked_model(c);
    const int k_tasks = static_cast<int>(c.cfg.task.goals.size());
    auto factory_for = [&](int k) { return policy_rollouts(model, c.policy, task_spec(c, k)); };
    std::vector<TaggedTicket> tickets;
    for (int k = 0; k < k_tasks; ++k) {
        SearchConfig sc;
        sc.n_tickets = c.cfg.cross_task.n_tickets;
        sc.search_env_seeds = episode_seeds(cross_search_seed(c.cfg.seed, k),
                                            static_cast<std::size_t>(c.cfg.cross_task.n_search_envs));
        sc.ticket_seed = cross_ticket_seed(c.cfg.seed, k);
        const auto res = search(factory_for(k), model.chunk_dim, sc, c.jobs);
        c.log->info("task{}: best ticket {} search score {:.3f}", k, res.best_ticket().id,
                    res.reports[res.best].mean_return);
        write_artifact(c.paths.cross_tickets_dir(c.steps) / fmt::format("task{}.json", k),
                       ticket_to_json(res.best_ticket()));
        tickets.push_back({res.best_ticket(), k});
    }
    const auto m = cross_task_matrix(factory_for, k_tasks, tickets, cross_eval_seeds(c), c.seeds.base_noise, c.jobs);
    write_artifact(c.paths.cross_task(c.steps), m.to_csv());

    nlohmann::ordered_json summary;
    summary["tasks"] = k_tasks;
    summary["columns"] = m.columns;
    summary["tickets_beating_base_on_2plus_tasks"] = nlohmann::ordered_json::array();
    for (std::size_t col = 1; col < m.columns.size(); ++col) {
        int wins = 0;
        for (const auto& row : m.rates) {
            wins += row[col] > row[0] ? 1 : 0;
        }
        if (wins >= 2) {
            summary["tickets_beating_base_on_2plus_tasks"].push_back(m.columns[col]);
        }
    }
    write_artifact(c.paths.cross_summary(c.steps), summary.dump(2) + "\n");
    fmt::print("cross-task ({} steps): {} tasks x {} columns; {} ticket(s) beat base on >= 2 tasks\n", c.steps,
               k_tasks, m.columns.size(), summary["tickets_beating_base_on_2plus_tasks"].size());
    return kExitOk;
}

nlohmann::json read_json_artifact(const fs::path& p) {
    try {
        return nlohmann::json::parse(read_file(p.string()));
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError("corrupt artifact " + p.string() + ": " + e.what());
    }
}

int cmd_report(const Options& o, const std::shared_ptr<spdlog::logger>& log) {
    fs::path dir = o.out_dir;
    if (dir.empty()) {
        if (o.config_path.empty()) {
            throw ValidationError("report needs --out (or --config naming the run directory)");
        }
        dir = load_context(o, log).paths.dir;
    }
    const Paths p{dir};
    const std::vector<int> step_counts{2, 8};
    std::vector<std::string> missing;
    for (int s : step_counts) {
        for (const auto& f : {p.base_report(s), p.search_reports(s), p.verdict(s), p.pareto(s), p.tradeoff(s)}) {
            if (!fs::exists(f)) {
                missing.push_back(f.string());
            }
        }
    }
    if (!missing.empty()) {
        std::string msg = "report: missing artifacts:";
        for (const auto& m : missing) {
            msg += "\n  " + m;
        }
        throw ArtifactError(msg);
    }

    std::string bars = "steps,policy,ticket_id,success_rate,ci,episodes\n";
    std::string ablation = "steps,base_rate,ticket_rate,delta,ticket_id,is_golden\n";
    std::string scatter = "steps,ticket_id,success_rate,mean_success_len,on_frontier\n";
    std::string budget = "steps,n_tickets,n_envs,budget,best_id,search_score,heldout_rate,gap\n";
    for (int s : step_counts) {
        const auto v = read_json_artifact(p.verdict(s));
        try {
            bars += fmt::format("{},base,,{},{},{}\n", s, format_double(v.at("base_rate").get<double>()),
                                format_double(v.at("base_ci").get<double>()), v.at("base_episodes").get<int>());
            bars += fmt::format("{},ticket,{},{},{},{}\n", s, v.at("ticket_id").get<std::string>(),
                                format_double(v.at("heldout_rate").get<double>()),
                                format_double(v.at("heldout_ci").get<double>()), v.at("heldout_episodes").get<int>());
            ablation += fmt::format("{},{},{},{},{},{}\n", s, format_double(v.at("base_rate").get<double>()),
                                    format_double(v.at("heldout_rate").get<double>()),
                                    format_double(v.at("delta").get<double>()), v.at("ticket_id").get<std::string>(),
                                    v.at("is_golden").get<bool>() ? 1 : 0);
        } catch (const nlohmann::json::exception& e) {
            throw ArtifactError("corrupt artifact " + p.verdict(s).string() + ": " + e.what());
        }

        const auto reports = reports_from_csv(read_file(p.search_reports(s).string()));
        std::vector<bool> on(reports.size(), false);
        for (auto i : pareto(reports)) {
            on[i] = true;
        }
        for (std::size_t i = 0; i < reports.size(); ++i) {
            if (!reports[i].mean_success_len) {
                continue; // never succeeded: no finite length to plot
            }
            scatter += fmt::format("{},{},{},{},{}\n", s, reports[i].ticket_id, format_double(reports[i].success_rate),
                                   format_double(*reports[i].mean_success_len), on[i] ? 1 : 0);
        }

        const auto tradeoff = read_file(p.tradeoff(s).string());
        std::istringstream in(tradeoff);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (!line.empty()) {
                budget += fmt::format("{},{}\n", s, line);
            }
        }
    }
    const auto rd = p.report_dir();
    write_artifact(rd / "success_bars.csv", bars);
    write_artifact(rd / "step_ablation.csv", ablation);
    write_artifact(rd / "pareto_scatter.csv", scatter);
    write_artifact(rd / "budget_tradeoff.csv", budget);
    fmt::print("report: wrote {}\n", rd.string());
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    auto log = make_logger();
    CLI::App app{"Golden-ticket search for flow-matching policies"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* cfg = sub->add_option("--config", o.config_path, "run config JSON");
        if (config_required) {
            cfg->required();
        }
        sub->add_option("--out", o.out_dir, "run directory (overrides out_dir in the config)");
        sub->add_option("--jobs", o.jobs, "parallel evaluation workers")->check(CLI::PositiveNumber);
        sub->add_option("--steps", o.steps, "sampler steps")->check(CLI::IsMember({2, 8}));
    };
    auto* gen = app.add_subcommand("gen-data", "record expert demonstrations");
    auto* trn = app.add_subcommand("train", "train the flow policy");
    auto* base = app.add_subcommand("eval-base", "evaluate the Gaussian-noise base policy on held-out seeds");
    auto* srch = app.add_subcommand("search", "random search over constant noise tickets");
    auto* ver = app.add_subcommand("verify", "held-out check of the best ticket and budget trade-off");
    auto* par = app.add_subcommand("pareto", "success-rate / episode-length frontier of search reports");
    auto* cross = app.add_subcommand("cross-task", "per-task search and transfer matrix (multi-goal)");
    auto* rep = app.add_subcommand("report", "plot-ready CSV bundle from a finished run");
    for (auto* s : {gen, trn, base, srch, ver, cross}) {
        add_common(s, true);
    }
    add_common(par, false);
    add_common(rep, false);
    ver->add_flag("--require-golden", o.require_golden, "exit 3 unless the ticket is golden");
    par->add_option("--reports", o.reports_path, "reports CSV to analyse instead of the run's search output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*par) {
            return cmd_pareto(o, log);
        }
        if (*rep) {
            return cmd_report(o, log);
        }
        const auto c = load_context(o, log);
        if (*gen) {
            return cmd_gen_data(c);
        }
        if (*trn) {
            return cmd_train(c);
        }
        if (*base) {
            return cmd_eval_base(c);
        }
        if (*srch) {
            return cmd_search(c);
        }
        if (*ver) {
            return cmd_verify(c, o.require_golden);
        }
        if (*cross) {
            return cmd_cross_task(c);
        }
    } catch (const ValidationError& e) {
        log->error("{}", e.what());
        return kExitValidation;
    } catch (const ArtifactError& e) {
        log->error("{}", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        log->error("{}", e.what());
        return kExitFailure;
    }
    return kExitFailure;
}

} // namespace gt
