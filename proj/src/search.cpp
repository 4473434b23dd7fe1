#include "gt/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <json.hpp>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "gt/error.hpp"
#include "gt/format.hpp"

namespace gt {

void SearchConfig::validate() const {
    if (n_tickets < 1) {
        throw ValidationError("search: n_tickets must be >= 1");
    }
    if (search_env_seeds.empty()) {
        throw ValidationError("search: the search environment set is empty");
    }
}

double binomial_ci95(double rate, std::size_t n) {
    if (n == 0) {
        return 0.0;
    }
    return 1.96 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(n));
}

TicketReport make_report(const std::string& id, const std::vector<EpisodeResult>& episodes) {
    TicketReport r;
    r.ticket_id = id;
    if (episodes.empty()) {
        return r;
    }
    double total = 0.0;
    double len_total = 0.0;
    std::size_t wins = 0;
    for (const auto& e : episodes) {
        total += e.ret;
        r.per_env_returns.push_back(e.ret);
        if (e.success) {
            ++wins;
            len_total += e.length;
        }
    }
    const double n = static_cast<double>(episodes.size());
    r.mean_return = total / n;
    r.success_rate = static_cast<double>(wins) / n;
    if (wins > 0) {
        r.mean_success_len = len_total / static_cast<double>(wins);
    }
    r.ci = binomial_ci95(r.success_rate, episodes.size());
    return r;
}

RolloutFactory policy_rollouts(const FlowModel& model, const PolicyConfig& cfg, const EnvSpec& spec) {
    spec.validate();
    cfg.validate(model.action_horizon);
    return [&model, cfg, spec]() -> Rollout {
        auto policy = std::make_shared<Policy>(model, cfg);
        return [policy, spec](const NoiseSource& noise, std::uint64_t seed) { return policy->rollout(spec, noise, seed); };
    };
}

std::vector<std::vector<EpisodeResult>> evaluate_grid(const RolloutFactory& factory,
                                                      const std::vector<NoiseSource>& sources,
                                                      const std::vector<std::uint64_t>& seeds, int jobs) {
    if (jobs < 1) {
        throw ValidationError("jobs must be >= 1");
    }
    std::vector<std::vector<EpisodeResult>> out(sources.size(), std::vector<EpisodeResult>(seeds.size()));
    const std::size_t total = sources.size() * seeds.size();
    if (total == 0) {
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&]() {
        try {
            Rollout run = factory();
            for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
                const std::size_t i = k / seeds.size();
                const std::size_t j = k % seeds.size();
                out[i][j] = run(sources[i], seeds[j]);
            }
        } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) {
                failure = std::current_exception();
            }
            next.store(total);
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), total);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

TicketReport evaluate(const RolloutFactory& factory, const NoiseSource& noise, const std::vector<std::uint64_t>& seeds,
                      int jobs) {
    if (seeds.empty()) {
        throw ValidationError("evaluate: no evaluation seeds");
    }
    const auto grid = evaluate_grid(factory, {noise}, seeds, jobs);
    return make_report(noise.is_ticket() ? noise.ticket_value().id : "base", grid[0]);
}

std::size_t first_argmax(const std::vector<double>& scores) {
    if (scores.empty()) {
        throw ValidationError("argmax of an empty list");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> rank_by_score(const std::vector<double>& scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return idx;
}

std::vector<TicketReport> SearchResult::ranked_reports() const {
    std::vector<TicketReport> out;
    out.reserve(ranking.size());
    for (auto i : ranking) {
        out.push_back(reports[i]);
    }
    return out;
}

SearchResult search(const RolloutFactory& factory, std::size_t dim, const SearchConfig& sc, int jobs) {
    sc.validate();
    SearchResult res;
    std::vector<NoiseSource> sources;
    for (int i = 0; i < sc.n_tickets; ++i) {
        res.tickets.push_back(Ticket::draw(sc.ticket_seed, static_cast<std::uint64_t>(i), dim));
        sources.push_back(NoiseSource::ticket(res.tickets.back()));
    }
    const auto grid = evaluate_grid(factory, sources, sc.search_env_seeds, jobs);
    std::vector<double> scores;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        res.reports.push_back(make_report(res.tickets[i].id, grid[i]));
        scores.push_back(res.reports.back().mean_return);
    }
    res.best = first_argmax(scores);
    res.ranking = rank_by_score(scores);
    return res;
}

void check_disjoint(const std::vector<std::uint64_t>& held_out, const std::vector<std::uint64_t>& search_seeds) {
    const std::unordered_set<std::uint64_t> searched(search_seeds.begin(), search_seeds.end());
    std::size_t shared = 0;
    std::uint64_t example = 0;
    for (auto s : held_out) {
        if (searched.count(s)) {
            if (shared++ == 0) {
                example = s;
            }
        }
    }
    if (shared > 0) {
        throw ValidationError("held-out seeds overlap the search seeds: " + std::to_string(shared) +
                              " shared (first: " + std::to_string(example) +
                              "); use a different held-out seed tag or list");
    }
}

GoldenVerdict verify_golden(const RolloutFactory& factory, const Ticket& candidate,
                            const std::vector<std::uint64_t>& held_out, const std::vector<std::uint64_t>& search_seeds,
                            std::uint64_t base_stream_seed, std::size_t base_episodes, int jobs) {
    if (held_out.empty()) {
        throw ValidationError("verify: no held-out seeds");
    }
    if (base_episodes < 1 || base_episodes > held_out.size()) {
        throw ValidationError("verify: base_episodes must lie in [1, number of held-out seeds]");
    }
    check_disjoint(held_out, search_seeds);
    const std::vector<std::uint64_t> base_seeds(held_out.begin(), held_out.begin() + static_cast<std::ptrdiff_t>(base_episodes));
    const auto cand = evaluate(factory, NoiseSource::ticket(candidate), held_out, jobs);
    const auto base = evaluate(factory, NoiseSource::gaussian(base_stream_seed), base_seeds, jobs);
    GoldenVerdict v;
    v.ticket_id = candidate.id;
    v.heldout_rate = cand.success_rate;
    v.heldout_ci = cand.ci;
    v.base_rate = base.success_rate;
    v.base_ci = base.ci;
    v.delta = cand.success_rate - base.success_rate;
    v.is_golden = v.delta > cand.ci + base.ci;
    v.heldout_episodes = held_out.size();
    v.base_episodes = base_episodes;
    return v;
}

namespace {

double length_key(const TicketReport& r) {
    return r.mean_success_len ? *r.mean_success_len : std::numeric_limits<double>::infinity();
}

} // namespace

bool dominates(const TicketReport& a, const TicketReport& b) {
    const double la = length_key(a);
    const double lb = length_key(b);
    return a.success_rate >= b.success_rate && la <= lb && (a.success_rate > b.success_rate || la < lb);
}

std::vector<std::size_t> pareto(const std::vector<TicketReport>& reports) {
    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (reports[a].success_rate != reports[b].success_rate) {
            return reports[a].success_rate > reports[b].success_rate;
        }
        return length_key(reports[a]) < length_key(reports[b]);
    });
    // Sweep groups of equal rate from best to worst; a member survives if it
    // has its group's minimum length and beats every better-rate length.
    std::vector<std::size_t> keep;
    bool have_better = false;
    double better_min = 0.0;
    for (std::size_t g = 0; g < order.size();) {
        std::size_t end = g;
        while (end < order.size() && reports[order[end]].success_rate == reports[order[g]].success_rate) {
            ++end;
        }
        const double group_min = length_key(reports[order[g]]);
        for (std::size_t k = g; k < end; ++k) {
            const double len = length_key(reports[order[k]]);
            if (len == group_min && (!have_better || len < better_min)) {
                keep.push_back(order[k]);
            }
        }
        better_min = have_better ? std::min(better_min, group_min) : group_min;
        have_better = true;
        g = end;
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

std::string CrossTaskMatrix::to_csv() const {
    std::string out = "task";
    for (const auto& c : columns) {
        out += ',' + csv_field(c);
    }
    out += '\n';
    for (std::size_t k = 0; k < rates.size(); ++k) {
        out += "task" + std::to_string(k);
        for (double v : rates[k]) {
            out += ',' + format_double(v);
        }
        out += '\n';
    }
    out += "avg";
    for (double v : column_average) {
        out += ',' + format_double(v);
    }
    out += '\n';
    return out;
}

CrossTaskMatrix cross_task_matrix(const std::function<RolloutFactory(int)>& factory_for_task, int n_tasks,
                                  const std::vector<TaggedTicket>& tickets,
                                  const std::vector<std::vector<std::uint64_t>>& eval_seeds_per_task,
                                  std::uint64_t base_stream_seed, int jobs) {
    if (n_tasks < 1 || eval_seeds_per_task.size() != static_cast<std::size_t>(n_tasks)) {
        throw ValidationError("cross-task: need one seed list per task");
    }
    CrossTaskMatrix m;
    std::vector<NoiseSource> sources{NoiseSource::gaussian(base_stream_seed)};
    m.columns.push_back("base");
    for (const auto& t : tickets) {
        if (t.source_task < 0 || t.source_task >= n_tasks) {
            throw ValidationError("cross-task: ticket " + t.ticket.id + " has an out-of-range source task");
        }
        sources.push_back(NoiseSource::ticket(t.ticket));
        m.columns.push_back(t.ticket.id + "@task" + std::to_string(t.source_task));
    }
    m.column_average.assign(sources.size(), 0.0);
    for (int k = 0; k < n_tasks; ++k) {
        const auto& seeds = eval_seeds_per_task[static_cast<std::size_t>(k)];
        if (seeds.empty()) {
            throw ValidationError("cross-task: task " + std::to_string(k) + " has no evaluation seeds");
        }
        const auto grid = evaluate_grid(factory_for_task(k), sources, seeds, jobs);
        std::vector<double> row;
        for (std::size_t c = 0; c < grid.size(); ++c) {
            row.push_back(make_report(m.columns[c], grid[c]).success_rate);
            m.column_average[c] += row.back() / n_tasks;
        }
        m.rates.push_back(std::move(row));
    }
    return m;
}

std::vector<TradeoffRow> budget_tradeoff(const RolloutFactory& factory, const SearchResult& sr,
                                         const std::vector<std::pair<std::size_t, std::size_t>>& splits,
                                         const std::vector<std::uint64_t>& held_out, int jobs) {
    const std::size_t n_env = sr.reports.empty() ? 0 : sr.reports.front().per_env_returns.size();
    std::vector<std::size_t> picks;
    std::vector<TradeoffRow> rows;
    for (auto [n, e] : splits) {
        if (n < 1 || n > sr.reports.size() || e < 1 || e > n_env) {
            throw ValidationError("trade-off split " + std::to_string(n) + "x" + std::to_string(e) +
                                  " exceeds the search that produced the returns");
        }
        std::vector<double> scores;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& r = sr.reports[i].per_env_returns;
            scores.push_back(std::accumulate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(e), 0.0) /
                             static_cast<double>(e));
        }
        const auto best = first_argmax(scores);
        TradeoffRow row;
        row.n_tickets = n;
        row.n_envs = e;
        row.best_id = sr.tickets[best].id;
        row.search_score = scores[best];
        rows.push_back(row);
        picks.push_back(best);
    }
    // Each distinct pick is evaluated once.
    std::map<std::size_t, double> heldout;
    std::vector<NoiseSource> sources;
    std::vector<std::size_t> distinct;
    for (auto p : picks) {
        if (heldout.emplace(p, 0.0).second) {
            distinct.push_back(p);
            sources.push_back(NoiseSource::ticket(sr.tickets[p]));
        }
    }
    const auto grid = evaluate_grid(factory, sources, held_out, jobs);
    for (std::size_t k = 0; k < distinct.size(); ++k) {
        heldout[distinct[k]] = make_report("", grid[k]).success_rate;
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        rows[r].heldout_rate = heldout[picks[r]];
        rows[r].gap = rows[r].search_score - rows[r].heldout_rate;
    }
    return rows;
}

std::string tradeoff_csv(const std::vector<TradeoffRow>& rows) {
    std::string out = "n_tickets,n_envs,budget,best_id,search_score,heldout_rate,gap\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n_tickets) + ',' + std::to_string(r.n_envs) + ',' +
               std::to_string(r.n_tickets * r.n_envs) + ',' + r.best_id + ',' + format_double(r.search_score) + ',' +
               format_double(r.heldout_rate) + ',' + format_double(r.gap) + '\n';
    }
    return out;
}

std::string reports_to_csv(const std::vector<TicketReport>& reports) {
    std::string out(kReportsHeader);
    out += '\n';
    for (const auto& r : reports) {
        std::string returns = "[";
        for (std::size_t i = 0; i < r.per_env_returns.size(); ++i) {
            returns += (i ? "," : "") + format_double(r.per_env_returns[i]);
        }
        returns += "]";
        out += csv_field(r.ticket_id) + ',' + format_double(r.mean_return) + ',' + format_double(r.success_rate) + ',' +
               (r.mean_success_len ? format_double(*r.mean_success_len) : "") + ',' + format_double(r.ci) + ',' +
               csv_field(returns) + '\n';
    }
    return out;
}

std::vector<TicketReport> reports_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || (line != kReportsHeader && line != std::string(kReportsHeader) + "\r")) {
        throw ArtifactError("reports CSV: unexpected header (expected '" + std::string(kReportsHeader) + "')");
    }
    std::vector<TicketReport> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 6) {
            throw ArtifactError("reports CSV line " + std::to_string(line_no) + ": expected 6 fields, got " +
                                std::to_string(f.size()));
        }
        try {
            TicketReport r;
            r.ticket_id = f[0];
            r.mean_return = parse_double(f[1]);
            r.success_rate = parse_double(f[2]);
            if (!f[3].empty()) {
                r.mean_success_len = parse_double(f[3]);
            }
            r.ci = parse_double(f[4]);
            r.per_env_returns = nlohmann::json::parse(f[5]).get<std::vector<double>>();
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw ArtifactError("reports CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string verdict_to_json(const GoldenVerdict& v) {
    nlohmann::ordered_json j;
    j["ticket_id"] = v.ticket_id;
    j["heldout_rate"] = v.heldout_rate;
    j["heldout_ci"] = v.heldout_ci;
    j["heldout_episodes"] = v.heldout_episodes;
    j["base_rate"] = v.base_rate;
    j["base_ci"] = v.base_ci;
    j["base_episodes"] = v.base_episodes;
    j["delta"] = v.delta;
    j["is_golden"] = v.is_golden;
    return j.dump(2) + "\n";
}

} // namespace gt
