#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gt/policy.hpp"

namespace gt {

struct SearchConfig {
    int n_tickets = 100;
    std::vector<std::uint64_t> search_env_seeds; // the environment set E
    std::uint64_t ticket_seed = 0;

    void validate() const;
};

struct TicketReport {
    std::string ticket_id;
    double mean_return = 0.0;
    double success_rate = 0.0;
    std::optional<double> mean_success_len; // absent when nothing succeeded
    double ci = 0.0;                        // 95% half-width on success_rate
    std::vector<double> per_env_returns;

    bool operator==(const TicketReport&) const = default;
};

/// Normal-approximation binomial 95% half-width, 1.96 sqrt(p (1 - p) / n).
double binomial_ci95(double rate, std::size_t n);

TicketReport make_report(const std::string& id, const std::vector<EpisodeResult>& episodes);

/// One episode for a noise source; instances are used from a single thread.
using Rollout = std::function<EpisodeResult(const NoiseSource&, std::uint64_t episode_seed)>;
/// Called once per worker to build that worker's Rollout.
using RolloutFactory = std::function<Rollout()>;

RolloutFactory policy_rollouts(const FlowModel& model, const PolicyConfig& cfg, const EnvSpec& spec);

/// results[i][j] = rollout(sources[i], seeds[j]); bit-identical for any `jobs`.
std::vector<std::vector<EpisodeResult>> evaluate_grid(const RolloutFactory& factory,
                                                      const std::vector<NoiseSource>& sources,
                                                      const std::vector<std::uint64_t>& seeds, int jobs = 1);

TicketReport evaluate(const RolloutFactory& factory, const NoiseSource& noise, const std::vector<std::uint64_t>& seeds,
                      int jobs = 1);

struct SearchResult {
    std::vector<Ticket> tickets;         // draw order
    std::vector<TicketReport> reports;   // draw order
    std::vector<std::size_t> ranking;    // indices, best first
    std::size_t best = 0;

    const Ticket& best_ticket() const { return tickets[best]; }
    std::vector<TicketReport> ranked_reports() const;
};

/// Index of the first maximum under strict-improvement updates.
std::size_t first_argmax(const std::vector<double>& scores);

/// Indices sorted by score descending, index ascending.
std::vector<std::size_t> rank_by_score(const std::vector<double>& scores);

/// Random search over `n_tickets` N(0, I) tickets of width `dim`.
SearchResult search(const RolloutFactory& factory, std::size_t dim, const SearchConfig& sc, int jobs = 1);

struct GoldenVerdict {
    std::string ticket_id;
    double heldout_rate = 0.0;
    double heldout_ci = 0.0;
    double base_rate = 0.0;
    double base_ci = 0.0;
    double delta = 0.0;
    bool is_golden = false;
    std::size_t heldout_episodes = 0;
    std::size_t base_episodes = 0;
};

/// Throws ValidationError if the two seed sets share any seed.
void check_disjoint(const std::vector<std::uint64_t>& held_out, const std::vector<std::uint64_t>& search_seeds);

/// Candidate on every held-out seed against the Gaussian base on the first
/// `base_episodes` held-out seeds. Golden iff delta > sum of half-widths.
GoldenVerdict verify_golden(const RolloutFactory& factory, const Ticket& candidate,
                            const std::vector<std::uint64_t>& held_out, const std::vector<std::uint64_t>& search_seeds,
                            std::uint64_t base_stream_seed, std::size_t base_episodes, int jobs = 1);

/// Frontier indices (input order) under maximize success_rate, minimize
/// mean_success_len with absent length treated as +inf.
std::vector<std::size_t> pareto(const std::vector<TicketReport>& reports);

bool dominates(const TicketReport& a, const TicketReport& b);

struct TaggedTicket {
    Ticket ticket;
    int source_task = 0;
};

struct CrossTaskMatrix {
    std::vector<std::string> columns;     // "base" then "<id>@task<k>"
    std::vector<std::vector<double>> rates; // [task][column]
    std::vector<double> column_average;

    std::string to_csv() const;
};

/// `factory_for_task(k)` builds rollouts pinned to task k.
CrossTaskMatrix cross_task_matrix(const std::function<RolloutFactory(int)>& factory_for_task, int n_tasks,
                                  const std::vector<TaggedTicket>& tickets,
                                  const std::vector<std::vector<std::uint64_t>>& eval_seeds_per_task,
                                  std::uint64_t base_stream_seed, int jobs = 1);

struct TradeoffRow {
    std::size_t n_tickets = 0;
    std::size_t n_envs = 0;
    std::string best_id;
    double search_score = 0.0;
    double heldout_rate = 0.0;
    double gap = 0.0; // search_score - heldout_rate
};

/// Re-runs selection for each (n_tickets, n_envs) split on prefixes of an
/// existing search's per-env returns and scores each selected ticket on the
/// held-out seeds.
std::vector<TradeoffRow> budget_tradeoff(const RolloutFactory& factory, const SearchResult& search_result,
                                         const std::vector<std::pair<std::size_t, std::size_t>>& splits,
                                         const std::vector<std::uint64_t>& held_out, int jobs = 1);

std::string tradeoff_csv(const std::vector<TradeoffRow>& rows);

inline constexpr std::string_view kReportsHeader = "ticket_id,mean_return,success_rate,mean_success_len,ci,per_env_returns";
std::string reports_to_csv(const std::vector<TicketReport>& reports);
std::vector<TicketReport> reports_from_csv(const std::string& text);

std::string verdict_to_json(const GoldenVerdict& v);

} // namespace gt
