"""Writes pareto_reports.csv (400 search reports), and by pairwise comparison
pareto_frontier.txt (ids of the non-dominated reports, input order) and
pareto_frontier.csv (those rows, same format)."""

import json
import random


def fmt(v):
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def main():
    rng = random.Random(20240607)
    n_envs = 25
    rows = []
    ids = set()
    while len(rows) < 400:
        tid = "%08x" % rng.getrandbits(32)
        if tid in ids:
            continue
        ids.add(tid)
        p = rng.random() ** 0.7
        returns = [1.0 if rng.random() < p else 0.0 for _ in range(n_envs)]
        k = int(sum(returns))
        rate = k / n_envs
        # Lengths on a coarse grid so ties are common.
        length = None if k == 0 else round(12 + 40 * rate + rng.uniform(-6, 6)) / 2
        ci = 1.96 * (rate * (1 - rate) / n_envs) ** 0.5
        rows.append((tid, sum(returns) / n_envs, rate, length, ci, returns))

    def dominated(i):
        li = rows[i][3] if rows[i][3] is not None else float("inf")
        for j, r in enumerate(rows):
            if j == i:
                continue
            lj = r[3] if r[3] is not None else float("inf")
            if r[2] >= rows[i][2] and lj <= li and (r[2] > rows[i][2] or lj < li):
                return True
        return False

    def write_reports(path, subset):
        with open(path, "w", newline="\n") as f:
            f.write("ticket_id,mean_return,success_rate,mean_success_len,ci,per_env_returns\n")
            for tid, ret, rate, length, ci, returns in subset:
                arr = json.dumps([int(x) for x in returns], separators=(",", ":"))
                f.write('%s,%s,%s,%s,%s,"%s"\n' % (tid, fmt(ret), fmt(rate), "" if length is None else fmt(length), fmt(ci), arr))

    frontier = [rows[i] for i in range(len(rows)) if not dominated(i)]
    write_reports("pareto_reports.csv", rows)
    write_reports("pareto_frontier.csv", frontier)
    with open("pareto_frontier.txt", "w", newline="\n") as f:
        for r in frontier:
            f.write(r[0] + "\n")


if __name__ == "__main__":
    main()
