"""Experiment orchestration: data generation, simulation over replications,
and the lemma verification suite.

Every replication (or verification task) derives its random streams from
(base_seed, index, role) alone, so results do not depend on the number of
worker processes; rows are merged in task order before anything is written.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .arrivals import (GaussianNoise, IndependentRedraw, Synthetic, gaussian_history, make_rng,
                       sample_history, sample_online)
from .config import algorithm_kinds, arrival_model, dump_config, history_mode, pool_source, welfare_spec
from .instance import ItemSequence, save_csv
from .online import AlgorithmKind, AllocationTrajectory, run_online
from .solver import SolveOptions, solve_hindsight
from .welfare import WelfareSpec

log = logging.getLogger(__name__)

REGRET_COLUMNS = ["algorithm", "seed", "t", "opt", "welfare", "regret", "normalized_regret"]
SUMMARY_COLUMNS = ["algorithm", "t", "replications", "mean_opt", "mean_welfare", "mean_regret",
                   "mean_normalized_regret"]
RUN_COLUMNS = ["algorithm", "seed", "T", "opt", "welfare", "regret", "normalized_regret", "delta_avg",
               "beta_bar"]
FAILURE_COLUMNS = ["seed", "algorithm", "error"]

# index offsets keep the random streams of different verification families apart
_FAMILY = {"stability": 0, "safe_volume": 1, "greedy": 2, "coupling": 3, "r3_sensitivity": 4}
_STRIDE = 1_000_000


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return x


def write_csv(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _map(fn, tasks, jobs):
    """Ordered map, serial for jobs == 1."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
        return list(ex.map(fn, tasks, chunksize=1))


# -- data ------------------------------------------------------------------

def make_pool(cfg):
    """Pool for pool-based models: the CSV, or rows drawn once per base seed."""
    src = pool_source(cfg)
    if isinstance(src, ItemSequence):
        return src
    return sample_online(src, cfg["arrivals"]["pool_size"], make_rng(cfg["base_seed"], 0, "pool"))


def replication_data(cfg, r: int, pool=None):
    """(online_seq, hist_seq or None, ShiftReport or None) of replication r."""
    if pool is None and cfg["arrivals"]["model"] in ("iid_empirical", "periodic_boost"):
        pool = make_pool(cfg)
    model = arrival_model(cfg, pool)
    seed = cfg["base_seed"]
    online = sample_online(model, cfg["T"], make_rng(seed, r, "online"))
    mode = history_mode(cfg)
    if mode is None:
        return online, None, None
    hist, rep = sample_history(model, mode, online, make_rng(seed, r, "history"))
    return online, hist, rep


def cmd_gen(cfg, out_dir, traces: bool = False) -> list:
    """Write the pool (if any) and optionally every replication's sequences."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    pool = None
    if cfg["arrivals"]["model"] != "trace_replay":
        pool = make_pool(cfg)
    if pool is not None:
        save_csv(pool, out / "pool.csv")
        written.append(out / "pool.csv")
    if traces or cfg["outputs"]["traces"]:
        for r in range(cfg["replications"]):
            online, hist, _ = replication_data(cfg, r, pool)
            save_csv(online, out / f"online_r{r}.csv")
            written.append(out / f"online_r{r}.csv")
            if hist is not None:
                save_csv(hist, out / f"history_r{r}.csv")
                written.append(out / f"history_r{r}.csv")
    dump_config(cfg, out / "effective_config.json")
    return written


# -- simulate --------------------------------------------------------------

def checkpoints_of(cfg, T=None):
    T = cfg["T"] if T is None else T
    c = cfg["checkpoints"]
    if c["policy"] == "final":
        return [T]
    if c["policy"] == "list":
        return list(c["points"])
    return dg.geometric_checkpoints(cfg["n"], T)


def simulate_replication(args) -> dict:
    cfg, r = args
    spec = welfare_spec(cfg)
    out = {"rows": [], "runs": [], "records": [], "failures": [], "traces": {}}
    try:
        online, hist, rep = replication_data(cfg, r)
        opts = SolveOptions(tol=cfg["solver"]["opt_tol"])
        prefix = dg.prefix_opt(spec, online, checkpoints_of(cfg), opts)
    except Exception as e:  # noqa: BLE001 - recorded, run continues
        out["failures"].append([r, "", f"{type(e).__name__}: {e}"])
        return out
    final = prefix.get(cfg["T"])
    beta_bar = float(np.max(final.beta_star)) if final is not None and not isinstance(final, str) else float("nan")
    delta = rep.delta_avg if rep is not None else float("nan")
    for kind in algorithm_kinds(cfg):
        try:
            tr = run_online(kind, spec, online, hist)
            report = dg.regret_curve(spec, tr, online, prefix=prefix)
        except Exception as e:  # noqa: BLE001
            out["failures"].append([r, kind.name, f"{type(e).__name__}: {e}"])
            continue
        for t, e in report.skipped:
            out["failures"].append([r, kind.name, f"checkpoint {t} skipped: {e}"])
        for k, t in enumerate(report.checkpoints):
            out["rows"].append([kind.name, r, int(t), report.opt[k], report.welfare[k], report.regret[k],
                                report.normalized[k]])
        if report.checkpoints.size and report.checkpoints[-1] == cfg["T"]:
            out["runs"].append([kind.name, r, cfg["T"], report.opt[-1], report.welfare[-1], report.regret[-1],
                                report.normalized[-1], delta, beta_bar])
        if report.checkpoints.size:
            out["records"].append(dg.check_regret_conversion(report, f"seed={r}"))
        if cfg["outputs"]["traces"]:
            out["traces"][kind.name] = tr.choices
    return out


def summarize(rows) -> list:
    """Across-seed means per (algorithm, checkpoint), in first-seen order."""
    groups = {}
    for alg, _, t, opt, wel, reg, nreg in rows:
        groups.setdefault((alg, t), []).append((opt, wel, reg, nreg))
    out = []
    for (alg, t), vals in groups.items():
        m = np.mean(np.array(vals), axis=0)
        out.append([alg, t, len(vals), *m.tolist()])
    return out


def cmd_simulate(cfg, out_dir, jobs: int = 1) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = _map(simulate_replication, [(cfg, r) for r in range(cfg["replications"])], jobs)
    rows = [row for res in results for row in res["rows"]]
    runs = [row for res in results for row in res["runs"]]
    records = [rec for res in results for rec in res["records"]]
    failures = [f for res in results for f in res["failures"]]
    write_csv(out / "regret.csv", REGRET_COLUMNS, rows)
    write_csv(out / "regret_summary.csv", SUMMARY_COLUMNS, summarize(rows))
    write_csv(out / "runs.csv", RUN_COLUMNS, runs)
    write_csv(out / "failures.csv", FAILURE_COLUMNS, failures)
    write_csv(out / "lemma_checks.csv", dg.LEMMA_COLUMNS, [rec.row() for rec in records])
    if cfg["outputs"]["traces"]:
        for r, res in enumerate(results):
            for name, x in res["traces"].items():
                write_csv(out / f"allocation_r{r}_{name}.csv", ["t", *(f"a{i}" for i in range(cfg["n"]))],
                          ([t, *row] for t, row in enumerate(x)))
    dump_config(cfg, out / "effective_config.json")
    for f in failures:
        log.warning("replication %s %s: %s", *f)
    return {"rows": rows, "runs": runs, "records": records, "failures": failures}


# -- verify ----------------------------------------------------------------

def _uniform(rng, T, n, vbar=1.0):
    return ItemSequence(rng.uniform(0.0, vbar, size=(T, n)), vbar)


def _corrupt(tr: AllocationTrajectory, seq: ItemSequence, step: int) -> AllocationTrajectory:
    """Hand item ``step`` to the next agent instead (fault injection)."""
    n = seq.n
    agents = tr.agents.copy()
    agents[step] = (max(agents[step], 0) + 1) % n
    x = np.zeros_like(tr.choices)
    hit = agents >= 0
    x[np.nonzero(hit)[0], agents[hit]] = 1.0
    W_path = np.cumsum(seq.values * x, axis=0)
    guard = None if tr.safeguard is None else tr.safeguard.copy()
    if guard is not None:
        guard[step] = False
    return AllocationTrajectory(tr.kind, x, W_path, W_path[-1] / tr.T, agents, safeguard=guard)


def verify_tasks(cfg) -> list:
    v = cfg["verify"]
    checks = set(v["checks"])
    ps = v["p_values"]
    tasks = []
    if "stability" in checks:
        tasks += [("stability", i) for i in range(v["stability"]["instances"])]
    if "safe_volume" in checks:
        tasks += [("safe_volume", i) for i in range(len(v["safe_volume"]["cases"]))]
    if checks & {"greedy_per_step", "greedy_one_step", "greedy_rule", "boundedness", "regret_conversion"}:
        tasks += [("greedy", i) for i in range(v["greedy"]["seeds"] * len(ps))]
    if "coupling" in checks:
        tasks += [("coupling", i) for i in range(v["coupling"]["seeds"] * len(ps))]
    if "r3_sensitivity" in checks:
        tasks += [("r3_sensitivity", i) for i in range(v["r3_sensitivity"]["pairs"])]
    return tasks


def run_verify_task(args) -> dict:
    cfg, (family, i) = args
    v = cfg["verify"]
    checks = set(v["checks"])
    ps = v["p_values"]
    seed = cfg["base_seed"]
    key = _FAMILY[family] * _STRIDE + i
    p = ps[i % len(ps)]
    rec = []
    extra = None

    if family == "stability":
        s = v["stability"]
        spec = WelfareSpec.symmetric(s["n"], p)
        seq = _uniform(make_rng(seed, key, "online"), s["T"], s["n"])
        K = 1 + i % s["K_max"]
        rec += dg.check_stability(spec, seq, K, s["trials"], make_rng(seed, key, "algorithm"),
                                  case=f"stability:p={p!r}:seed={seed}:instance={i}:K={K}")

    elif family == "safe_volume":
        sv = v["safe_volume"]
        c = sv["cases"][i]
        rec.append(dg.check_safe_volume(c["beta"], c["iota"], c["vbar"], sv["samples"],
                                        make_rng(seed, key, "algorithm"), case=f"safe_volume:seed={seed}:case={i}"))

    elif family == "greedy":
        g = v["greedy"]
        spec = WelfareSpec.symmetric(g["n"], p)
        run = i // len(ps)
        seq = _uniform(make_rng(seed, key, "online"), g["T"], g["n"])
        tr = run_online("greedy", spec, seq)
        if g["corrupt_step"] is not None:
            tr = _corrupt(tr, seq, g["corrupt_step"])
        case = f"greedy:p={p!r}:seed={seed}:run={run}"
        if "greedy_per_step" in checks:
            lo = g["lo"]
            if lo == "auto":
                t = np.arange(1, tr.T + 1)[:, None]
                tail = (tr.W_path / t)[min(g["burn_in"], tr.T) - 1:]
                lo = float(tail.min())
                if not lo > 0:
                    lo = g["monitor_lo"]
            rec.append(dg.check_greedy_per_step(spec, tr, seq, lo, case))
        if "greedy_one_step" in checks:
            rec.append(dg.check_greedy_one_step(spec, tr, seq, case))
        if "greedy_rule" in checks:
            rec.append(dg.check_greedy_rule(spec, tr, seq, case))
        if "boundedness" in checks:
            rec.append(dg.check_boundedness(tr, g["monitor_lo"], g["burn_in"], seq.vbar, case))
        if "regret_conversion" in checks:
            rep = dg.regret_curve(spec, tr, seq)
            rec.append(dg.check_regret_conversion(rep, case))

    elif family == "coupling":
        c = v["coupling"]
        spec = WelfareSpec.symmetric(c["n"], p)
        run = i // len(ps)
        model = Synthetic(c["n"])
        seq = sample_online(model, c["T"], make_rng(seed, key, "online"))
        hist, _ = sample_history(model, IndependentRedraw(), seq, make_rng(seed, key, "history"))
        tr = run_online(AlgorithmKind("dual_resolve", tol=c["algorithm_tol"]), spec, seq, hist)
        opts = SolveOptions(tol=c["tol"])
        case = f"coupling:p={p!r}:seed={seed}:run={run}"
        rec += dg.coupling_diagnostic(spec, tr, seq, seq, opts, case + ":coupling=online")
        rec += dg.coupling_diagnostic(spec, tr, hist, seq, opts, case + ":coupling=history")
        extra = (p, tr.W_path)

    elif family == "r3_sensitivity":
        r = v["r3_sensitivity"]
        spec = WelfareSpec.symmetric(r["n"], p)
        seq = _uniform(make_rng(seed, key, "online"), r["T"], r["n"])
        z = make_rng(seed, key, "history").standard_normal(size=seq.values.shape)
        other = gaussian_history(seq, GaussianNoise(r["variance_scale"]), z)
        rec.append(dg.check_r3_sensitivity(spec, seq, other, case=f"r3:p={p!r}:seed={seed}:pair={i}"))
    return {"records": rec, "extra": extra}


def cmd_verify(cfg, out_dir, jobs: int = 1):
    """Run the configured checks; returns (records, exit_status)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = verify_tasks(cfg)
    results = _map(run_verify_task, [(cfg, t) for t in tasks], jobs)
    records = [r for res in results for r in res["records"]]
    write_csv(out / "lemma_checks.csv", dg.LEMMA_COLUMNS, [r.row() for r in records])

    # re-solving spread across seeds, per p; reported, not asserted
    paths = {}
    for res in results:
        if res["extra"] is not None:
            p, W_path = res["extra"]
            paths.setdefault(repr(p), []).append(W_path)
    uc = {}
    for p, ws in paths.items():
        trs = [AllocationTrajectory("dual_resolve", np.zeros_like(w), w, w[-1] / w.shape[0],
                                    np.zeros(w.shape[0], int)) for w in ws]
        uc[p] = dg.uc_report(trs)
    (out / "uc_report.json").write_text(json.dumps(uc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    dump_config(cfg, out / "effective_config.json")
    failed = [r for r in records if not r.passed and not r.monitor]
    for r in failed:
        log.error("check failed: %s %s lhs=%r rhs=%r", r.lemma, r.case_id, r.lhs, r.rhs)
    return records, (1 if failed else 0)


def solve_sequence(spec: WelfareSpec, seq: ItemSequence, tol: float = 1e-8) -> dict:
    res = solve_hindsight(spec, seq, SolveOptions(tol=tol))
    return {
        "agents": list(seq.agent_names),
        "opt": res.welfare,
        "log_opt": res.primal,
        "u_star": res.u_star.tolist(),
        "beta_star": res.beta_star.tolist(),
        "gap": res.gap,
        "certified": bool(res.certified),
        "iters": int(res.iters),
    }, res
