"""Regret curves and numerical checks of the structural inequalities.

Every check returns LemmaCheckRecord objects.  A record fails only when its
premise held and lhs > rhs; numerical slack is folded into rhs.  Checks that
scan a whole run report one record per run carrying the tightest step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arrivals import measure_l1_discrepancy
from .instance import ItemSequence, check_general_position
from .online import TIE_REL, AllocationTrajectory
from .solver import PreconditionError, SolveOptions, solve_hindsight, solve_program
from .welfare import (WelfareSpec, _conjugate, eval_log_welfare, eval_welfare,
                      grad_log_welfare, smoothness_constants)

ABS_SLACK = 1e-9


@dataclass
class LemmaCheckRecord:
    lemma: str
    case_id: str
    premise_held: bool
    lhs: float
    rhs: float
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.premise_held = bool(self.premise_held)

    @property
    def margin(self) -> float:
        if self.lhs == self.rhs:
            return 0.0
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return (not self.premise_held) or self.margin >= 0

    @property
    def monitor(self) -> bool:
        """Monitors are reported but never fail a verification run."""
        return self.lemma.endswith("_monitor")

    def row(self):
        return [self.lemma, self.case_id, int(self.premise_held), self.lhs, self.rhs,
                self.margin, int(self.passed)]


LEMMA_COLUMNS = ["lemma", "case_id", "premise_held", "lhs", "rhs", "margin", "pass"]


def _worst(lemma, case, lhs, rhs, premise, steps=None, **ctx) -> LemmaCheckRecord:
    """Fold per-step comparisons into one record at the tightest premise-held step.

    ``steps`` labels the entries (default 1, 2, ...).
    """
    lhs = np.asarray(lhs, float)
    rhs = np.asarray(rhs, float)
    premise = np.asarray(premise, bool)
    if not premise.any():
        return LemmaCheckRecord(lemma, f"{case}:checked=0", False, math.nan, math.nan, ctx)
    with np.errstate(invalid="ignore"):
        margin = np.where(lhs == rhs, 0.0, rhs - lhs)
    margin = np.where(premise, margin, np.inf)
    k = int(np.argmin(margin))
    bad = int((margin < 0).sum())
    t = k + 1 if steps is None else int(steps[k])
    cid = f"{case}:t={t}:checked={int(premise.sum())}:violations={bad}"
    return LemmaCheckRecord(lemma, cid, True, float(lhs[k]), float(rhs[k]), dict(ctx, step=t))


# -- regret ----------------------------------------------------------------

@dataclass
class RegretReport:
    algorithm: str
    checkpoints: np.ndarray
    opt: np.ndarray
    welfare: np.ndarray
    log_opt: np.ndarray
    gaps: np.ndarray
    skipped: list = field(default_factory=list)

    @property
    def regret(self) -> np.ndarray:
        return self.opt - self.welfare

    @property
    def normalized(self) -> np.ndarray:
        return self.regret / self.opt


def geometric_checkpoints(n: int, T: int) -> list:
    out = []
    t = n
    while t < T:
        out.append(t)
        t *= 2
    out.append(T)
    return out


def prefix_opt(spec: WelfareSpec, online_seq: ItemSequence, checkpoints=None,
               solver_opts: SolveOptions | None = None) -> dict:
    """Hindsight solves of every prefix 1..t; failed checkpoints map to the error message."""
    T, n = online_seq.values.shape
    if checkpoints is None:
        checkpoints = geometric_checkpoints(n, T)
    out = {}
    for t in checkpoints:
        t = int(t)
        if not n <= t <= T:
            raise ValueError(f"checkpoint {t} outside [{n}, {T}]")
        try:
            out[t] = solve_hindsight(spec, online_seq.values[:t], solver_opts)
        except PreconditionError as e:
            out[t] = str(e)
    return out


def regret_curve(spec: WelfareSpec, trajectory: AllocationTrajectory, online_seq: ItemSequence,
                 checkpoints=None, solver_opts: SolveOptions | None = None, prefix: dict | None = None) -> RegretReport:
    """Prefix-hindsight OPT against the algorithm's welfare at each checkpoint.

    ``prefix`` reuses solves from :func:`prefix_opt` (several algorithms, one sequence).
    """
    if prefix is None:
        prefix = prefix_opt(spec, online_seq, checkpoints, solver_opts)
    cps, opt, wel, logs, gaps, skipped = [], [], [], [], [], []
    for t, res in prefix.items():
        if isinstance(res, str):
            skipped.append((t, res))
            continue
        cps.append(t)
        opt.append(res.welfare)
        logs.append(res.primal)
        gaps.append(res.gap)
        wel.append(eval_welfare(spec, trajectory.W_path[t - 1] / t))
    return RegretReport(trajectory.kind, np.array(cps, dtype=int), np.array(opt), np.array(wel),
                        np.array(logs), np.array(gaps), skipped)


def regret_conversion_bound(opt: float, r_log: float) -> float:
    """Upper bound opt * r_log on the welfare regret."""
    if not opt > 0:
        raise ValueError("opt must be positive")
    if r_log < 0:
        raise ValueError("r_log must be nonnegative")
    return opt * r_log


def check_regret_conversion(report: RegretReport, case: str = "") -> LemmaCheckRecord:
    """R_f <= OPT * R_log at every checkpoint (R_log may be negative within solver error)."""
    with np.errstate(divide="ignore"):
        r_log = report.log_opt - np.log(report.welfare)
    r_f = report.regret
    rhs = report.opt * r_log + 1e-8
    return _worst("regret_conversion", f"{case}:{report.algorithm}", r_f, rhs,
                  np.ones(r_f.size, bool), steps=report.checkpoints)


# -- stability and monotonicity -------------------------------------------

def check_stability(spec: WelfareSpec, seq: ItemSequence, K: int, trials: int, rng,
                    solver_tol: float = 1e-11, case: str = "") -> list:
    """Drop K random items (zeroed, same divisor) and compare hindsight optima."""
    if K < 1:
        raise ValueError("K must be at least 1")
    T = seq.T
    opts = SolveOptions(tol=solver_tol)
    gp = check_general_position(seq)
    big = solve_hindsight(spec, seq.values, opts)
    u1, b1 = big.u_star, big.beta_star
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(np.isfinite(b1), b1.max() / b1, np.inf)
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    out = []
    for k in range(trials):
        drop = rng.choice(T, size=min(K, T), replace=False)
        V2 = seq.values.copy()
        V2[drop] = 0.0
        cid = f"{case}:trial={k}:drop=" + "-".join(str(d) for d in sorted(drop.tolist()))
        try:
            small = solve_program(spec, np.zeros(spec.n), V2, T, opts)
        except PreconditionError:
            out.append(LemmaCheckRecord("monotonicity", cid, False, math.nan, math.nan))
            out.append(LemmaCheckRecord("stability", cid, False, math.nan, math.nan))
            continue
        u2 = small.u_star
        out.append(LemmaCheckRecord("monotonicity", cid, True, float((u2 - u1).max()), 1e-7))
        slack = 2.0 * max(big.gap, small.gap, 0.0) + ABS_SLACK
        bound = len(drop) * seq.vbar / T * ratio + slack
        diff = np.abs(u1 - u2)
        i = int(np.argmin(bound - diff))
        out.append(LemmaCheckRecord("stability", f"{cid}:agent={i}", gp, diff[i], bound[i]))
    return out


# -- safe volume -----------------------------------------------------------

def check_safe_volume(beta, iota: float, vbar: float, samples: int, rng, case: str = "") -> LemmaCheckRecord:
    """Monte Carlo lower bound on the fraction of values whose winner is iota-robust."""
    beta = np.asarray(beta, float)
    if not iota > 0:
        raise ValueError("iota must be positive")
    if np.any(beta <= 0):
        raise ValueError("beta must be positive")
    n = beta.size
    bound = 1.0 - 2.0 * n * iota / beta.min()
    slack = 4.0 * math.sqrt(0.25 / samples)
    cid = f"{case}:n={n}:iota={iota!r}:samples={samples}"
    if n == 1:
        return LemmaCheckRecord("safe_volume", cid, bound > 0, bound - slack, 1.0)
    if bound <= 0:
        return LemmaCheckRecord("safe_volume", cid, False, bound, math.nan)
    safe = 0
    left = samples
    while left:
        m = min(left, 200_000)
        Y = np.sort(beta * rng.uniform(0.0, vbar, size=(m, n)), axis=1)
        safe += int((Y[:, -1] - Y[:, -2] > 2.0 * vbar * iota).sum())
        left -= m
    return LemmaCheckRecord("safe_volume", cid, True, bound - slack, safe / samples)


# -- greedy checks ---------------------------------------------------------

def _max_value_term(beta, v):
    with np.errstate(invalid="ignore"):
        return float(np.where(v > 0, beta * v, 0.0).max())


def check_greedy_per_step(spec: WelfareSpec, trajectory: AllocationTrajectory, online_seq: ItemSequence,
                          lo: float, case: str = "") -> LemmaCheckRecord:
    """Per-step dual charging inequality of the greedy rule.

    With Phi_t = t log f(W_t/t) and beta'_t = grad log f(W_{t-1}/t):
        Phi_t - Phi_{t-1} >= max_i beta'_i v_t,i + conj(beta'_t) - lam vbar^2 / (2t)
    whenever W_{t-1}/(t-1) lies in [lo, vbar]^n.
    """
    V = online_seq.values
    T = V.shape[0]
    vbar = online_seq.vbar
    lam = smoothness_constants(spec, lo / 2.0, vbar).lam
    lhs = np.full(T, np.nan)
    rhs = np.full(T, np.nan)
    prem = np.zeros(T, bool)
    for k in range(1, T):  # 0-based k is step t = k + 1 >= 2
        t = k + 1
        Wp = trajectory.W_path[k - 1]
        avg = Wp / (t - 1)
        if not (np.all(avg >= lo) and np.all(avg <= vbar)):
            continue
        prem[k] = True
        phi_t = t * eval_log_welfare(spec, trajectory.W_path[k] / t)
        phi_p = (t - 1) * eval_log_welfare(spec, avg)
        beta = grad_log_welfare(spec, Wp / t)
        g = _max_value_term(beta, V[k]) + _conjugate(spec, beta)
        lhs[k] = g - lam * vbar**2 / (2 * t) - ABS_SLACK
        rhs[k] = phi_t - phi_p
    return _worst("greedy_per_step", case, lhs, rhs, prem, lam=lam, lo=lo)


def check_greedy_one_step(spec: WelfareSpec, trajectory: AllocationTrajectory, online_seq: ItemSequence,
                          case: str = "") -> LemmaCheckRecord:
    """The chosen agent maximizes f(W_{t-1} + v_t e_i) at every non-safeguard step."""
    V = online_seq.values
    T, n = V.shape
    lhs = np.zeros(T)
    rhs = np.zeros(T)
    prem = np.zeros(T, bool)
    eye = np.eye(n)
    for k in range(T):
        a = trajectory.agents[k]
        guard = trajectory.safeguard is not None and trajectory.safeguard[k]
        if a < 0 or guard:
            continue
        W = trajectory.W_before(k)
        vals = np.array([eval_welfare(spec, W + V[k, i] * eye[i]) for i in range(n)])
        prem[k] = True
        lhs[k] = vals.max()
        rhs[k] = vals[a] + 1e-12 * max(vals.max(), 1.0)
    return _worst("greedy_one_step", case, lhs, rhs, prem)


def check_greedy_rule(spec: WelfareSpec, trajectory: AllocationTrajectory, online_seq: ItemSequence,
                      case: str = "") -> LemmaCheckRecord:
    """Symmetric weights: item t to agent j implies, for every i != j,
    W_{t-1,i} >= (v_i / v_j)^(1/(1-p)) W_{t-1,j} - v_i.
    """
    V = online_seq.values
    T, n = V.shape
    lhs = np.zeros(T)
    rhs = np.zeros(T)
    prem = np.zeros(T, bool)
    if not spec.is_symmetric:
        return _worst("greedy_rule", case, lhs, rhs, prem)
    p = 0.0 if spec.is_nash else spec.p
    for k in range(T):
        j = trajectory.agents[k]
        if j < 0 or V[k, j] <= 0:
            continue
        W = trajectory.W_before(k)
        v = V[k]
        need = (v / v[j]) ** (1.0 / (1.0 - p)) * W[j] - v
        need[j] = -np.inf
        i = int(np.argmax(need - W))
        prem[k] = True
        lhs[k] = need[i]
        rhs[k] = W[i] + 1e-9 * max(1.0, W.max())
    return _worst("greedy_rule", case, lhs, rhs, prem)


def check_boundedness(trajectory: AllocationTrajectory, lo: float, burn_in: int, vbar: float = 1.0,
                      case: str = "") -> LemmaCheckRecord:
    """Monitor: does W_t/t stay inside [lo, vbar]^n for every t >= burn_in?"""
    if burn_in < 1:
        raise ValueError("burn_in must be at least 1")
    T = trajectory.T
    if burn_in > T:
        return LemmaCheckRecord("boundedness_monitor", f"{case}:burn_in={burn_in}", False, lo, math.nan)
    t = np.arange(1, T + 1)[:, None]
    avg = trajectory.W_path / t
    tail = avg[burn_in - 1:]
    low = float(tail.min())
    high = float(tail.max())
    inside = high <= vbar
    return LemmaCheckRecord("boundedness_monitor", f"{case}:burn_in={burn_in}:lo={lo!r}", True,
                            lo, low if inside else -math.inf)


# -- coupling programs -----------------------------------------------------

def coupling_diagnostic(spec: WelfareSpec, trajectory: AllocationTrajectory, coupling_seq: ItemSequence,
                        online_seq: ItemSequence, solver_opts: SolveOptions | None = None,
                        case: str = "") -> list:
    """Solve every coupling program D_t = D*(W_t; v^c_{t+1..T}) and check the
    per-step difference bound, the endpoint identities and the R1/R2/R3 sum.
    """
    if trajectory.beta_path is None:
        raise ValueError("coupling diagnostic needs a trajectory with recorded dual prices")
    opts = solver_opts or SolveOptions(tol=1e-10)
    Vo = online_seq.values
    Vc = coupling_seq.values
    if Vc.shape != Vo.shape:
        raise ValueError("coupling and online sequences differ in shape")
    T, n = Vo.shape
    vbar = max(online_seq.vbar, coupling_seq.vbar)
    same = np.array_equal(Vc, Vo)
    D = np.full(T + 1, np.nan)
    gaps = np.zeros(T + 1)
    betas = np.full((T + 1, n), np.nan)
    us = np.full((T + 1, n), np.nan)
    first_rows = [None] * (T + 1)
    warm = None
    zero = np.zeros(n)
    for t in range(T + 1):
        W = trajectory.W_before(t)
        try:
            res = solve_program(spec, W, Vc[t:], T, opts, warm)
        except PreconditionError:
            warm = None
            continue
        D[t] = res.primal
        gaps[t] = max(res.gap, 0.0)
        betas[t] = res.beta_star
        us[t] = res.u_star
        if t < T:
            first_rows[t] = res.row(0)
            nxt = Vc[t + 1] if t + 1 < T else zero
            warm = res.active.shift(W, trajectory.W_before(t + 1), Vc[t], nxt, nxt, T)
    out = []

    # per-step bound
    lhs = np.full(T, np.nan)
    rhs = np.full(T, np.nan)
    prem = np.zeros(T, bool)
    r1 = r2 = slack_sum = 0.0
    for k in range(T):  # step t = k + 1 compares programs k and k + 1
        bc = betas[k + 1]
        bd = trajectory.beta_path[k]
        if not (np.isfinite(D[k]) and np.isfinite(D[k + 1]) and np.all(np.isfinite(bc))
                and np.all(np.isfinite(bd))):
            continue
        prem[k] = True
        a = np.abs(bc - bd).max()
        b = np.abs(bc).max() * np.abs(Vc[k] - Vo[k]).max()
        tie = TIE_REL * _max_value_term(bd, Vo[k]) / T
        slack = tie + 2.0 * max(gaps[k], gaps[k + 1]) + ABS_SLACK
        r1 += 2.0 * vbar * a / T
        r2 += b / T
        slack_sum += slack
        lhs[k] = D[k] - D[k + 1]
        rhs[k] = 2.0 * vbar * a / T + b / T + slack
    out.append(_worst("coupling_step", case, lhs, rhs, prem))

    # endpoints
    log_alg = eval_log_welfare(spec, trajectory.final_u)
    try:
        ref_c = solve_hindsight(spec, Vc, opts)
        ok0 = np.isfinite(D[0])
        tol0 = 2.0 * (gaps[0] + max(ref_c.gap, 0.0)) + ABS_SLACK
        out.append(LemmaCheckRecord("coupling_endpoint_start", case, bool(ok0),
                                    abs(D[0] - ref_c.primal) if ok0 else math.nan, tol0))
        p_c = ref_c.primal
    except PreconditionError:
        out.append(LemmaCheckRecord("coupling_endpoint_start", case, False, math.nan, math.nan))
        p_c = math.nan
    okT = np.isfinite(D[T]) and np.isfinite(log_alg)
    out.append(LemmaCheckRecord("coupling_endpoint_end", case, bool(okT),
                                abs(D[T] - log_alg) if okT else math.nan,
                                1e-12 * max(1.0, abs(log_alg)) + ABS_SLACK))

    # R_log <= R1 + R2 + R3
    try:
        ref_o = solve_hindsight(spec, Vo, opts)
        r3 = ref_o.primal - p_c
        r_log = ref_o.primal - log_alg
        okd = bool(prem.all() and np.isfinite(r3) and np.isfinite(r_log))
        out.append(LemmaCheckRecord(
            "coupling_decomposition", case, okd, r_log,
            r1 + r2 + r3 + slack_sum + 2.0 * max(ref_o.gap, 0.0) + ABS_SLACK,
            {"R1": r1, "R2": r2, "R3": r3, "R_log": r_log}))
    except PreconditionError:
        out.append(LemmaCheckRecord("coupling_decomposition", case, False, math.nan, math.nan))

    # with v^c = v^o: agreeing on item t leaves the coupling optimum unchanged
    if same:
        lhs = np.zeros(T)
        rhs = np.zeros(T)
        prem = np.zeros(T, bool)
        for k in range(T):
            row = first_rows[k]
            if row is None or not np.all(np.isfinite(us[k + 1])) or not np.all(np.isfinite(us[k])):
                continue
            x = trajectory.choices[k]
            if row.max() >= 1 - 1e-12 and np.allclose(row, x, atol=1e-12):
                prem[k] = True
                lhs[k] = np.abs(us[k + 1] - us[k]).max()
                rhs[k] = 1e-6
        out.append(_worst("coupling_no_error", case, lhs, rhs, prem))
    return out


# -- drift term ------------------------------------------------------------

@dataclass(frozen=True)
class UtilityBounds:
    """Assumed box [u_lo, u_hi] for hindsight optima; None = take from the solves."""

    u_lo: float | None = None
    u_hi: float | None = None


def check_r3_sensitivity(spec: WelfareSpec, seq_a: ItemSequence, seq_b: ItemSequence,
                         bounds: UtilityBounds | None = None, solver_tol: float = 1e-10,
                         case: str = "") -> LemmaCheckRecord:
    """P*(a) - P*(b) <= lip1 * delta with lip1 on the widened box of the optima."""
    bounds = bounds or UtilityBounds()
    delta = measure_l1_discrepancy(seq_a, seq_b).delta_avg
    opts = SolveOptions(tol=solver_tol)
    cid = f"{case}:delta={delta!r}"
    try:
        ra = solve_hindsight(spec, seq_a.values, opts)
        rb = solve_hindsight(spec, seq_b.values, opts)
    except PreconditionError:
        return LemmaCheckRecord("r3_sensitivity", cid, False, math.nan, math.nan)
    both = np.concatenate([ra.u_star, rb.u_star])
    u_lo = float(both.min()) if bounds.u_lo is None else bounds.u_lo
    u_hi = float(both.max()) if bounds.u_hi is None else bounds.u_hi
    vbar = max(seq_a.vbar, seq_b.vbar)
    inside = both.min() >= u_lo and both.max() <= u_hi
    if not (delta < u_lo and inside and u_lo > 0):
        return LemmaCheckRecord("r3_sensitivity", cid, False, ra.primal - rb.primal, math.nan)
    box = smoothness_constants(spec, u_lo - delta, min(vbar, u_hi + delta))
    slack = 2.0 * max(ra.gap, rb.gap, solver_tol * max(1.0, abs(ra.primal))) + ABS_SLACK
    return LemmaCheckRecord("r3_sensitivity", cid, True, ra.primal - rb.primal,
                            box.lip1 * delta + slack, {"lip1": box.lip1})


# -- uniform convergence report ---------------------------------------------

def uc_report(trajectories) -> dict:
    """Across-seed spread of W_t/t: per seed, max_t of the l-inf distance to the mean."""
    paths = np.stack([tr.W_path / np.arange(1, tr.T + 1)[:, None] for tr in trajectories])
    mean = paths.mean(axis=0)
    dev = np.abs(paths - mean).max(axis=2)
    return {
        "max_deviation": dev.max(axis=1).tolist(),
        "final_deviation": dev[:, -1].tolist(),
    }


__all__ = [
    "LEMMA_COLUMNS", "LemmaCheckRecord", "RegretReport", "UtilityBounds", "check_boundedness",
    "check_greedy_one_step", "check_greedy_per_step", "check_greedy_rule", "check_r3_sensitivity",
    "check_regret_conversion", "check_safe_volume", "check_stability", "coupling_diagnostic",
    "geometric_checkpoints", "prefix_opt", "regret_conversion_bound", "regret_curve", "uc_report",
]
