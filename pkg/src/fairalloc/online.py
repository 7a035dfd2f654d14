"""Online allocation: greedy, primal/dual re-solving, and two baselines.

Cumulative utilities W are kept in absolute units (not divided by t).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .instance import ItemSequence
from .solver import SolveOptions, SolveResult, solve_program
from .welfare import P0_BAND, WelfareSpec, eval_welfare

KINDS = ("greedy", "dual_resolve", "primal_resolve", "round_robin", "utilitarian_greedy")
RESOLVE_KINDS = ("dual_resolve", "primal_resolve")
TIE_REL = 1e-7


@dataclass(frozen=True)
class AlgorithmKind:
    """An online algorithm and its options.

    tol / max_iters / warm_start only matter for the re-solving kinds;
    safeguard_p0 only for greedy with p = 0.
    """

    name: str
    tol: float = 1e-6
    max_iters: int = 20_000
    warm_start: bool = True
    safeguard_p0: bool = True

    def __post_init__(self):
        if self.name not in KINDS:
            raise ValueError(f"unknown algorithm {self.name!r}; expected one of {', '.join(KINDS)}")

    @property
    def needs_history(self) -> bool:
        return self.name in RESOLVE_KINDS

    def solver_options(self) -> SolveOptions:
        return SolveOptions(tol=self.tol, max_iters=self.max_iters)


@dataclass
class AllocationTrajectory:
    """Everything an online run decided.

    choices[t] is the allocation row of item t and W_path[t] the cumulative
    utility after item t.  agents[t] is the single winner (-1 if the item
    went to nobody or was split).  beta_path is filled by re-solving runs.
    """

    kind: str
    choices: np.ndarray
    W_path: np.ndarray
    final_u: np.ndarray
    agents: np.ndarray
    beta_path: np.ndarray | None = None
    safeguard: np.ndarray | None = None
    gaps: np.ndarray | None = None

    @property
    def T(self) -> int:
        return self.choices.shape[0]

    def W_before(self, t: int) -> np.ndarray:
        """Cumulative utility before item t (0-based)."""
        if t == 0:
            return np.zeros(self.W_path.shape[1])
        return self.W_path[t - 1]

    def welfare(self, spec: WelfareSpec) -> float:
        return eval_welfare(spec, self.final_u)


def _from_agents(kind, seq: ItemSequence, agents, **extra) -> AllocationTrajectory:
    T, n = seq.values.shape
    agents = np.asarray(agents, dtype=int)
    x = np.zeros((T, n))
    hit = agents >= 0
    x[np.nonzero(hit)[0], agents[hit]] = 1.0
    W_path = np.cumsum(seq.values * x, axis=0)
    return AllocationTrajectory(kind, x, W_path, W_path[-1] / T, agents, **extra)


# -- greedy ----------------------------------------------------------------

def greedy_scores(spec: WelfareSpec, W, v) -> np.ndarray:
    """Separable increments whose argmax is argmax_i f(W + v_i e_i).

    For p != 0 the score is B_i ((W_i + v_i)^p - W_i^p) / p and for p = 0 it
    is B_i log(1 + v_i / W_i).  Both are strictly increasing transforms of
    f(W + v_i e_i) whenever those welfare values are positive, and they still
    rank agents sensibly when every such value is zero.
    """
    W = np.asarray(W, dtype=float)
    v = np.asarray(v, dtype=float)
    B = spec.B
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.log1p(v / W)
        if spec.is_nash:
            sc = B * r
        else:
            p = spec.p
            sc = B * W**p * np.expm1(p * r) / p
            # W_i = 0: the increment is B_i v_i^p / p
            sc = np.where(W > 0, sc, np.where(v > 0, B * v**p / p if p > 0 else np.inf, 0.0))
    sc = np.where(v > 0, sc, 0.0)
    return sc


def greedy_step(spec: WelfareSpec, W, t: int, v_t, safeguard_p0: bool = True):
    """Agent receiving item t under the greedy rule, or None if v_t = 0.

    With p < 0 (and p = 0 when ``safeguard_p0``) an agent with zero
    cumulative utility and positive value is served first, lowest index.
    Ties go to the lowest index.  ``t`` is accepted for symmetry with the
    algorithm statement; the 1/t scaling does not affect the argmax.
    """
    W = np.asarray(W, dtype=float)
    v = np.asarray(v_t, dtype=float)
    if not np.any(v > 0):
        return None
    p = spec.p
    if p < -P0_BAND or (spec.is_nash and safeguard_p0):
        starving = np.nonzero((W == 0) & (v > 0))[0]
        if starving.size:
            return int(starving[0])
    if spec.is_nash and not safeguard_p0:
        vals = [eval_welfare(spec, W + v[i] * np.eye(spec.n)[i]) for i in range(spec.n)]
        return int(np.argmax(vals))
    return int(np.argmax(greedy_scores(spec, W, v)))


def run_greedy(spec: WelfareSpec, online_seq: ItemSequence, safeguard_p0: bool = True) -> AllocationTrajectory:
    online_seq.require_horizon()
    V = online_seq.values
    T, n = V.shape
    W = np.zeros(n)
    agents = np.full(T, -1)
    guard = np.zeros(T, dtype=bool)
    for t in range(T):
        v = V[t]
        if spec.p <= P0_BAND:
            guard[t] = bool(np.any((W == 0) & (v > 0))) and (spec.p < -P0_BAND or safeguard_p0)
        k = greedy_step(spec, W, t + 1, v, safeguard_p0)
        if k is not None:
            agents[t] = k
            W[k] += v[k]
    return _from_agents("greedy", online_seq, agents, safeguard=guard)


# -- re-solving ------------------------------------------------------------

def _dual_winner(beta, v):
    """argmax_i beta_i v_i, lowest index among near-ties; None if v = 0."""
    if not np.any(v > 0):
        return None
    with np.errstate(invalid="ignore"):
        sc = np.where(v > 0, beta * v, 0.0)
    m = sc.max()
    return int(np.argmax(sc >= m * (1.0 - TIE_REL)))


def _hybrid(spec, W, v_t, hist_tail, T_total, opts, warm=None) -> SolveResult:
    hist_tail = np.asarray(hist_tail, dtype=float).reshape(-1, spec.n)
    items = np.vstack([np.asarray(v_t, dtype=float)[None, :], hist_tail])
    return solve_program(spec, W, items, T_total, opts, warm)


def dual_resolve_step(spec: WelfareSpec, W, v_t, hist_tail, T_total, solver_opts: SolveOptions | None = None):
    """Solve the hybrid program on (W; v_t, hist_tail) and act on its prices.

    Returns (agent or None, beta).
    """
    res = _hybrid(spec, W, v_t, hist_tail, T_total, solver_opts)
    return _dual_winner(res.beta_star, np.asarray(v_t, float)), res.beta_star


def primal_resolve_step(spec: WelfareSpec, W, v_t, hist_tail, T_total, solver_opts: SolveOptions | None = None):
    """Same hybrid solve; returns the optimizer's row for the current item."""
    res = _hybrid(spec, W, v_t, hist_tail, T_total, solver_opts)
    return res.row(0), res


def _run_resolving(kind: AlgorithmKind, spec, online_seq: ItemSequence, hist_seq: ItemSequence):
    V = online_seq.values
    H = hist_seq.values
    T, n = V.shape
    primal = kind.name == "primal_resolve"
    opts = kind.solver_options()
    if not primal:
        # only the prices are used, the plan support need not be polished
        opts = replace(opts, kkt_polish=False)
    buf = np.array(H, dtype=float)
    W = np.zeros(n)
    x = np.zeros((T, n))
    W_path = np.zeros((T, n))
    betas = np.zeros((T, n))
    gaps = np.zeros(T)
    agents = np.full(T, -1)
    warm = None
    for t in range(T):
        buf[t] = V[t]
        res = solve_program(spec, W, buf[t:], T, opts, warm if kind.warm_start else None)
        betas[t] = res.beta_star
        gaps[t] = res.gap
        if primal:
            row = res.row(0)
            row = np.where(V[t] > 0, row, 0.0)
            x[t] = row
            if np.count_nonzero(row) == 1:
                agents[t] = int(np.argmax(row))
        else:
            k = _dual_winner(res.beta_star, V[t])
            if k is not None:
                x[t, k] = 1.0
                agents[t] = k
        W_new = W + V[t] * x[t]
        if kind.warm_start and t + 1 < T:
            warm = res.active.shift(W, W_new, V[t], H[t + 1], V[t + 1], T)
        W = W_new
        W_path[t] = W
    return AllocationTrajectory(kind.name, x, W_path, W / T, agents, beta_path=betas, gaps=gaps)


def run_online(kind: AlgorithmKind | str, spec: WelfareSpec, online_seq: ItemSequence,
               hist_seq: ItemSequence | None = None) -> AllocationTrajectory:
    if isinstance(kind, str):
        kind = AlgorithmKind(kind)
    if online_seq.n != spec.n:
        raise ValueError(f"sequence has {online_seq.n} agents but the welfare spec has {spec.n}")
    online_seq.require_horizon()
    if kind.needs_history:
        if hist_seq is None:
            raise ValueError(f"{kind.name} needs a history sequence")
        if hist_seq.values.shape != online_seq.values.shape:
            raise ValueError(
                f"history shape {hist_seq.values.shape} does not match online shape {online_seq.values.shape}"
            )
        return _run_resolving(kind, spec, online_seq, hist_seq)
    T, n = online_seq.values.shape
    if kind.name == "greedy":
        return run_greedy(spec, online_seq, kind.safeguard_p0)
    if kind.name == "round_robin":
        agents = np.arange(T) % n
        return _from_agents("round_robin", online_seq, agents)
    V = online_seq.values
    agents = np.where(V.max(axis=1) > 0, V.argmax(axis=1), -1)
    return _from_agents("utilitarian_greedy", online_seq, agents)
