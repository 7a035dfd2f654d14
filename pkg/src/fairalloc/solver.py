"""Hindsight and hybrid log-welfare programs.

The hybrid program with past utility W, tail items v_1..v_L and divisor T is

    max log f(u)   s.t.  u = (W + sum_tau v_tau * x_tau) / T,  x_tau in simplex (<= 1)

It is solved in utility space by a conditional-gradient method with away
steps.  Every vertex of the feasible set is an integral assignment of the
tail items, so the iterate is stored as a convex combination of assignments
("atoms") and the fractional plan is read off those weights.  The linear
oracle at prices g gives each item to argmax_i g_i v_tau,i, which is the
same rule that certifies optimality: the Frank-Wolfe gap equals the duality
gap of the dual at beta = g.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .instance import AllocationPlan, ItemSequence
from .welfare import P0_BAND, WelfareSpec, dual_objective

LINE_SEARCH_ITERS = 60
# clipped noisy histories tie often and split hundreds of items; frequent
# polishing beats Frank-Wolfe crawling across such faces
POLISH_EVERY = 4


class PreconditionError(ValueError):
    """An agent has no reachable utility although p <= 0."""


@dataclass
class SolveOptions:
    tol: float = 1e-8
    max_iters: int = 20_000
    debug: bool = False
    # keep iterating past tol until every plan entry sits on an argmax of beta_i v_i
    kkt_polish: bool = True
    kkt_rel: float = 1e-7

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("solver tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class SolveRequest:
    spec: WelfareSpec
    W: np.ndarray
    items: np.ndarray
    T_total: int
    opts: SolveOptions = field(default_factory=SolveOptions)


@dataclass
class ActiveSet:
    """Convex combination of integral assignments of the tail items.

    assign[k, tau] is the agent receiving item tau in atom k (-1: nobody),
    util[k] the time-averaged utility vector of that vertex (W included).
    """

    assign: np.ndarray
    weights: np.ndarray
    util: np.ndarray

    def shift(self, W_old, W_new, old_head, old_next, new_next, T_total) -> "ActiveSet":
        """Re-express the atoms for the next program in a re-solving loop.

        The old program had tail rows (old_head, old_next, rest...) and past
        utility W_old; the new one has (new_next, rest...) and W_new.  Each
        atom keeps its decisions on the common rows.
        """
        a0 = self.assign[:, 0].astype(np.intp)
        util = self.util + (np.asarray(W_new, float) - np.asarray(W_old, float)) / T_total
        K = a0.size
        rows = np.arange(K)
        hit = a0 >= 0
        util[rows[hit], a0[hit]] -= old_head[a0[hit]] / T_total
        if self.assign.shape[1] > 1:
            a1 = self.assign[:, 1].astype(np.intp)
            hit = a1 >= 0
            util[rows[hit], a1[hit]] += (new_next[a1[hit]] - old_next[a1[hit]]) / T_total
        np.maximum(util, 0.0, out=util)
        return ActiveSet(self.assign[:, 1:], self.weights.copy(), util)


class SolveResult:
    """Optimum of a hybrid program with its dual certificate.

    u_star is time averaged.  Agents that cannot receive any utility (only
    possible when p > 0) have u_star = 0 and beta_star = inf.
    """

    def __init__(self, u_star, beta_star, primal, dual, iters, active, n, certified, tol):
        self.u_star = u_star
        self.beta_star = beta_star
        self.primal = primal
        self.dual = dual
        self.gap = dual - primal if np.isfinite(dual) else 0.0
        self.iters = iters
        self.active = active
        self.n = n
        self.certified = certified
        self.tol = tol

    @property
    def welfare(self) -> float:
        return math.exp(self.primal) if self.primal > -np.inf else 0.0

    def row(self, tau: int) -> np.ndarray:
        """Fractions of tail item ``tau`` (a row of the plan)."""
        out = np.zeros(self.n)
        a = self.active.assign[:, tau].astype(np.intp)
        hit = a >= 0
        np.add.at(out, a[hit], self.active.weights[hit])
        return out

    @cached_property
    def plan(self) -> AllocationPlan:
        A = self.active.assign
        L = A.shape[1]
        x = np.zeros((L, self.n))
        cols = np.arange(L)
        for a, w in zip(A, self.active.weights):
            hit = a >= 0
            x[cols[hit], a[hit]] += w
        return AllocationPlan(np.minimum(x, 1.0))

    def __repr__(self):
        return (f"SolveResult(u_star={self.u_star.tolist()}, beta_star={self.beta_star.tolist()}, "
                f"primal={self.primal!r}, gap={self.gap!r}, iters={self.iters}, "
                f"certified={self.certified})")


# -- small numeric helpers on the active coordinates -------------------------

class _Log:
    """log f restricted to agents with reachable utility."""

    def __init__(self, spec: WelfareSpec, act: np.ndarray):
        self.nash = spec.is_nash
        self.p = 0.0 if self.nash else spec.p
        self.B = spec.B[act]
        self.logB = np.log(self.B)

    def value(self, u):
        if np.any(u <= 0):
            if self.nash or self.p < 0:
                return -np.inf
        with np.errstate(divide="ignore"):
            lu = np.log(u)
        if self.nash:
            return float(self.B @ lu)
        z = self.logB + self.p * lu
        m = z.max()
        return float((m + math.log(np.exp(z - m).sum())) / self.p)

    def grad(self, u):
        if self.nash:
            return self.B / u
        z = self.logB + self.p * np.log(u)
        e = np.exp(z - z.max())
        return e / (e.sum() * u)

    def slope(self, u, d):
        """(h', h'') of h(gamma) = log f(u + gamma d) at gamma = 0."""
        g = self.grad(u)
        gd = g @ d
        curv = (self.p - 1.0) * (g * d * d / u).sum() - self.p * gd * gd
        return gd, curv


def _line_search(lg: _Log, u, d, gmax):
    """Maximize log f(u + gamma d) on [0, gmax]; h is concave so h' is monotone."""
    end = u + gmax * d
    if np.all(end > 0):
        h1, _ = lg.slope(end, d)
        if h1 >= 0:
            return gmax
    lo, hi = 0.0, gmax
    h0, c0 = lg.slope(u, d)
    if h0 <= 0:
        return 0.0
    gam = -h0 / c0 if c0 < 0 else 0.5 * gmax
    if not (0.0 < gam < hi):
        gam = 0.5 * hi
    for _ in range(LINE_SEARCH_ITERS):
        x = u + gam * d
        if np.any(x <= 0):
            hi = gam
            gam = 0.5 * (lo + hi)
            continue
        h, c = lg.slope(x, d)
        if h > 0:
            lo = gam
        else:
            hi = gam
        if h == 0 or hi - lo <= 1e-16 * gmax:
            break
        nxt = gam - h / c if c < 0 else 0.5 * (lo + hi)
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - gam) <= 1e-15 * max(gam, 1e-300):
            gam = nxt
            break
        gam = nxt
    return gam


# -- atoms -----------------------------------------------------------------

class _Atoms:
    def __init__(self, L, n):
        self.L = L
        self.dtype = np.int8 if n < 127 else np.int32
        self.assign = []
        self.util = []
        self.w = []
        self.index = {}

    def add(self, a, s, w=0.0):
        key = a.tobytes()
        k = self.index.get(key)
        if k is None:
            k = len(self.w)
            self.index[key] = k
            self.assign.append(a)
            self.util.append(s)
            self.w.append(w)
        else:
            self.w[k] += w
        return k

    def arrays(self):
        return np.array(self.util), np.array(self.w)

    def remove(self, k):
        last = len(self.w) - 1
        del self.index[self.assign[k].tobytes()]
        if k != last:
            self.assign[k] = self.assign[last]
            self.util[k] = self.util[last]
            self.w[k] = self.w[last]
            self.index[self.assign[k].tobytes()] = k
        self.assign.pop()
        self.util.pop()
        self.w.pop()


def _support_ok(atoms, Va, act, g, vbar, rel):
    """Every positive-weight atom gives items only to near-argmax agents."""
    if Va.shape[0] == 0:
        return True
    sc = Va * g
    best = sc.max(axis=1)
    thr = best - rel * vbar * float(g.max())
    pos = np.full(int(act.max()) + 1 if act.size else 1, -1)
    pos[act] = np.arange(act.size)
    cols = np.arange(Va.shape[0])
    for a, w in zip(atoms.assign, atoms.w):
        if w <= 0:
            continue
        hit = a >= 0
        loc = pos[a[hit].astype(np.intp)]
        if np.any(sc[cols[hit], loc] < thr[hit]):
            return False
    return True


def _plan_rows(atoms, L, act_pos, na):
    x = np.zeros((L, na))
    cols = np.arange(L)
    for a, w in zip(atoms.assign, atoms.w):
        hit = a >= 0
        x[cols[hit], act_pos[a[hit].astype(np.intp)]] += w
    return x


def _face_newton(lg: _Log, Va, Wa, T, x, max_rounds=40):
    """Newton ascent on the fractional entries of a plan, support held fixed.

    Each item keeps the agents it currently uses; one of them (the largest
    share) is the base and the others carry free shares y.  The objective
    phi(y) = log f(u(y)) is concave with gradient C^T g and Hessian C^T H C.
    C has only n rows, so the minimum-norm Newton step comes from a thin SVD
    of C at a cost linear in the number of shares.  Shares that reach zero
    leave the support.  Returns the new plan rows.
    """
    x = x.copy()
    na = Va.shape[1]
    for _ in range(max_rounds):
        pos = x > 0
        frac = np.nonzero(pos.sum(axis=1) >= 2)[0]
        if frac.size == 0:
            break
        base = np.argmax(x[frac], axis=1)
        sub = pos[frac].copy()
        sub[np.arange(frac.size), base] = False
        r, vi = np.nonzero(sub)  # free shares: (row frac[r], agent vi)
        vt = frac[r]
        vb = base[r]
        m = vt.size
        C = np.zeros((na, m))
        cols = np.arange(m)
        C[vi, cols] += Va[vt, vi] / T
        C[vb, cols] -= Va[vt, vb] / T
        u = (Wa + (Va * x).sum(axis=0)) / T
        if np.any(u <= 0):
            break
        g = lg.grad(u)
        H = np.diag((lg.p - 1.0) * g / u) - lg.p * np.outer(g, g)
        Uc, sv, Vt = np.linalg.svd(C, full_matrices=False)
        keep = sv > 1e-12 * max(sv.max(), 1e-300)
        Uc, sv, Vt = Uc[:, keep], sv[keep], Vt[keep]
        grad = C.T @ g
        z = np.linalg.lstsq(Uc.T @ H @ Uc, Uc.T @ g, rcond=None)[0]
        step = -(Vt.T @ (z / sv))
        newton = bool(np.all(np.isfinite(step))) and grad @ step > 0
        if not newton:
            step = grad  # fall back to the gradient direction
        if np.max(np.abs(step)) <= 1e-17:
            break
        # largest feasible multiple of the step
        amax = 1.0
        neg = step < 0
        if neg.any():
            amax = min(amax, float(np.min(x[vt[neg], vi[neg]] / -step[neg])))
        inc = np.bincount(r, weights=step, minlength=frac.size)  # base loses this much
        up = inc > 0
        if up.any():
            amax = min(amax, float(np.min(x[frac[up], base[up]] / inc[up])))
        f0 = lg.value(u)
        d = C @ step
        alpha = amax
        for _ in range(30):
            un = u + alpha * d
            if np.all(un > 0) and lg.value(un) >= f0:
                break
            alpha *= 0.5
        else:
            break
        np.add.at(x, (vt, vi), alpha * step)
        np.add.at(x, (vt, vb), -alpha * step)
        x[x < 1e-15] = 0.0
        # after a full Newton step with a tiny decrement the next one is its square
        if alpha >= 1.0 and (np.max(np.abs(step)) <= 1e-14 or (newton and grad @ step <= 1e-12)):
            break
    return x


def _decompose(x, act, dtype):
    """Write plan rows as a convex combination of integral assignments."""
    L, na = x.shape
    tot = x.sum(axis=1)
    live = tot > 0
    cum = np.cumsum(x, axis=1) / np.where(live, tot, 1.0)[:, None]
    last = na - 1 - np.argmax((x > 0)[:, ::-1], axis=1)
    cuts = np.unique(np.concatenate([[0.0, 1.0], cum[live].ravel()]))
    cuts = cuts[(cuts >= 0) & (cuts <= 1)]
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 1e-14:
            continue
        mid = 0.5 * (lo + hi)
        k = np.minimum((cum <= mid).sum(axis=1), last)
        a = np.where(live, act[k], -1).astype(dtype)
        out.append((a, hi - lo))
    return out


def _try_polish(lg, atoms, V, Va, W, T, act, act_pos, gap, nza, Vnz, n):
    """Face-Newton polish; returns new atoms only if the certified gap at least halves."""
    L = V.shape[0]
    x = _plan_rows(atoms, L, act_pos, act.size)
    xn = _face_newton(lg, Va, W[act], T, x)
    u = (W[act] + (Va * xn).sum(axis=0)) / T
    if np.any(u <= 0):
        return None
    g = lg.grad(u)
    a = np.full(L, -1, dtype=atoms.dtype)
    if nza.size:
        a[nza] = act[(Vnz * g).argmax(axis=1)]
    s = _vertex_util(V, W, a, T, n)
    # demand real progress: a polish that returns the same point would be
    # accepted forever and starve the Frank-Wolfe steps
    if not float(g @ (s[act] - u)) < 0.5 * gap:
        return None
    new = _Atoms(L, n)
    for b, wt in _decompose(xn, act, atoms.dtype):
        if wt > 1e-16:
            new.add(b, _vertex_util(V, W, b, T, n), wt)
    if not new.w:
        return None
    tot = sum(new.w)
    new.w = [x / tot for x in new.w]
    return new


def _vertex_util(V, W, a, T, n):
    hit = a >= 0
    s = np.bincount(a[hit].astype(np.intp), weights=V[np.nonzero(hit)[0], a[hit]], minlength=n)
    return (W + s) / T


def _initial_assignments(V, n):
    """n assignments; the r-th gives each item to its (r mod k)-th positive agent."""
    pos = V > 0
    k = pos.sum(axis=1)
    rank = np.cumsum(pos, axis=1) - 1
    out = []
    for r in range(max(n, 1)):
        target = np.where(k > 0, r % np.maximum(k, 1), -1)
        choose = pos & (rank == target[:, None])
        a = np.where(k > 0, choose.argmax(axis=1), -1)
        out.append(a)
    return out


# -- main entry points -----------------------------------------------------

def _coerce_items(items, n):
    if isinstance(items, ItemSequence):
        return items.values, items.agent_names
    V = np.asarray(items, dtype=float)
    if V.size == 0:
        V = V.reshape(0, n)
    return V.reshape(-1, n), None


def solve_program(spec: WelfareSpec, W, items, T_total, opts: SolveOptions | None = None,
                  warm: ActiveSet | None = None) -> SolveResult:
    """Solve the hybrid program; see the module docstring.

    ``warm`` seeds the active set (e.g. from :meth:`ActiveSet.shift`).
    """
    opts = opts or SolveOptions()
    n = spec.n
    W = np.asarray(W, dtype=float).reshape(n)
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise ValueError("past utility W must be finite and nonnegative")
    V, names = _coerce_items(items, n)
    if np.any(V < 0):
        raise ValueError("item values must be nonnegative")
    L = V.shape[0]
    T = float(T_total)
    if not T > 0 or T < L:
        raise ValueError(f"divisor T_total={T_total} must be positive and at least the tail length {L}")
    names = names or tuple(f"a{i}" for i in range(n))

    reach = (W > 0) | (V > 0).any(axis=0)
    if not spec.p > P0_BAND and not reach.all():
        i = int(np.argmin(reach))
        raise PreconditionError(
            f"agent {names[i]} has no reachable utility (zero past utility and no positively valued item)"
        )
    act = np.nonzero(reach)[0]
    nz = (V > 0).any(axis=1)
    atoms = _Atoms(L, n)

    if act.size == 0:
        a = np.full(L, -1, dtype=atoms.dtype)
        atoms.add(a, np.zeros(n), 1.0)
        util, w = atoms.arrays()
        active = ActiveSet(np.array(atoms.assign), w, util)
        return SolveResult(np.zeros(n), np.full(n, np.inf), -np.inf, -np.inf, 0, active, n, True, opts.tol)

    if warm is not None and warm.weights.size:
        keep = warm.weights > 0
        tot = warm.weights[keep].sum()
        for a, s, w in zip(warm.assign[keep], warm.util[keep], warm.weights[keep]):
            atoms.add(np.ascontiguousarray(a, dtype=atoms.dtype), s, w / tot)
        util, w = atoms.arrays()
        # the cold start keeps every reachable agent positive; a warm set
        # missing one would put a zero inside log u (or u^(p-1) for p > 0)
        if np.any((w @ util)[act] <= 0):
            warm = None
            atoms = _Atoms(L, n)
    if warm is None or not warm.weights.size:
        inits = _initial_assignments(V, n)
        for a in inits:
            atoms.add(a.astype(atoms.dtype), _vertex_util(V, W, a, T, n), 1.0 / len(inits))

    lg = _Log(spec, act)
    Va = V if act.size == n else V[:, act]
    if isinstance(items, ItemSequence):
        vmax = items.vbar
    else:
        vmax = float(V.max()) if V.size else 0.0
    nza = np.nonzero(nz)[0]
    Vnz = Va if nza.size == L else Va[nza]
    act_pos = np.zeros(n, dtype=np.intp)
    act_pos[act] = np.arange(act.size)
    gfull = np.zeros(n)
    gap = np.inf
    primal = -np.inf
    it = 0
    certified = False
    util, w = atoms.arrays()
    while True:
        u = np.maximum(w @ util, 0.0)
        ua = u[act]
        g = lg.grad(ua)
        primal = lg.value(ua)
        # linear oracle
        a = np.full(L, -1, dtype=atoms.dtype)
        if nza.size:
            winner = (Vnz * g).argmax(axis=1)
            a[nza] = act[winner]
        s = _vertex_util(V, W, a, T, n)
        gap = float(g @ (s[act] - ua))
        scale = max(1.0, abs(primal))
        if opts.debug:
            gfull[:] = np.inf
            gfull[act] = g
            d = dual_objective(spec, gfull, W, V, T)
            assert d >= primal - 1e-10 * scale, (d, primal)
        certified = gap <= opts.tol * scale
        if certified:
            if not opts.kkt_polish or gap <= 1e-15 * scale or _support_ok(atoms, Va, act, g, vmax, opts.kkt_rel):
                break
        if it >= opts.max_iters:
            break
        it += 1
        if certified or it % POLISH_EVERY == 0:
            better = _try_polish(lg, atoms, V, Va, W, T, act, act_pos, gap, nza, Vnz, n)
            if better is not None:
                atoms = better
                util, w = atoms.arrays()
                continue
        scores = util[:, act] @ g
        k_away = int(np.argmin(np.where(w > 0, scores, np.inf)))
        away_gap = float(g @ ua - scores[k_away])
        if gap >= away_gap or w[k_away] >= 1.0:
            d = s - u
            gam = _line_search(lg, ua, d[act], 1.0)
            if gam <= 0:
                break
            k = atoms.add(a, s)
            if gam >= 1.0:
                atoms.w = [0.0] * len(atoms.w)
                atoms.w[k] = 1.0
            else:
                atoms.w = [x * (1.0 - gam) for x in atoms.w]
                atoms.w[k] += gam
        else:
            wa = w[k_away]
            gmax = wa / (1.0 - wa)
            d = u - util[k_away]
            gam = _line_search(lg, ua, d[act], gmax)
            if gam <= 0:
                break
            atoms.w = [x * (1.0 + gam) for x in atoms.w]
            if gam >= gmax:
                atoms.w[k_away] = 0.0
            else:
                atoms.w[k_away] -= gam * 1.0
        for k in [k for k, x in enumerate(atoms.w) if x <= 0.0][::-1]:
            atoms.remove(k)
        util, w = atoms.arrays()
        w = w / w.sum()
        atoms.w = list(w)

    u = np.maximum(w @ util, 0.0)
    beta = np.full(n, np.inf)
    beta[act] = lg.grad(u[act])
    dual = dual_objective(spec, beta, W, V, T)
    active = ActiveSet(np.array(atoms.assign).reshape(len(atoms.w), L), w, util)
    return SolveResult(u, beta, primal, dual, it, active, n, certified, opts.tol)


def solve_hybrid(req: SolveRequest, warm: ActiveSet | None = None) -> SolveResult:
    return solve_program(req.spec, req.W, req.items, req.T_total, req.opts, warm)


def solve_hindsight(spec: WelfareSpec, items, opts: SolveOptions | None = None) -> SolveResult:
    V, _ = _coerce_items(items, spec.n)
    return solve_program(spec, np.zeros(spec.n), items, max(V.shape[0], 1), opts)


def opt_welfare(spec: WelfareSpec, items, opts: SolveOptions | None = None) -> float:
    return solve_hindsight(spec, items, opts).welfare


# -- brute-force oracle ----------------------------------------------------

def _simplex_grid(m, k):
    """All points of the m-simplex face with coordinates j/k, all positive."""
    pts = []
    for c in itertools.combinations(range(1, k), m - 1):
        b = (0,) + c + (k,)
        pts.append([(b[i + 1] - b[i]) / k for i in range(m)])
    return np.array(pts).reshape(-1, m)


def brute_force_oracle(spec: WelfareSpec, items, grid_k: int = 50) -> float:
    """Best welfare over plans whose fractions lie on the grid {j/grid_k}.

    The search ranges over every plan in which all items are given wholly to
    one agent except a few split items, where the number of extra agents
    across split items is at most n-1.  Some optimal plan has this shape
    (the bipartite support of a vertex optimum is a forest), so the search is
    exhaustive for the optimum up to the grid resolution.
    """
    V, _ = _coerce_items(items, spec.n)
    T, n = V.shape
    if T > 6 or n > 3 or grid_k > 100 or grid_k < 1:
        raise ValueError("brute force oracle is limited to T <= 6, n <= 3, grid_k <= 100")
    best = 0.0
    agents = range(n)
    # patterns: list of (item, support) with sum(|support| - 1) <= n - 1
    supports = [s for m in range(2, n + 1) for s in itertools.combinations(agents, m)]
    patterns = [()]
    frontier = [((), 0, -1)]
    while frontier:
        new = []
        for pat, extra, last in frontier:
            for t in range(last + 1, T):
                for s in supports:
                    e = extra + len(s) - 1
                    if e <= n - 1:
                        q = pat + ((t, s),)
                        patterns.append(q)
                        new.append((q, e, t))
        frontier = new

    def evaluate(U):
        out = 0.0
        for chunk in np.array_split(U, max(1, U.shape[0] // 200_000)):
            if chunk.size:
                vals = _welfare_rows(spec, chunk)
                out = max(out, float(vals.max()))
        return out

    for pat in patterns:
        split_items = [t for t, _ in pat]
        rest = [t for t in range(T) if t not in split_items]
        # integral part: every assignment of remaining items
        if rest:
            combos = np.array(list(itertools.product(agents, repeat=len(rest))))
            Uint = np.zeros((combos.shape[0], n))
            for col, t in enumerate(rest):
                np.add.at(Uint, (np.arange(combos.shape[0]), combos[:, col]), V[t, combos[:, col]])
        else:
            Uint = np.zeros((1, n))
        Ufrac = np.zeros((1, n))
        for t, s in pat:
            grid = _simplex_grid(len(s), grid_k)
            contrib = np.zeros((grid.shape[0], n))
            contrib[:, list(s)] = grid * V[t, list(s)]
            Ufrac = (Ufrac[:, None, :] + contrib[None, :, :]).reshape(-1, n)
        U = (Uint[:, None, :] + Ufrac[None, :, :]).reshape(-1, n) / T
        best = max(best, evaluate(U))
    return best


def _welfare_rows(spec: WelfareSpec, U: np.ndarray) -> np.ndarray:
    B = spec.B
    with np.errstate(divide="ignore"):
        lu = np.log(U)
    if spec.is_nash:
        return np.exp(lu @ B)
    p = spec.p
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        s = (B * U**p).sum(axis=1)
    if p < 0:
        with np.errstate(divide="ignore"):
            out = np.where(np.all(U > 0, axis=1), s ** (1.0 / p), 0.0)
        return out
    return s ** (1.0 / p)


__all__ = [
    "ActiveSet", "PreconditionError", "SolveOptions", "SolveRequest", "SolveResult",
    "brute_force_oracle", "opt_welfare", "solve_hindsight", "solve_hybrid",
    "solve_program",
]
