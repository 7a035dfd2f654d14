"""CES (generalized-mean) welfare and the calculus of its logarithm.

    f(u) = (sum_i B_i u_i^p)^(1/p)     p != 0
    f(u) = prod_i u_i^B_i              p == 0

All powers are evaluated through log-sum-exp so that the p -> 0 limit and
large/small utilities stay accurate.  Exponents with |p| < P0_BAND are
treated as exactly zero.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

P0_BAND = 1e-9
GRID_POINTS = 17
GRID_MAX_AXES = 6
GRID_SAFETY = 1.1


@dataclass(frozen=True, eq=False)
class WelfareSpec:
    """Exponent ``p < 1`` and positive weights ``B`` (rescaled to sum to one)."""

    p: float
    B: np.ndarray

    def __post_init__(self):
        p = float(self.p)
        if not np.isfinite(p) or p >= 1.0:
            raise ValueError(f"exponent p must be finite and < 1, got {self.p}")
        B = np.array(self.B, dtype=float).ravel()
        if B.size < 1:
            raise ValueError("need at least one agent")
        if not np.all(np.isfinite(B)) or np.any(B <= 0):
            raise ValueError("weights must be strictly positive")
        B = B / B.sum()
        B.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "B", B)

    @classmethod
    def symmetric(cls, n: int, p: float) -> "WelfareSpec":
        return cls(p, np.full(int(n), 1.0 / int(n)))

    @property
    def n(self) -> int:
        return self.B.size

    @property
    def is_nash(self) -> bool:
        return abs(self.p) < P0_BAND

    @property
    def is_symmetric(self) -> bool:
        return bool(np.all(self.B == self.B[0]))

    def __repr__(self):
        return f"WelfareSpec(p={self.p!r}, B={self.B.tolist()!r})"


def _vec(spec: WelfareSpec, u, name="u") -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != spec.n:
        raise ValueError(f"{name} must be a vector of length {spec.n}, got shape {u.shape}")
    return u


def _log_welfare(spec: WelfareSpec, u: np.ndarray) -> float:
    # u is validated and nonnegative
    with np.errstate(divide="ignore"):
        logu = np.log(u)
    if spec.is_nash:
        if np.any(u == 0):
            return -np.inf
        return float(spec.B @ logu)
    p = spec.p
    with np.errstate(invalid="ignore"):
        s = logsumexp(np.log(spec.B) + p * logu)
    return float(s / p)


def eval_log_welfare(spec: WelfareSpec, u) -> float:
    """log f(u); ``-inf`` when some u_i = 0 and p <= 0 (or when u = 0)."""
    u = _vec(spec, u)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise ValueError("utilities must be nonnegative")
    return _log_welfare(spec, u)


def eval_welfare(spec: WelfareSpec, u) -> float:
    """Generalized mean f(u) of a nonnegative utility vector."""
    return float(np.exp(eval_log_welfare(spec, u)))


def _grad(spec: WelfareSpec, u: np.ndarray) -> np.ndarray:
    # u > 0 assumed.  w = B u^p / sum(B u^p) is a probability vector, grad = w / u.
    if spec.is_nash:
        return spec.B / u
    w = softmax(np.log(spec.B) + spec.p * np.log(u))
    return w / u


def grad_log_welfare(spec: WelfareSpec, u) -> np.ndarray:
    """Gradient of log f at a strictly positive u.

    Satisfies the Euler identity <grad, u> = 1.
    """
    u = _vec(spec, u)
    if not np.all(u > 0):
        raise ValueError("gradient of log f needs strictly positive utilities")
    return _grad(spec, u)


def _log_m(spec: WelfareSpec, beta: np.ndarray) -> float:
    p = spec.p
    q = p / (p - 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.log(spec.B) / (1.0 - p) + q * np.log(beta)
    # q*log(inf) with q < 0 gives -inf: an agent with infinite price drops out
    return float(logsumexp(terms) / q)


def _conjugate(spec: WelfareSpec, beta: np.ndarray) -> float:
    if spec.is_nash:
        return float(spec.B @ (np.log(spec.B) - np.log(beta)) - 1.0)
    return -1.0 - _log_m(spec, beta)


def conjugate(spec: WelfareSpec, beta) -> float:
    """max_{u >= 0} log f(u) - <beta, u>, in closed form.

    Entries of beta may be +inf (an agent whose utility is pinned at zero);
    for p > 0 such agents simply drop out, for p <= 0 the value is -inf.
    """
    beta = _vec(spec, beta, "beta")
    if np.any(np.isnan(beta)) or np.any(beta <= 0):
        raise ValueError("dual prices must be strictly positive")
    return _conjugate(spec, beta)


def _dot0(a, b):
    # inner product with the convention inf * 0 = 0
    with np.errstate(invalid="ignore"):
        prod = a * b
    return np.where(b > 0, prod, 0.0)


def dual_objective(spec: WelfareSpec, beta, W, items, T_total) -> float:
    """Dual value of the hybrid program with past utility W and item tail ``items``.

    (1/T) (<beta, W> + sum_tau max_i beta_i v_tau,i) + conjugate(beta)
    """
    beta = _vec(spec, beta, "beta")
    W = _vec(spec, W, "W")
    if np.any(np.isnan(beta)) or np.any(beta <= 0):
        raise ValueError("dual prices must be strictly positive")
    items = np.asarray(items, dtype=float).reshape(-1, spec.n)
    if T_total <= 0 or T_total < items.shape[0]:
        raise ValueError("T_total must be positive and at least the number of tail items")
    lin = _dot0(beta, W).sum()
    if items.shape[0]:
        lin += _dot0(beta[None, :], items).max(axis=1).sum()
    return float(lin / T_total + _conjugate(spec, beta))


@dataclass(frozen=True)
class SmoothnessBox:
    """Box-restricted constants of log f on [lo, hi]^n.

    lam   smoothness of log f w.r.t. the l-infinity norm (numeric grid estimate)
    kappa max ratio of partial derivatives of f (closed form)
    lip1  Lipschitz constant of log f w.r.t. l1, i.e. max of ||grad||_inf (grid)
    """

    lo: float
    hi: float
    lam: float
    kappa: float
    lip1: float


def _box_points(spec: WelfareSpec, lo: float, hi: float) -> np.ndarray:
    n = spec.n
    if hi > lo:
        axis = np.geomspace(lo, hi, GRID_POINTS)
    else:
        axis = np.array([lo])
    if spec.is_symmetric:
        # symmetric weights: every point is a permutation of one with two levels
        pts = []
        for k in range(n + 1):
            for a, b in itertools.product(axis, axis):
                pts.append([a] * k + [b] * (n - k))
        return np.unique(np.array(pts), axis=0)
    if n > GRID_MAX_AXES:
        raise ValueError(f"grid estimate needs n <= {GRID_MAX_AXES} for asymmetric weights")
    return np.array(list(itertools.product(axis, repeat=n)))


def _hessian_inf_norm(spec: WelfareSpec, U: np.ndarray) -> np.ndarray:
    """max_{|d|_inf <= 1} -d^T H d at every row of U (exact per point)."""
    p = spec.p
    if spec.is_nash:
        return (spec.B / U**2).sum(axis=1)
    logits = np.log(spec.B)[None, :] + p * np.log(U)
    w = softmax(logits, axis=1)
    g = w / U
    # -H = diag((1-p) g/u) + p g g^T ; the max over the cube sits at a vertex d
    diag_part = ((1.0 - p) * g / U).sum(axis=1)
    if p > 0:
        return diag_part + p * g.sum(axis=1) ** 2
    n = spec.n
    if n <= 16:
        signs = np.array(list(itertools.product([1.0, -1.0], repeat=n - 1)))
        signs = np.hstack([np.ones((signs.shape[0], 1)), signs])
        best = np.empty(U.shape[0])
        for start in range(0, U.shape[0], 4096):
            gg = g[start:start + 4096]
            best[start:start + 4096] = ((gg @ signs.T) ** 2).min(axis=1)
        return diag_part + p * best
    return diag_part  # dropping a nonpositive term keeps an upper bound


def smoothness_constants(spec: WelfareSpec, lo: float, hi: float) -> SmoothnessBox:
    """Conservative constants of log f on the box [lo, hi]^n.

    kappa is exact.  lam and lip1 are maxima over a geometric grid of
    GRID_POINTS values per axis, inflated by GRID_SAFETY.  For symmetric
    weights the grid covers all two-level points (any n); otherwise the full
    product grid is used and n is capped at GRID_MAX_AXES.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo > 0:
        raise ValueError("box floor lo must be positive")
    if hi < lo:
        raise ValueError("box requires hi >= lo")
    B = spec.B
    p = 0.0 if spec.is_nash else spec.p
    kappa = float(B.max() / B.min() * (hi / lo) ** (1.0 - p))
    U = _box_points(spec, lo, hi)
    lam = 0.0
    lip1 = 0.0
    for start in range(0, U.shape[0], 1 << 16):
        chunk = U[start:start + (1 << 16)]
        lam = max(lam, float(_hessian_inf_norm(spec, chunk).max()))
        if spec.is_nash:
            g = B[None, :] / chunk
        else:
            g = softmax(np.log(B)[None, :] + p * np.log(chunk), axis=1) / chunk
        lip1 = max(lip1, float(g.max()))
    return SmoothnessBox(lo=lo, hi=hi, lam=GRID_SAFETY * lam, kappa=kappa, lip1=GRID_SAFETY * lip1)
