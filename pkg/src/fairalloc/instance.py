"""Item sequences, allocation plans, and CSV storage."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

GP_TOL = 1e-12
PERTURB_RETRIES = 8


@dataclass(frozen=True, eq=False)
class ItemSequence:
    """T x n matrix of item values bounded by ``vbar``.

    Row t holds the value of item t to each agent, in whole-item units.
    The array is stored read-only.
    """

    values: np.ndarray
    vbar: float = 1.0
    agent_names: tuple = field(default=None)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(1, -1)
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError(f"values must be a T x n matrix, got shape {v.shape}")
        vbar = float(self.vbar)
        if not vbar > 0 or not np.isfinite(vbar):
            raise ValueError("vbar must be positive and finite")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        bad = np.argwhere((v < 0) | (v > vbar))
        if bad.size:
            t, i = bad[0]
            raise ValueError(f"row {t}: value {v[t, i]!r} for agent {i} outside [0, {vbar!r}]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "vbar", vbar)
        names = self.agent_names
        if names is None:
            names = tuple(f"a{i}" for i in range(v.shape[1]))
        elif len(names) != v.shape[1]:
            raise ValueError("one agent name per column required")
        object.__setattr__(self, "agent_names", tuple(names))

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def require_horizon(self):
        """Online runs assume at least as many items as agents."""
        if self.T < self.n:
            raise ValueError(f"horizon T={self.T} is shorter than the number of agents n={self.n}")

    def with_values(self, values) -> "ItemSequence":
        return ItemSequence(values, self.vbar, self.agent_names)


@dataclass(frozen=True, eq=False)
class AllocationPlan:
    """Fractional allocation: x[t, i] >= 0 with row sums at most one."""

    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 2:
            raise ValueError("plan must be a T x n matrix")
        if np.any(x < 0) or not np.all(np.isfinite(x)):
            raise ValueError("plan entries must be nonnegative")
        over = np.nonzero(x.sum(axis=1) > 1 + 1e-12)[0]
        if over.size:
            raise ValueError(f"row {over[0]} allocates more than one unit")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def integral(cls, agents, n: int) -> "AllocationPlan":
        """One-hot rows from a list of agent indices (None or -1 = unallocated)."""
        a = np.array([-1 if k is None else k for k in agents], dtype=int)
        x = np.zeros((a.size, n))
        hit = a >= 0
        x[np.nonzero(hit)[0], a[hit]] = 1.0
        return cls(x)


def utilities_of(seq: ItemSequence, plan) -> np.ndarray:
    """Time-averaged utilities (1/T) sum_t v_t * x_t."""
    x = plan.x if isinstance(plan, AllocationPlan) else np.asarray(plan, dtype=float)
    if x.shape != seq.values.shape:
        raise ValueError(f"plan shape {x.shape} does not match sequence shape {seq.values.shape}")
    return (seq.values * x).sum(axis=0) / seq.T


# -- CSV -------------------------------------------------------------------

def save_csv(seq: ItemSequence, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *seq.agent_names])
        for t, row in enumerate(seq.values):
            w.writerow([t, *(repr(float(x)) for x in row)])


def load_csv(path, vbar: float | None = None) -> ItemSequence:
    """Read an item sequence written as ``t,a0,a1,...``.

    When ``vbar`` is omitted the bound is taken as max(1, largest value).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError(f"{path}: no rows")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "t":
        raise ValueError(f"{path}: header must start with 't' followed by agent columns")
    n = len(header) - 1
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: no rows")
    vals = np.empty((len(body), n))
    for k, r in enumerate(body):
        if len(r) != n + 1:
            raise ValueError(f"{path}: row {k} has {len(r)} fields, expected {n + 1}")
        try:
            vals[k] = [float(x) for x in r[1:]]
        except ValueError as e:
            raise ValueError(f"{path}: row {k} is malformed ({e})") from None
        if not np.all(np.isfinite(vals[k])):
            raise ValueError(f"{path}: row {k} has a non-finite value")
    if vbar is None:
        vbar = max(1.0, float(vals.max()))
    bad = np.nonzero(((vals < 0) | (vals > vbar)).any(axis=1))[0]
    if bad.size:
        raise ValueError(f"{path}: row {bad[0]} has a value outside [0, {vbar!r}]")
    return ItemSequence(vals, vbar, tuple(header[1:]))


# -- general position ------------------------------------------------------

def check_general_position(seq: ItemSequence, tol: float = GP_TOL) -> bool:
    """True when no agent pair sees the same value ratio on two items.

    Ratios count as equal when they differ by at most ``tol`` relative to the
    larger one.  Items with a zero value for either agent are exempt.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = seq.values
    for i in range(seq.n):
        for j in range(i + 1, seq.n):
            both = (v[:, i] > 0) & (v[:, j] > 0)
            if both.sum() < 2:
                continue
            r = np.sort(v[both, i] / v[both, j])
            if np.any(np.diff(r) <= tol * r[1:]):
                return False
    return True


def perturb_general_position(seq: ItemSequence, scale: float | None = None, rng=None) -> ItemSequence:
    """Add independent uniform (0, scale] noise to every positive value.

    Entries that would exceed vbar are moved down by the same amount instead,
    so every value changes by at most ``scale`` and stays inside [0, vbar].
    """
    if scale is None:
        scale = 1e-9 * seq.vbar
    if not scale > 0:
        raise ValueError("perturbation scale must be positive")
    rng = np.random.default_rng() if rng is None else rng
    v = seq.values
    pos = v > 0
    for _ in range(PERTURB_RETRIES):
        noise = scale - rng.uniform(0.0, scale, size=v.shape)
        up = v + noise
        new = np.where(up <= seq.vbar, up, np.maximum(v - noise, 0.0))
        new = np.where(pos, new, 0.0)
        out = seq.with_values(new)
        if check_general_position(out, 0.0):
            return out
    raise RuntimeError("could not reach general position after repeated perturbation")
