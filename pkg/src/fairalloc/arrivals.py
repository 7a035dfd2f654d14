"""Arrival models for online and historical item sequences.

Random streams come from Philox (counter based) keyed by
(base_seed, replication, role), so each role of each replication has its
own independent stream regardless of execution order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import ItemSequence

ROLES = {"online": 0, "history": 1, "algorithm": 2, "pool": 3, "perturb": 4}


def make_rng(base_seed: int, replication: int = 0, role: str = "online") -> np.random.Generator:
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(replication), ROLES[role]))
    return np.random.Generator(np.random.Philox(ss))


def balanced_blocks(total: int, parts: int) -> np.ndarray:
    """Block index of each of ``total`` positions; contiguous, sizes differ by <= 1."""
    return (np.arange(total) * parts) // total


# -- models ----------------------------------------------------------------

@dataclass(frozen=True)
class IidEmpirical:
    pool: ItemSequence


@dataclass(frozen=True)
class PeriodicBoost:
    """Pool draws; during period q the values of agent group q are scaled."""

    pool: ItemSequence
    Q: int = 4
    factor: float = 2.0

    def __post_init__(self):
        if self.Q < 1:
            raise ValueError("Q must be at least 1")
        if self.Q > self.pool.n:
            raise ValueError(f"Q={self.Q} exceeds the number of agents n={self.pool.n} (empty agent group)")
        if self.factor < 0:
            raise ValueError("boost factor must be nonnegative")


@dataclass(frozen=True)
class TraceReplay:
    seq: ItemSequence


@dataclass(frozen=True)
class Synthetic:
    """Independent per-entry values: uniform(lo, hi) or vbar * Beta(a, b)."""

    n: int
    vbar: float = 1.0
    law: str = "uniform"
    lo: float = 0.0
    hi: float | None = None
    a: float = 2.0
    b: float = 2.0

    def __post_init__(self):
        if self.law not in ("uniform", "beta"):
            raise ValueError(f"unknown value law {self.law!r}")
        hi = self.vbar if self.hi is None else self.hi
        if not 0 <= self.lo <= hi <= self.vbar:
            raise ValueError("uniform law needs 0 <= lo <= hi <= vbar")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("beta law needs positive shape parameters")


def model_shape(model):
    """(n, vbar) of the sequences a model emits."""
    if isinstance(model, Synthetic):
        return model.n, model.vbar
    seq = model.seq if isinstance(model, TraceReplay) else model.pool
    return seq.n, seq.vbar


def sample_online(model, T: int, rng) -> ItemSequence:
    n, vbar = model_shape(model)
    if T < n:
        raise ValueError(f"horizon T={T} is shorter than the number of agents n={n}")
    if isinstance(model, TraceReplay):
        if model.seq.T != T:
            raise ValueError(f"trace has {model.seq.T} items but T={T} was requested")
        return model.seq
    if isinstance(model, Synthetic):
        if model.law == "uniform":
            hi = model.vbar if model.hi is None else model.hi
            V = rng.uniform(model.lo, hi, size=(T, n))
        else:
            V = model.vbar * rng.beta(model.a, model.b, size=(T, n))
        return ItemSequence(np.clip(V, 0.0, model.vbar), model.vbar)
    pool = model.pool
    if pool.T == 0:
        raise ValueError("empty pool")
    V = pool.values[rng.integers(0, pool.T, size=T)]
    if isinstance(model, PeriodicBoost):
        period = balanced_blocks(T, model.Q)
        group = balanced_blocks(n, model.Q)
        boost = period[:, None] == group[None, :]
        V = np.where(boost, np.minimum(V * model.factor, vbar), V)
    return ItemSequence(V, vbar, pool.agent_names)


# -- history ---------------------------------------------------------------

@dataclass(frozen=True)
class Matched:
    pass


@dataclass(frozen=True)
class IndependentRedraw:
    pass


@dataclass(frozen=True)
class GaussianNoise:
    """v_h = clamp(v_o + N(0, variance_scale * v_o), 0, vbar).

    By default the scale multiplies the variance; ``parameter="std"`` makes
    it multiply the standard deviation instead (noise sd = scale * v_o).
    """

    variance_scale: float = 0.5
    parameter: str = "variance"

    def __post_init__(self):
        if not self.variance_scale >= 0:
            raise ValueError("variance_scale must be nonnegative")
        if self.parameter not in ("variance", "std"):
            raise ValueError(f"noise parameter must be 'variance' or 'std', got {self.parameter!r}")

    def noise_sd(self, v):
        v = np.asarray(v, dtype=float)
        if self.parameter == "std":
            return self.variance_scale * v
        return np.sqrt(self.variance_scale * v)


@dataclass(frozen=True)
class ShiftReport:
    per_step_l1: np.ndarray
    delta_avg: float


def measure_l1_discrepancy(a: ItemSequence, b: ItemSequence) -> ShiftReport:
    A = a.values if isinstance(a, ItemSequence) else np.asarray(a, float)
    Bv = b.values if isinstance(b, ItemSequence) else np.asarray(b, float)
    if A.shape != Bv.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {Bv.shape}")
    d = np.abs(A - Bv).sum(axis=1)
    return ShiftReport(d, float(d.mean()) if d.size else 0.0)


def gaussian_history(online_seq: ItemSequence, variance_scale, z: np.ndarray) -> ItemSequence:
    """Noisy copy of ``online_seq`` driven by standard normals ``z``.

    ``variance_scale`` is a float (variance convention) or a GaussianNoise.
    """
    mode = variance_scale if isinstance(variance_scale, GaussianNoise) else GaussianNoise(variance_scale)
    V = online_seq.values
    H = V + mode.noise_sd(V) * z
    return online_seq.with_values(np.clip(H, 0.0, online_seq.vbar))


def sample_history(model, mode, online_seq: ItemSequence, rng):
    """Historical sequence and its realized l1 shift from ``online_seq``."""
    T = online_seq.T
    if isinstance(mode, GaussianNoise):
        z = rng.standard_normal(size=online_seq.values.shape)
        hist = gaussian_history(online_seq, mode, z)
    elif isinstance(mode, (Matched, IndependentRedraw)):
        hist = sample_online(model, T, rng)
    else:
        raise TypeError(f"unknown history mode {mode!r}")
    if hist.values.shape != online_seq.values.shape:
        raise ValueError("history and online sequences differ in shape")
    return hist, measure_l1_discrepancy(hist, online_seq)
