"""JSON experiment configuration: defaults, validation, and model construction.

Validation errors name the offending key as a JSON path, e.g. ``$.arrivals.Q``.
Relative file paths are resolved against the directory of the config file and
stored absolute in the effective config, so re-running from the echoed copy
reproduces the original run.
"""
from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from .arrivals import (GaussianNoise, IidEmpirical, IndependentRedraw, Matched, PeriodicBoost,
                       Synthetic, TraceReplay)
from .instance import load_csv
from .online import KINDS, AlgorithmKind
from .welfare import WelfareSpec

SCHEMA_VERSION = 1

MODELS = ("synthetic", "iid_empirical", "periodic_boost", "trace_replay")
HISTORY_MODES = ("matched", "independent_redraw", "gaussian_noise", "perfect_foresight", "none")
CHECKS = ("stability", "safe_volume", "greedy_per_step", "greedy_one_step", "greedy_rule",
          "boundedness", "regret_conversion", "coupling", "r3_sensitivity")

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "welfare": {"p": 0.0, "weights": "symmetric"},
    "n": 4,
    "T": 1000,
    "vbar": 1.0,
    "replications": 1,
    "base_seed": 0,
    "arrivals": {"model": "synthetic"},
    "history": {"mode": "matched"},
    "algorithms": ["greedy"],
    "checkpoints": {"policy": "geometric"},
    "solver": {"tol": 1e-6, "max_iters": 20000, "warm_start": True, "opt_tol": 1e-8},
    "outputs": {"dir": "out", "traces": False},
    "verify": {},
}

LAW_DEFAULTS = {"law": "uniform", "lo": 0.0, "hi": None, "a": 2.0, "b": 2.0}

VERIFY_DEFAULTS = {
    "checks": list(CHECKS),
    "p_values": [-1.0, 0.0, 0.5],
    "stability": {"instances": 20, "trials": 50, "T": 30, "n": 3, "K_max": 3},
    "safe_volume": {"samples": 1_000_000, "cases": [
        {"beta": [1.0, 1.0], "iota": 0.05, "vbar": 1.0},
        {"beta": [0.5, 1.0, 2.0], "iota": 0.02, "vbar": 1.0},
        {"beta": [1.0, 1.0, 1.0, 1.0], "iota": 0.01, "vbar": 1.0},
    ]},
    "greedy": {"seeds": 20, "T": 1000, "n": 4, "lo": "auto", "burn_in": 200, "monitor_lo": 0.05,
               "corrupt_step": None},
    "coupling": {"seeds": 10, "T": 200, "n": 2, "tol": 1e-10, "algorithm_tol": 1e-8},
    "r3_sensitivity": {"pairs": 50, "T": 200, "n": 3, "variance_scale": 0.01},
}


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# -- small typed getters ---------------------------------------------------

def _at(path, key):
    return f"{path}[{key}]" if isinstance(key, int) else f"{path}.{key}"


def _num(d, key, path, lo=None, hi=None, integer=False, lo_open=False, allow_none=False):
    v = d[key]
    p = _at(path, key)
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(p, f"expected a number, got {v!r}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(p, f"expected an integer, got {v!r}")
        v = int(v)
    elif not math.isfinite(v):
        raise ConfigError(p, "must be finite")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(p, f"must be {'>' if lo_open else '>='} {lo}, got {v!r}")
    if hi is not None and v > hi:
        raise ConfigError(p, f"must be <= {hi}, got {v!r}")
    return v


def _choice(d, key, path, options):
    v = d[key]
    if v not in options:
        raise ConfigError(_at(path, key), f"expected one of {', '.join(options)}, got {v!r}")
    return v


def _bool(d, key, path):
    v = d[key]
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}", f"expected true or false, got {v!r}")
    return v


def _obj(v, path):
    if not isinstance(v, dict):
        raise ConfigError(path, f"expected an object, got {type(v).__name__}")
    return v


def _merge(user, defaults, path):
    """Fill defaults one level deep; unknown keys are errors."""
    user = _obj(user, path)
    out = copy.deepcopy(defaults)
    for k, v in user.items():
        if k not in defaults:
            raise ConfigError(f"{path}.{k}", "unknown key")
        out[k] = v
    return out


def _path(v, path, base: Path):
    if not isinstance(v, str) or not v:
        raise ConfigError(path, "expected a file path")
    p = Path(v)
    if not p.is_absolute():
        p = base / p
    if not p.is_file():
        raise ConfigError(path, f"file not found: {p}")
    return str(p.resolve())


# -- normalization ---------------------------------------------------------

def normalize(raw: dict, base_dir=".") -> dict:
    """Validate ``raw`` and return the effective config with every default filled."""
    base = Path(base_dir)
    cfg = _merge(raw, DEFAULTS, "$")
    ver = cfg["schema_version"]
    if ver != SCHEMA_VERSION:
        raise ConfigError("$.schema_version", f"unsupported schema version {ver!r} (expected {SCHEMA_VERSION})")

    w = _merge(cfg["welfare"], DEFAULTS["welfare"], "$.welfare")
    p = _num(w, "p", "$.welfare")
    if not p < 1:
        raise ConfigError("$.welfare.p", f"must be < 1, got {p!r}")
    cfg["welfare"] = w

    a = _obj(cfg["arrivals"], "$.arrivals")
    model = _choice(dict(a, model=a.get("model", "synthetic")), "model", "$.arrivals", MODELS)
    keys = {"model": model}
    if model in ("synthetic", "iid_empirical", "periodic_boost"):
        keys.update(LAW_DEFAULTS)
        keys["pool_size"] = 1000
    if model in ("iid_empirical", "periodic_boost"):
        keys["pool"] = None
    if model == "periodic_boost":
        keys.update({"Q": 4, "factor": 2.0})
    if model == "trace_replay":
        keys["trace"] = None
    a = _merge(a, keys, "$.arrivals")
    cfg["arrivals"] = a

    # n, T and vbar may come from a CSV
    csv_key = "pool" if a.get("pool") is not None else ("trace" if model == "trace_replay" else None)
    seq = None
    if csv_key:
        a[csv_key] = _path(a[csv_key], f"$.arrivals.{csv_key}", base)
        try:
            seq = load_csv(a[csv_key])
        except ValueError as e:
            raise ConfigError(f"$.arrivals.{csv_key}", str(e)) from None
        if "n" not in raw:
            cfg["n"] = seq.n
        if "vbar" not in raw:
            cfg["vbar"] = seq.vbar
        if model == "trace_replay" and "T" not in raw:
            cfg["T"] = seq.T
    elif model == "trace_replay":
        raise ConfigError("$.arrivals.trace", "trace_replay needs a trace CSV")

    n = _num(cfg, "n", "$", lo=1, integer=True)
    T = _num(cfg, "T", "$", lo=1, integer=True)
    vbar = _num(cfg, "vbar", "$", lo=0, lo_open=True)
    cfg["n"], cfg["T"], cfg["vbar"] = n, T, float(vbar)
    if T < n:
        raise ConfigError("$.T", f"horizon T={T} is shorter than the number of agents n={n}")
    cfg["replications"] = _num(cfg, "replications", "$", lo=1, integer=True)
    cfg["base_seed"] = _num(cfg, "base_seed", "$", lo=0, integer=True)

    if seq is not None:
        if seq.n != n:
            raise ConfigError(f"$.arrivals.{csv_key}", f"CSV has {seq.n} agents but n={n}")
        if seq.values.max() > vbar:
            raise ConfigError("$.vbar", f"CSV values exceed vbar={vbar!r}")
        if model == "trace_replay" and seq.T != T:
            raise ConfigError("$.T", f"trace has {seq.T} items but T={T}")

    weights = w["weights"]
    if weights != "symmetric":
        if not isinstance(weights, list) or len(weights) != n:
            raise ConfigError("$.welfare.weights", f"expected \"symmetric\" or a list of {n} positive numbers")
        for k in range(n):
            _num(weights, k, "$.welfare.weights", lo=0, lo_open=True)

    if "law" in a:
        _choice(a, "law", "$.arrivals", ("uniform", "beta"))
        lo = _num(a, "lo", "$.arrivals", lo=0)
        hi = _num(a, "hi", "$.arrivals", lo=0, allow_none=True)
        if not lo <= (vbar if hi is None else hi) <= vbar:
            raise ConfigError("$.arrivals.hi", "uniform law needs 0 <= lo <= hi <= vbar")
        _num(a, "a", "$.arrivals", lo=0, lo_open=True)
        _num(a, "b", "$.arrivals", lo=0, lo_open=True)
    if "pool_size" in a:
        a["pool_size"] = _num(a, "pool_size", "$.arrivals", lo=1, integer=True)
    if model == "periodic_boost":
        Q = _num(a, "Q", "$.arrivals", lo=1, integer=True)
        if Q > n:
            raise ConfigError("$.arrivals.Q", f"Q={Q} exceeds the number of agents n={n} (empty agent group)")
        a["Q"] = Q
        _num(a, "factor", "$.arrivals", lo=0)

    h = _obj(cfg["history"], "$.history")
    mode = _choice(dict(h, mode=h.get("mode", "matched")), "mode", "$.history", HISTORY_MODES)
    hkeys = {"mode": mode}
    if mode == "gaussian_noise":
        hkeys.update({"variance_scale": 0.5, "parameter": "variance"})
    h = _merge(h, hkeys, "$.history")
    if mode == "gaussian_noise":
        _num(h, "variance_scale", "$.history", lo=0)
        _choice(h, "parameter", "$.history", ("variance", "std"))
    cfg["history"] = h

    s = _merge(cfg["solver"], DEFAULTS["solver"], "$.solver")
    _num(s, "tol", "$.solver", lo=0, lo_open=True)
    _num(s, "opt_tol", "$.solver", lo=0, lo_open=True)
    s["max_iters"] = _num(s, "max_iters", "$.solver", lo=1, integer=True)
    _bool(s, "warm_start", "$.solver")
    cfg["solver"] = s

    algs = cfg["algorithms"]
    if not isinstance(algs, list):
        raise ConfigError("$.algorithms", "expected a list")
    out = []
    for k, entry in enumerate(algs):
        ap = f"$.algorithms[{k}]"
        if isinstance(entry, str):
            entry = {"name": entry}
        entry = _merge(entry, {"name": None, "tol": s["tol"], "max_iters": s["max_iters"],
                               "warm_start": s["warm_start"], "safeguard_p0": True}, ap)
        _choice(entry, "name", ap, KINDS)
        _num(entry, "tol", ap, lo=0, lo_open=True)
        entry["max_iters"] = _num(entry, "max_iters", ap, lo=1, integer=True)
        _bool(entry, "warm_start", ap)
        _bool(entry, "safeguard_p0", ap)
        if entry["name"] in ("dual_resolve", "primal_resolve") and mode == "none":
            raise ConfigError("$.history.mode", f"{entry['name']} needs a history sequence")
        out.append(entry)
    cfg["algorithms"] = out

    c = _obj(cfg["checkpoints"], "$.checkpoints")
    c = _merge(c, {"policy": "geometric", "points": None}, "$.checkpoints")
    _choice(c, "policy", "$.checkpoints", ("geometric", "final", "list"))
    if c["policy"] == "list":
        pts = c["points"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError("$.checkpoints.points", "expected a nonempty list")
        for k in range(len(pts)):
            pts[k] = _num(pts, k, "$.checkpoints.points", lo=n, hi=T, integer=True)
        if any(b <= a_ for a_, b in zip(pts, pts[1:])):
            raise ConfigError("$.checkpoints.points", "must be strictly increasing")
    cfg["checkpoints"] = c

    o = _merge(cfg["outputs"], DEFAULTS["outputs"], "$.outputs")
    if not isinstance(o["dir"], str) or not o["dir"]:
        raise ConfigError("$.outputs.dir", "expected a directory path")
    _bool(o, "traces", "$.outputs")
    cfg["outputs"] = o

    cfg["verify"] = _normalize_verify(cfg["verify"])
    return cfg


def _normalize_verify(v) -> dict:
    v = _merge(v, VERIFY_DEFAULTS, "$.verify")
    checks = v["checks"]
    if not isinstance(checks, list):
        raise ConfigError("$.verify.checks", "expected a list")
    for k in range(len(checks)):
        _choice(checks, k, "$.verify.checks", CHECKS)
    ps = v["p_values"]
    if not isinstance(ps, list) or not ps:
        raise ConfigError("$.verify.p_values", "expected a nonempty list")
    for k in range(len(ps)):
        if not _num(ps, k, "$.verify.p_values") < 1:
            raise ConfigError(f"$.verify.p_values[{k}]", "must be < 1")
    for sec in ("stability", "greedy", "coupling", "r3_sensitivity"):
        v[sec] = _merge(v[sec], VERIFY_DEFAULTS[sec], f"$.verify.{sec}")
    st = v["stability"]
    for key in ("instances", "trials", "T", "n", "K_max"):
        st[key] = _num(st, key, "$.verify.stability", lo=1, integer=True)
    sv = v["safe_volume"] = _merge(v["safe_volume"], VERIFY_DEFAULTS["safe_volume"], "$.verify.safe_volume")
    sv["samples"] = _num(sv, "samples", "$.verify.safe_volume", lo=1, integer=True)
    if not isinstance(sv["cases"], list):
        raise ConfigError("$.verify.safe_volume.cases", "expected a list")
    for k, case in enumerate(sv["cases"]):
        cp = f"$.verify.safe_volume.cases[{k}]"
        case = sv["cases"][k] = _merge(case, {"beta": None, "iota": None, "vbar": 1.0}, cp)
        if not isinstance(case["beta"], list) or not case["beta"]:
            raise ConfigError(f"{cp}.beta", "expected a nonempty list")
        for j in range(len(case["beta"])):
            _num(case["beta"], j, f"{cp}.beta", lo=0, lo_open=True)
        _num(case, "iota", cp, lo=0, lo_open=True)
        _num(case, "vbar", cp, lo=0, lo_open=True)
    g = v["greedy"]
    for key in ("seeds", "T", "n", "burn_in"):
        g[key] = _num(g, key, "$.verify.greedy", lo=1, integer=True)
    if g["lo"] != "auto":
        _num(g, "lo", "$.verify.greedy", lo=0, lo_open=True)
    _num(g, "monitor_lo", "$.verify.greedy", lo=0)
    if g["corrupt_step"] is not None:
        g["corrupt_step"] = _num(g, "corrupt_step", "$.verify.greedy", lo=0, hi=g["T"] - 1, integer=True)
    c = v["coupling"]
    for key in ("seeds", "T", "n"):
        c[key] = _num(c, key, "$.verify.coupling", lo=1, integer=True)
    _num(c, "tol", "$.verify.coupling", lo=0, lo_open=True)
    _num(c, "algorithm_tol", "$.verify.coupling", lo=0, lo_open=True)
    r = v["r3_sensitivity"]
    for key in ("pairs", "T", "n"):
        r[key] = _num(r, key, "$.verify.r3_sensitivity", lo=1, integer=True)
    _num(r, "variance_scale", "$.verify.r3_sensitivity", lo=0)
    return v


def load_config(path) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError("$", f"invalid JSON in {path}: {e}") from None
    return normalize(raw, path.parent)


def dump_config(cfg: dict, path):
    Path(path).write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- object construction ---------------------------------------------------

def welfare_spec(cfg) -> WelfareSpec:
    w = cfg["welfare"]
    if w["weights"] == "symmetric":
        return WelfareSpec.symmetric(cfg["n"], w["p"])
    return WelfareSpec(w["p"], w["weights"])


def _law(a, n, vbar) -> Synthetic:
    return Synthetic(n, vbar, a["law"], a["lo"], a["hi"], a["a"], a["b"])


def pool_source(cfg):
    """The CSV pool, or the Synthetic law that generates one."""
    a = cfg["arrivals"]
    if a.get("pool"):
        return load_csv(a["pool"], cfg["vbar"])
    return _law(a, cfg["n"], cfg["vbar"])


def arrival_model(cfg, pool=None):
    """ArrivalModel for the config; ``pool`` must be given for pool-based models without a CSV."""
    a = cfg["arrivals"]
    m = a["model"]
    if m == "synthetic":
        return _law(a, cfg["n"], cfg["vbar"])
    if m == "trace_replay":
        return TraceReplay(load_csv(a["trace"], cfg["vbar"]))
    if pool is None:
        raise ValueError("pool-based model needs a pool")
    if m == "iid_empirical":
        return IidEmpirical(pool)
    return PeriodicBoost(pool, a["Q"], a["factor"])


def history_mode(cfg):
    h = cfg["history"]
    return {
        "matched": Matched(),
        "independent_redraw": IndependentRedraw(),
        "gaussian_noise": GaussianNoise(h.get("variance_scale", 0.5), h.get("parameter", "variance")),
        "perfect_foresight": GaussianNoise(0.0),
        "none": None,
    }[h["mode"]]


def algorithm_kinds(cfg) -> list:
    return [AlgorithmKind(e["name"], e["tol"], e["max_iters"], e["warm_start"], e["safeguard_p0"])
            for e in cfg["algorithms"]]
