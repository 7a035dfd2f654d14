import math
import warnings

import numpy as np
import pytest

from fairalloc.instance import AllocationPlan, ItemSequence, utilities_of
from fairalloc.online import (AlgorithmKind, dual_resolve_step, greedy_step, primal_resolve_step, run_greedy,
                              run_online)
from fairalloc.solver import SolveOptions, solve_hindsight
from fairalloc.welfare import WelfareSpec, eval_welfare
from oracles import greedy_literal

HALF = WelfareSpec(0.0, [0.5, 0.5])


def test_greedy_step_examples():
    assert greedy_step(HALF, [1, 1], 2, [2, 1]) == 0
    assert eval_welfare(HALF, [3, 1]) == pytest.approx(math.sqrt(3))
    assert greedy_step(HALF, [0, 5], 2, [1, 1]) == 0
    assert greedy_step(HALF, [1, 1], 2, [0, 0]) is None


def test_safeguard_p0_flag():
    # two agents still at zero: every choice leaves f = 0, so the literal
    # argmax falls to the lowest index while the safeguard serves agent 1
    spec = WelfareSpec.symmetric(3, 0.0)
    assert greedy_step(spec, [3, 0, 0], 2, [1, 1, 1], safeguard_p0=False) == 0
    assert greedy_step(spec, [3, 0, 0], 2, [1, 1, 1], safeguard_p0=True) == 1
    # one agent at zero: the literal argmax already serves it
    assert greedy_step(HALF, [5, 0], 2, [1, 1], safeguard_p0=False) == 1


def test_negative_p_safeguard():
    spec = WelfareSpec(-1.0, [1, 1, 1])
    assert greedy_step(spec, [3, 0, 0], 2, [1, 0, 0.1]) == 2


def test_run_greedy_example():
    seq = ItemSequence([[1, 0], [0, 1], [2, 1]], vbar=2)
    tr = run_greedy(HALF, seq)
    assert tr.agents.tolist() == [0, 1, 0]
    assert np.allclose(tr.final_u, [1, 1 / 3])


@pytest.mark.parametrize("p", [-1.0, 0.0, 0.5])
def test_one_hot_items_go_to_owner(p):
    seq = ItemSequence(np.tile(np.eye(3) * 0.7, (2, 1)))
    tr = run_greedy(WelfareSpec.symmetric(3, p), seq)
    assert tr.agents.tolist() == [0, 1, 2, 0, 1, 2]


@pytest.mark.parametrize("p", [-2.0, -0.5, 0.0, 0.4, 0.9])
def test_greedy_matches_literal_oracle(p):
    rng = np.random.default_rng(int(100 * (p + 3)))
    for _ in range(5):
        # strictly positive values: the literal argmax is never an all-zero tie
        V = rng.uniform(0.01, 1, size=(40, 3))
        if p > 0:
            V = V * (rng.uniform(size=(40, 3)) > 0.2)
        B = rng.uniform(0.2, 1, 3)
        tr = run_greedy(WelfareSpec(p, B), ItemSequence(V))
        agents, u = greedy_literal(B, p, V)
        assert tr.agents.tolist() == agents
        assert np.allclose(tr.final_u, u)


@pytest.mark.parametrize("p", [-1.0, 0.0])
def test_all_zero_tie_prefers_reachable_agents(p):
    # agent 1 has nothing and cannot gain from this item, so f = 0 for every
    # choice; the scores still send the item where it raises the other terms
    spec = WelfareSpec(p, [1, 1, 1])
    W = [0.9, 0.0, 0.2]
    v = [0.9, 0.0, 0.6]
    assert greedy_step(spec, W, 3, v) == 2


def test_relabeling_symmetry():
    rng = np.random.default_rng(0)
    V = rng.uniform(size=(30, 3))
    B = np.array([1.0, 2.0, 3.0])
    perm = [2, 0, 1]
    a = run_greedy(WelfareSpec(0.3, B), ItemSequence(V)).welfare(WelfareSpec(0.3, B))
    b = run_greedy(WelfareSpec(0.3, B[perm]), ItemSequence(V[:, perm])).welfare(WelfareSpec(0.3, B[perm]))
    assert a == pytest.approx(b, rel=1e-12)


def test_trajectory_bookkeeping():
    rng = np.random.default_rng(1)
    seq = ItemSequence(rng.uniform(size=(25, 3)))
    spec = WelfareSpec.symmetric(3, 0.0)
    for kind in ("greedy", "round_robin", "utilitarian_greedy"):
        tr = run_online(kind, spec, seq)
        assert np.all(np.diff(tr.W_path, axis=0) >= 0)
        steps = np.diff(np.vstack([np.zeros(3), tr.W_path]), axis=0)
        assert np.allclose(steps, seq.values * tr.choices)
        plan = AllocationPlan(tr.choices)
        assert tr.welfare(spec) == pytest.approx(eval_welfare(spec, utilities_of(seq, plan)), rel=1e-12)


def test_dual_step_at_horizon():
    agent, beta = dual_resolve_step(HALF, [1, 1], [2, 1], np.zeros((0, 2)), 3)
    assert agent == 0 == greedy_step(HALF, [1, 1], 3, [2, 1])
    assert np.all(beta > 0)


def test_dual_step_single_positive_value():
    tail = np.full((3, 2), 0.5)
    agent, _ = dual_resolve_step(HALF, [1, 1], [0.4, 0.0], tail, 5)
    assert agent == 0


def test_primal_step_rows():
    # max (1 + 2x)(2 - x) over x in [0, 1] is at x = 3/4
    row, res = primal_resolve_step(HALF, [1, 1], [2, 1], np.zeros((0, 2)), 3)
    assert row == pytest.approx([0.75, 0.25], abs=1e-6)
    sc = res.beta_star * np.array([2, 1])
    assert np.all(sc[row > 1e-9] >= sc.max() * (1 - 1e-7))
    row, _ = primal_resolve_step(HALF, [1, 1], [0, 0], np.full((2, 2), 0.5), 4)
    assert np.allclose(row, 0.0)


def _split_items(res):
    x = res.plan.x
    return int(np.sum(np.any((x > 1e-7) & (x < 1 - 1e-7), axis=1)))


@pytest.mark.parametrize("p", [-1.0, 0.0, 0.5])
def test_perfect_foresight_primal_reaches_opt(p):
    rng = np.random.default_rng(5)
    seq = ItemSequence(rng.uniform(size=(30, 3)))
    spec = WelfareSpec.symmetric(3, p)
    tr = run_online(AlgorithmKind("primal_resolve", tol=1e-9), spec, seq, seq)
    opt = solve_hindsight(spec, seq, SolveOptions(tol=1e-10))
    assert _split_items(opt) > 0
    assert tr.welfare(spec) == pytest.approx(opt.welfare, rel=1e-6)


@pytest.mark.parametrize("p", [-1.0, 0.0, 0.5])
def test_perfect_foresight_dual_reaches_integral_opt(p):
    # single-winner choices can only match an optimum that splits no item
    rng = np.random.default_rng(5)
    own = rng.integers(0, 3, 30)
    V = 0.1 * rng.uniform(size=(30, 3))
    V[np.arange(30), own] = rng.uniform(0.5, 1, 30)
    seq = ItemSequence(V)
    spec = WelfareSpec.symmetric(3, p)
    opt = solve_hindsight(spec, seq, SolveOptions(tol=1e-10))
    assert _split_items(opt) == 0
    tr = run_online(AlgorithmKind("dual_resolve", tol=1e-9), spec, seq, seq)
    assert tr.welfare(spec) == pytest.approx(opt.welfare, rel=1e-6)


def test_perfect_foresight_dual_split_optimum():
    # the optimum splits n - 1 items; rounding them is the only loss
    rng = np.random.default_rng(5)
    seq = ItemSequence(rng.uniform(size=(30, 3)))
    spec = WelfareSpec.symmetric(3, 0.0)
    opt = solve_hindsight(spec, seq, SolveOptions(tol=1e-10))
    k = _split_items(opt)
    assert 0 < k <= 2
    tr = run_online(AlgorithmKind("dual_resolve", tol=1e-9), spec, seq, seq)
    gap = opt.welfare - tr.welfare(spec)
    assert 0 <= gap <= k * seq.vbar / seq.T


def test_resolve_no_waste_and_kkt():
    rng = np.random.default_rng(6)
    seq = ItemSequence(rng.uniform(size=(40, 3)) * (rng.uniform(size=(40, 3)) > 0.3))
    hist = ItemSequence(rng.uniform(size=(40, 3)))
    spec = WelfareSpec.symmetric(3, 0.0)
    for name in ("dual_resolve", "primal_resolve"):
        tr = run_online(name, spec, seq, hist)
        for t in range(40):
            mass = tr.choices[t].sum()
            if np.any(seq.values[t] > 0):
                assert mass >= 1 - 1e-9
            else:
                assert mass == 0
            if name == "dual_resolve" and tr.agents[t] >= 0:
                sc = tr.beta_path[t] * seq.values[t]
                assert sc[tr.agents[t]] >= sc.max() * (1 - 1e-7)
        assert np.all(tr.gaps <= 1e-6 * np.maximum(1, 10))


def test_warm_and_cold_agree():
    rng = np.random.default_rng(7)
    seq = ItemSequence(rng.uniform(size=(60, 3)))
    hist = ItemSequence(rng.uniform(size=(60, 3)))
    spec = WelfareSpec.symmetric(3, 0.0)
    a = run_online(AlgorithmKind("dual_resolve", tol=1e-9, warm_start=True), spec, seq, hist)
    b = run_online(AlgorithmKind("dual_resolve", tol=1e-9, warm_start=False), spec, seq, hist)
    assert np.mean(a.agents == b.agents) > 0.95
    assert a.welfare(spec) == pytest.approx(b.welfare(spec), rel=1e-3)


def test_baselines():
    seq = ItemSequence([[1, 0.9], [1, 0.9]])
    tr = run_online("utilitarian_greedy", HALF, seq)
    assert tr.agents.tolist() == [0, 0]
    assert np.allclose(tr.final_u, [1, 0]) and tr.welfare(HALF) == 0.0
    one_hot = ItemSequence(np.tile(np.eye(2), (3, 1)))
    assert (run_online("round_robin", HALF, one_hot).agents.tolist()
            == run_online("greedy", HALF, one_hot).agents.tolist())


def test_run_online_errors():
    seq = ItemSequence(np.ones((4, 2)))
    with pytest.raises(ValueError, match="history"):
        run_online("dual_resolve", HALF, seq)
    with pytest.raises(ValueError, match="shape"):
        run_online("dual_resolve", HALF, seq, ItemSequence(np.ones((3, 2))))
    with pytest.raises(ValueError):
        AlgorithmKind("magic")
    with pytest.raises(ValueError):
        run_online("greedy", WelfareSpec.symmetric(3, 0), seq)
    with pytest.raises(ValueError, match="horizon"):
        run_online("greedy", HALF, ItemSequence(np.ones((1, 2))))


def test_warm_start_with_newly_reachable_agent():
    # agent 2 values nothing until the last item; the warm set from the
    # previous step leaves it at zero, which must not leak into the gradient
    V = np.array([[0.55, 0.5, 0.5], [0.5, 0.05, 0.0], [0.5, 0.5, 0.55]])
    seq = ItemSequence(V)
    spec = WelfareSpec.symmetric(3, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tr = run_online("dual_resolve", spec, seq, seq)
    assert np.all(np.isfinite(tr.beta_path))
    assert tr.choices.sum() == 3
