import math

import numpy as np
import pytest

from fairalloc.welfare import (WelfareSpec, conjugate, dual_objective, eval_log_welfare, eval_welfare,
                               grad_log_welfare, smoothness_constants)
from oracles import box_grid_kappa, ces, fd_grad, numeric_conjugate

HALF = WelfareSpec(0.0, [0.5, 0.5])


def test_weights_normalized_and_readonly():
    s = WelfareSpec(0.3, [1, 3])
    assert np.allclose(s.B, [0.25, 0.75])
    with pytest.raises(ValueError):
        s.B[0] = 1.0


@pytest.mark.parametrize("p,B", [(1.0, [1, 1]), (1.5, [1, 1]), (0.0, [1, -1]), (0.0, [0, 1]), (float("nan"), [1, 1])])
def test_bad_spec_rejected(p, B):
    with pytest.raises(ValueError):
        WelfareSpec(p, B)


def test_eval_welfare_examples():
    assert eval_welfare(HALF, [4, 1]) == pytest.approx(2.0, rel=1e-14)
    assert eval_welfare(WelfareSpec(-1.0, [0.5, 0.5]), [1, 1]) == pytest.approx(1.0, rel=1e-14)
    assert eval_welfare(WelfareSpec(0.5, [0.5, 0.5]), [4, 0]) == pytest.approx(1.0, rel=1e-14)


def test_eval_welfare_zero_entries():
    assert eval_welfare(HALF, [0, 3]) == 0.0
    assert eval_welfare(WelfareSpec(-2.0, [1, 1]), [0, 3]) == 0.0
    assert eval_log_welfare(HALF, [0, 1]) == -math.inf


def test_eval_welfare_errors():
    with pytest.raises(ValueError):
        eval_welfare(HALF, [1, 2, 3])
    with pytest.raises(ValueError):
        eval_welfare(HALF, [-1, 2])


def test_log_welfare_examples():
    for p in (-3.0, -1.0, 0.0, 0.4, 0.9):
        assert eval_log_welfare(WelfareSpec(p, [1, 2, 3]), np.ones(3)) == pytest.approx(0.0, abs=1e-15)
    assert eval_log_welfare(HALF, [4, 1]) == pytest.approx(math.log(2), rel=1e-14)


def test_tiny_p_band_is_nash():
    u = [0.3, 2.0, 1.1]
    a = eval_welfare(WelfareSpec(1e-10, [1, 2, 3]), u)
    b = eval_welfare(WelfareSpec(0.0, [1, 2, 3]), u)
    assert a == b


@pytest.mark.parametrize("p", [-2.0, -0.5, 0.3, 0.7])
def test_welfare_matches_textbook_formula(p):
    rng = np.random.default_rng(1)
    for _ in range(50):
        B = rng.uniform(0.1, 1, 3)
        u = rng.uniform(0.01, 5, 3)
        assert eval_welfare(WelfareSpec(p, B), u) == pytest.approx(ces(B, p, u), rel=1e-12)


def test_grad_examples():
    assert np.allclose(grad_log_welfare(HALF, [2, 1]), [0.25, 0.5], rtol=1e-14)
    s = WelfareSpec(0.6, [1, 2, 5])
    assert np.allclose(grad_log_welfare(s, np.ones(3)), s.B, rtol=1e-14)
    # p=-1, u=(1,2): B_i u_i^-2 / sum_j B_j u_j^-1 with denominator 0.5 + 0.25 = 0.75
    g = grad_log_welfare(WelfareSpec(-1.0, [0.5, 0.5]), [1, 2])
    assert np.allclose(g, [2 / 3, 1 / 6], rtol=1e-12)
    fd = fd_grad(lambda u: eval_log_welfare(WelfareSpec(-1.0, [0.5, 0.5]), u), [1.0, 2.0])
    assert np.allclose(g, fd, rtol=1e-6)
    assert g @ [1.0, 2.0] == pytest.approx(1.0, abs=1e-14)


def test_grad_requires_positive():
    with pytest.raises(ValueError):
        grad_log_welfare(HALF, [0, 1])


def test_conjugate_examples():
    assert conjugate(HALF, [0.5, 0.5]) == pytest.approx(-1.0, abs=1e-14)
    assert conjugate(WelfareSpec(0.5, [1]), [1.0]) == pytest.approx(-1.0, abs=1e-14)
    assert conjugate(WelfareSpec(-1.0, [0.5, 0.5]), [1, 1]) == pytest.approx(-1 - math.log(2), abs=1e-14)


@pytest.mark.parametrize("p", [-1.0, 0.0, 0.5])
def test_conjugate_examples_numeric(p):
    B = [0.5, 0.5]
    beta = {0.0: [0.5, 0.5], -1.0: [1.0, 1.0], 0.5: [0.7, 1.3]}[p]
    assert conjugate(WelfareSpec(p, B), beta) == pytest.approx(numeric_conjugate(B, p, beta), abs=1e-8)


@pytest.mark.parametrize("p", [-2.0, -0.3, 0.0, 0.2, 0.8])
def test_conjugate_matches_numeric_maximization(p):
    rng = np.random.default_rng(7)
    for _ in range(8):
        B = rng.uniform(0.2, 1, 3)
        beta = rng.uniform(0.3, 3, 3)
        assert conjugate(WelfareSpec(p, B), beta) == pytest.approx(numeric_conjugate(B, p, beta), abs=1e-7)


def test_conjugate_errors():
    with pytest.raises(ValueError):
        conjugate(HALF, [0.0, 1.0])
    with pytest.raises(ValueError):
        conjugate(HALF, [-1.0, 1.0])


def test_dual_objective_examples():
    assert dual_objective(HALF, [0.5, 0.5], [0, 0], np.zeros((0, 2)), 1) == pytest.approx(-1.0, abs=1e-14)
    # W=(T,T), beta=(1,1): linear part 2, conjugate sum 0.5*log(0.5/1) - 1 = log(1/2) - 1
    T = 7
    got = dual_objective(HALF, [1, 1], [T, T], np.zeros((0, 2)), T)
    assert got == pytest.approx(2 + math.log(0.5) - 1, abs=1e-14)
    assert got == pytest.approx(2 + numeric_conjugate([0.5, 0.5], 0.0, [1, 1]), abs=1e-8)
    want = 2 + (0.5 * math.log(0.25) + 0.5 * math.log(0.5)) - 1
    assert dual_objective(HALF, [2, 1], [0, 0], [[1, 0]], 1) == pytest.approx(want, abs=1e-14)


def test_dual_objective_rejects_short_divisor():
    with pytest.raises(ValueError):
        dual_objective(HALF, [1, 1], [0, 0], np.ones((3, 2)), 2)


def test_smoothness_kappa_examples():
    sym0 = WelfareSpec.symmetric(2, 0.0)
    assert smoothness_constants(sym0, 0.5, 0.5).kappa == pytest.approx(1.0)
    assert smoothness_constants(sym0, 1, 2).kappa == pytest.approx(2.0)
    assert smoothness_constants(WelfareSpec.symmetric(2, -1.0), 1, 2).kappa == pytest.approx(4.0)
    assert box_grid_kappa([0.5, 0.5], 0.0, 1, 2) == pytest.approx(2.0)
    assert box_grid_kappa([0.5, 0.5], -1.0, 1, 2) == pytest.approx(4.0)


@pytest.mark.parametrize("p,B", [(0.0, [1, 2, 4]), (-1.0, [1, 1, 3]), (0.5, [2, 1, 1])])
def test_smoothness_kappa_matches_grid_oracle(p, B):
    box = smoothness_constants(WelfareSpec(p, B), 0.2, 1.5)
    assert box.kappa == pytest.approx(box_grid_kappa(B, p, 0.2, 1.5), rel=1e-12)


@pytest.mark.parametrize("p,B", [(0.0, [1, 1, 1]), (-1.0, [1, 2, 3]), (0.5, [1, 1, 2]), (-0.5, [1, 1, 1])])
def test_smoothness_bounds_dominate_sampled_points(p, B):
    spec = WelfareSpec(p, B)
    lo, hi = 0.1, 1.0
    box = smoothness_constants(spec, lo, hi)
    assert box.kappa >= 1 and box.lam >= 0 and box.lip1 >= 0
    rng = np.random.default_rng(3)
    f = lambda u: eval_log_welfare(spec, u)  # noqa: E731
    signs = np.array([[1, s1, s2] for s1 in (1, -1) for s2 in (1, -1)], float)
    for _ in range(30):
        u = rng.uniform(lo, hi, 3)
        assert np.abs(grad_log_welfare(spec, u)).max() <= box.lip1
        # smoothness in l-inf: max over cube vertices of -d^T H d, from finite differences
        h = 1e-4
        curv = []
        for d in signs:
            curv.append(-(f(u + h * d) - 2 * f(u) + f(u - h * d)) / h**2)
        assert max(curv) <= box.lam * (1 + 1e-4)


def test_symmetric_two_level_grid_matches_full_grid():
    import fairalloc.welfare as wf

    spec = WelfareSpec.symmetric(3, -0.7)
    sym = smoothness_constants(spec, 0.3, 2.0)
    asym = smoothness_constants(WelfareSpec(-0.7, [1, 1, 1 + 1e-13]), 0.3, 2.0)
    assert sym.lam == pytest.approx(asym.lam, rel=1e-9)
    assert sym.lip1 == pytest.approx(asym.lip1, rel=1e-9)
    assert wf.GRID_POINTS == 17


def test_smoothness_errors():
    with pytest.raises(ValueError):
        smoothness_constants(HALF, 0.0, 1.0)
    with pytest.raises(ValueError):
        smoothness_constants(HALF, 2.0, 1.0)
