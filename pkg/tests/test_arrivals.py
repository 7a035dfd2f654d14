import math

import numpy as np
import pytest

from fairalloc.arrivals import (GaussianNoise, IidEmpirical, IndependentRedraw, Matched, PeriodicBoost, Synthetic,
                                TraceReplay, balanced_blocks, make_rng, measure_l1_discrepancy, sample_history,
                                sample_online)
from fairalloc.instance import ItemSequence


def test_streams_are_reproducible_and_role_separated():
    a = make_rng(7, 3, "online").uniform(size=5)
    b = make_rng(7, 3, "online").uniform(size=5)
    c = make_rng(7, 3, "history").uniform(size=5)
    d = make_rng(7, 4, "online").uniform(size=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


def test_balanced_blocks():
    b = balanced_blocks(10, 4)
    sizes = np.bincount(b)
    assert sizes.max() - sizes.min() <= 1 and np.all(np.diff(b) >= 0) and b[0] == 0 and b[-1] == 3


def test_singleton_pool():
    pool = ItemSequence([[0.2, 0.7]])
    s = sample_online(IidEmpirical(pool), 6, make_rng(0))
    assert np.all(s.values == [0.2, 0.7])


def test_periodic_boost_example():
    pool = ItemSequence(np.full((1, 4), 0.4))
    s = sample_online(PeriodicBoost(pool, Q=4, factor=2.0), 8, make_rng(0))
    for t in range(8):
        g = t // 2
        want = np.full(4, 0.4)
        want[g] = 0.8
        assert np.array_equal(s.values[t], want)


def test_periodic_boost_clamps_and_validates():
    pool = ItemSequence(np.full((1, 2), 0.9))
    s = sample_online(PeriodicBoost(pool, Q=2), 4, make_rng(0))
    assert s.values.max() == 1.0
    with pytest.raises(ValueError, match="Q=3"):
        PeriodicBoost(pool, Q=3)


def test_trace_replay():
    tr = ItemSequence([[1, 0], [0, 1], [0.5, 0.5]])
    assert sample_online(TraceReplay(tr), 3, make_rng(0)) is tr
    with pytest.raises(ValueError):
        sample_online(TraceReplay(tr), 4, make_rng(0))


def test_short_horizon_rejected():
    with pytest.raises(ValueError):
        sample_online(Synthetic(4), 3, make_rng(0))


def test_synthetic_laws_in_range():
    s = sample_online(Synthetic(3, vbar=2.0, law="beta", a=0.5, b=0.5), 500, make_rng(1))
    assert s.values.min() >= 0 and s.values.max() <= 2.0
    u = sample_online(Synthetic(3, lo=0.2, hi=0.5), 500, make_rng(1))
    assert u.values.min() >= 0.2 and u.values.max() <= 0.5
    with pytest.raises(ValueError):
        Synthetic(3, law="cauchy")


def test_gaussian_zero_variance_is_identity():
    on = sample_online(Synthetic(3), 50, make_rng(2))
    h, rep = sample_history(Synthetic(3), GaussianNoise(0.0), on, make_rng(3))
    assert np.array_equal(h.values, on.values) and rep.delta_avg == 0


def test_matched_singleton_pool_has_no_shift():
    pool = IidEmpirical(ItemSequence([[0.3, 0.6]]))
    on = sample_online(pool, 5, make_rng(0))
    h, rep = sample_history(pool, Matched(), on, make_rng(1))
    assert rep.delta_avg == 0 and np.array_equal(h.values, on.values)


def test_redraw_is_fresh():
    m = Synthetic(2)
    on = sample_online(m, 30, make_rng(0, 0, "online"))
    h, rep = sample_history(m, IndependentRedraw(), on, make_rng(0, 0, "history"))
    assert rep.delta_avg > 0


def test_gaussian_half_normal_mean():
    c, s2 = 0.5, 0.02
    on = ItemSequence(np.full((25_000, 4), c))
    h, rep = sample_history(Synthetic(4), GaussianNoise(s2), on, make_rng(9))
    emp = np.abs(h.values - on.values).mean()
    assert emp == pytest.approx(math.sqrt(2 * c * s2 / math.pi), rel=0.05)


def test_gaussian_std_parameter():
    c = 0.5
    on = ItemSequence(np.full((25_000, 2), c))
    h, _ = sample_history(Synthetic(2), GaussianNoise(0.1, "std"), on, make_rng(4))
    emp = np.abs(h.values - on.values).mean()
    assert emp == pytest.approx(0.1 * c * math.sqrt(2 / math.pi), rel=0.05)
    with pytest.raises(ValueError):
        GaussianNoise(-1.0)
    with pytest.raises(ValueError):
        GaussianNoise(0.5, "sigma")


def test_l1_examples():
    a = ItemSequence(np.random.default_rng(0).uniform(0, 0.5, (7, 3)))
    assert np.all(measure_l1_discrepancy(a, a).per_step_l1 == 0)
    r = measure_l1_discrepancy(ItemSequence([[1, 0]]), ItemSequence([[0, 1]]))
    assert r.per_step_l1.tolist() == [2.0] and r.delta_avg == 2.0
    eps = 0.01
    r = measure_l1_discrepancy(a, a.with_values(a.values + eps))
    assert r.delta_avg == pytest.approx(3 * eps, rel=1e-12)
    with pytest.raises(ValueError):
        measure_l1_discrepancy(a, ItemSequence(np.zeros((7, 2))))


def test_iid_marginal_frequencies():
    pool = ItemSequence([[0.1, 0.0], [0.2, 0.0], [0.3, 0.0]])
    s = sample_online(IidEmpirical(pool), 100_000, make_rng(11))
    freq = np.array([(s.values[:, 0] == v).mean() for v in (0.1, 0.2, 0.3)])
    sigma = math.sqrt((1 / 3) * (2 / 3) / 100_000)
    assert np.all(np.abs(freq - 1 / 3) <= 3 * sigma)


def test_values_stay_in_range_under_noise():
    on = sample_online(Synthetic(3), 400, make_rng(0))
    h, _ = sample_history(Synthetic(3), GaussianNoise(2.0), on, make_rng(1))
    assert h.values.min() >= 0 and h.values.max() <= 1
