import numpy as np
import pytest

from fairalloc.instance import (AllocationPlan, ItemSequence, check_general_position, load_csv,
                                perturb_general_position, save_csv, utilities_of)


def test_sequence_validation_names_row():
    with pytest.raises(ValueError, match="row 1"):
        ItemSequence([[0.5, 0.5], [1.5, 0.0]], vbar=1.0)
    with pytest.raises(ValueError):
        ItemSequence([[0.5, -0.1]])
    with pytest.raises(ValueError):
        ItemSequence([[0.5, np.nan]])


def test_sequence_is_readonly():
    s = ItemSequence([[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        s.values[0, 0] = 0.3


def test_horizon_requirement():
    ItemSequence([[1, 0, 0]])  # storage allows short tails (hybrid programs)
    with pytest.raises(ValueError, match="horizon"):
        ItemSequence([[1, 0, 0]]).require_horizon()


def test_plan_validation():
    AllocationPlan([[0.5, 0.5 + 1e-13]])
    with pytest.raises(ValueError, match="row 0"):
        AllocationPlan([[0.6, 0.5]])
    with pytest.raises(ValueError):
        AllocationPlan([[-0.1, 0.5]])


def test_utilities_examples():
    seq = ItemSequence([[1, 0], [0, 1]])
    assert np.allclose(utilities_of(seq, AllocationPlan(np.eye(2))), [0.5, 0.5])
    assert np.allclose(utilities_of(seq, AllocationPlan(np.zeros((2, 2)))), [0, 0])
    one = ItemSequence([[2, 4]], vbar=4)
    assert np.allclose(utilities_of(one, AllocationPlan([[0.25, 0.75]])), [0.5, 3.0])


def test_utilities_shape_mismatch():
    with pytest.raises(ValueError):
        utilities_of(ItemSequence([[1, 0], [0, 1]]), AllocationPlan(np.eye(3)))


def test_integral_plan():
    x = AllocationPlan.integral([0, None, 1, -1], 2).x
    assert np.array_equal(x, [[1, 0], [0, 0], [0, 1], [0, 0]])


def test_csv_example(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("t,a0,a1\n0,1.0,0.0\n1,0.0,1.0\n")
    s = load_csv(f)
    assert s.T == 2 and s.n == 2
    assert np.array_equal(s.values, np.eye(2))
    assert s.agent_names == ("a0", "a1")


def test_csv_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(5)
    s = ItemSequence(rng.uniform(size=(40, 3)) * (1 - 1e-17), agent_names=("x", "y", "z"))
    f = tmp_path / "r.csv"
    save_csv(s, f)
    assert b"\r" not in f.read_bytes()
    back = load_csv(f, vbar=1.0)
    assert np.array_equal(back.values, s.values)
    assert back.agent_names == s.agent_names


def test_csv_errors(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="no rows"):
        load_csv(empty)
    big = tmp_path / "b.csv"
    big.write_text("t,a0,a1\n0,0.5,0.5\n1,1.5,0.0\n")
    with pytest.raises(ValueError, match="row 1"):
        load_csv(big, vbar=1.0)
    ragged = tmp_path / "r.csv"
    ragged.write_text("t,a0,a1\n0,0.5\n")
    with pytest.raises(ValueError, match="row 0"):
        load_csv(ragged)
    junk = tmp_path / "j.csv"
    junk.write_text("t,a0,a1\n0,0.5,abc\n")
    with pytest.raises(ValueError, match="row 0"):
        load_csv(junk)


def test_general_position_examples():
    assert not check_general_position(ItemSequence([[1, 2], [2, 4]], vbar=4))
    assert check_general_position(ItemSequence([[1, 2], [1, 3]], vbar=3))
    assert check_general_position(ItemSequence([[1, 0], [2, 0]], vbar=2))
    with pytest.raises(ValueError):
        check_general_position(ItemSequence([[1, 0]]), tol=-1)


def test_perturb_examples():
    rng = np.random.default_rng(0)
    deg = ItemSequence([[0.25, 0.5], [0.5, 1.0]])
    out = perturb_general_position(deg, rng=rng)
    assert check_general_position(out, 0.0)
    d = out.values - deg.values
    assert np.all(np.abs(d) <= 1e-9) and np.all(d != 0)
    assert np.all(out.values <= 1.0)
    zero = ItemSequence(np.zeros((3, 2)))
    assert np.array_equal(perturb_general_position(zero, rng=rng).values, zero.values)
    with pytest.raises(ValueError):
        perturb_general_position(deg, scale=0.0)


def test_perturb_keeps_zeros():
    rng = np.random.default_rng(1)
    s = ItemSequence([[0.3, 0.0, 0.3], [0.3, 0.3, 0.0]])
    out = perturb_general_position(s, scale=1e-6, rng=rng)
    assert np.array_equal(out.values == 0, s.values == 0)
