import numpy as np
import pytest

from bpcert.simplex import SimplexError, feasible_point


def test_trivial_feasible():
    feasible, x, infeas = feasible_point(np.array([[1.0]]), np.array([2.0]))
    assert feasible and infeas <= 1e-9
    assert x[0] >= -1e-12


def test_lower_bound_row():
    # x >= 0.5 and x <= 1
    a = np.array([[-1.0], [1.0]])
    b = np.array([-0.5, 1.0])
    feasible, x, _ = feasible_point(a, b)
    assert feasible
    assert 0.5 - 1e-9 <= x[0] <= 1.0 + 1e-9


def test_infeasible_interval():
    a = np.array([[1.0], [-1.0]])
    b = np.array([1.0, -2.0])  # x <= 1 and x >= 2
    feasible, x, infeas = feasible_point(a, b)
    assert not feasible
    assert x is None
    assert infeas == pytest.approx(1.0, abs=1e-9)


def test_random_constructed_feasible_systems(rng):
    for _ in range(30):
        m = int(rng.integers(1, 8))
        n = int(rng.integers(1, 6))
        a = rng.normal(size=(m, n))
        x0 = rng.uniform(0, 2, n)
        b = a @ x0 + rng.uniform(0.01, 1.0, m)  # slack keeps x0 interior
        feasible, x, _ = feasible_point(a, b)
        assert feasible
        assert np.all(a @ x <= b + 1e-9)
        assert np.all(x >= -1e-12)


def test_obviously_infeasible_sum():
    # x1 + x2 <= -1 with x >= 0
    feasible, _, infeas = feasible_point(np.array([[1.0, 1.0]]),
                                         np.array([-1.0]))
    assert not feasible
    assert infeas >= 1.0 - 1e-9


def test_pivot_cap_raises():
    a = np.array([[-1.0], [1.0]])
    b = np.array([-0.5, 1.0])
    with pytest.raises(SimplexError):
        feasible_point(a, b, max_pivots=0)
