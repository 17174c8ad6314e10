from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isingtorus.geometry import (
    SECTORS,
    DegenerateLatticeError,
    TorusPeriods,
    enumerate_vertices,
    hnf_basis,
    in_lattice,
    is_simple,
    min_distance_to_integers,
    momentum_grid,
    periods_from_tau,
    reduce_momentum,
    reduce_vertex,
    require_simple,
    shift_vector,
    vertex_index,
)


def test_rectangular_vertices():
    assert sorted(enumerate_vertices(TorusPeriods((3, 0), (0, 3)))) == sorted(itertools.product(range(3), range(3)))


def test_skew_vertex_counts():
    assert len(enumerate_vertices(TorusPeriods((4, 0), (1, 3)))) == 12
    periods = TorusPeriods((3, 1), (-1, 4))
    reps = enumerate_vertices(periods)
    assert len(reps) == 13
    # pairwise non-congruent and exhaustive over a bounding box
    assert len({reduce_vertex(periods, p) for p in reps}) == 13
    box = {reduce_vertex(periods, (x, y)) for x in range(-8, 9) for y in range(-8, 9)}
    assert box == set(reps)


def test_degenerate_periods_rejected():
    with pytest.raises(DegenerateLatticeError):
        TorusPeriods((2, 1), (4, 2))


def test_orientation_normalized():
    p = TorusPeriods((0, 3), (3, 0))
    assert p.det > 0 and p.tau.imag > 0


def test_shift_vectors():
    assert shift_vector(TorusPeriods((5, 1), (2, 7)), (0, 0)) == (0, 0)
    assert shift_vector(TorusPeriods((4, 0), (0, 4)), (1, 0)) == (Fraction(1, 8), 0)
    assert shift_vector(TorusPeriods((4, 0), (1, 3)), (0, 1)) == (0, Fraction(1, 6))


def test_small_grids():
    p = TorusPeriods((2, 0), (0, 2))
    half = Fraction(1, 2)
    assert set(momentum_grid(p, (0, 0))) == {(0, 0), (half, 0), (0, half), (half, half)}
    q = Fraction(1, 4)
    assert set(momentum_grid(p, (1, 1))) == {(q, q), (3 * q, q), (q, 3 * q), (3 * q, 3 * q)}


def test_skew_grid_closed_under_dual_lattice():
    p = TorusPeriods((4, 0), (1, 3))
    grid = set(momentum_grid(p, (0, 0)))
    assert len(grid) == 12
    for qx, qy in grid:
        # q . omega must be an integer for the untwisted sector
        assert (qx * 4).denominator == 1 and (qx + 3 * qy).denominator == 1
    # the dual lattice is generated by rows of the inverse period matrix
    g = (Fraction(1, 4), Fraction(-1, 12))
    for q in grid:
        assert reduce_momentum((q[0] + g[0], q[1] + g[1])) in grid


def test_minimum_size_rule():
    assert not is_simple(TorusPeriods((2, 0), (0, 3)))
    assert is_simple(TorusPeriods((3, 0), (0, 3)))
    with pytest.raises(ValueError):
        require_simple(TorusPeriods((2, 0), (0, 2)))


def test_periods_from_tau():
    p = periods_from_tau(0.5 + 1j, 8)
    assert p.omega1 == (8, 0) and p.omega2 == (4, 8) and p.mesh == 1 / 8


periods_strategy = st.tuples(
    st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)
).filter(lambda t: t[0] * t[3] - t[1] * t[2] != 0 and abs(t[0] * t[3] - t[1] * t[2]) <= 60)


@settings(max_examples=60, deadline=None)
@given(periods_strategy, st.sampled_from(SECTORS))
def test_grid_invariants(t, sector):
    p = TorusPeriods((t[0], t[1]), (t[2], t[3]))
    grid = momentum_grid(p, sector)
    assert len(grid) == len(set(grid)) == len(enumerate_vertices(p)) == p.det
    i, j = sector
    for qx, qy in grid:
        d1 = qx * p.omega1[0] + qy * p.omega1[1] - Fraction(i, 2)
        d2 = qx * p.omega2[0] + qy * p.omega2[1] - Fraction(j, 2)
        assert d1.denominator == 1 and d2.denominator == 1
    if sector == (0, 0):
        assert (0, 0) in grid
    else:
        assert min_distance_to_integers(grid) > 1 / (4 * p.det)
    # the twisted grid is the untwisted grid translated by the shift vector
    s = shift_vector(p, sector)
    base = {reduce_momentum((qx + s[0], qy + s[1])) for qx, qy in momentum_grid(p, (0, 0))}
    assert base == set(grid)


@settings(max_examples=60, deadline=None)
@given(periods_strategy, st.integers(-30, 30), st.integers(-30, 30))
def test_reduction_is_canonical(t, x, y):
    p = TorusPeriods((t[0], t[1]), (t[2], t[3]))
    r = reduce_vertex(p, (x, y))
    assert r in enumerate_vertices(p)
    assert in_lattice(p, (x - r[0], y - r[1]))
    shifted = (x + 2 * p.omega1[0] - p.omega2[0], y + 2 * p.omega1[1] - p.omega2[1])
    assert reduce_vertex(p, shifted) == r
    assert enumerate_vertices(p)[vertex_index(p, (x, y))] == r
    a, b, c = hnf_basis(p)
    assert a * c == p.det and 0 <= b < a
