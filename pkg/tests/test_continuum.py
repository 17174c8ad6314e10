import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isingtorus.continuum import (
    DIFFERENCE_PREFACTOR,
    ETA_DEFAULT,
    TWISTED,
    GeometryError,
    correlator,
    energy_coefficient,
    energy_difference_limit,
    energy_one_point_limit,
    energy_sum_limit,
    f_continuum,
    kernel_linear_coefficients,
    multipoint_limit,
    odd_matrix,
    one_point_constant,
    pfaffian,
    residue_validator,
    sector_weights,
    stress_tensor_H,
)
from isingtorus.geometry import TorusPeriods
from isingtorus.oracle import energy_expectations, torus_graph
from isingtorus.specfun import PeriodPair, jacobi_kernel

TAUS = [1j, 2j, 0.5 + 1j, 0.3 + 0.8j]


def test_sector_weights():
    w = sector_weights(1j)
    assert w.z01 == pytest.approx(w.z10, rel=1e-14)
    for tau in TAUS:
        n = sector_weights(tau).normalized()
        assert sum(n.values()) == pytest.approx(1.0, abs=1e-15)
        assert all(v > 0 for v in n.values())
    far = sector_weights(20j).normalized()
    assert far[(0, 1)] < 1e-6
    assert far[(1, 0)] == pytest.approx(0.5, abs=1e-6) and far[(1, 1)] == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("tau", TAUS)
def test_energy_sum_scaling_and_modular_invariance(tau):
    base = energy_sum_limit(tau, 1.0)
    assert base > 0
    assert energy_sum_limit(tau, 4.0) == pytest.approx(base / 2, rel=1e-14)
    assert energy_sum_limit(tau + 1, 1.0) == pytest.approx(base, rel=1e-12)
    assert energy_sum_limit(-1 / tau, 1.0) == pytest.approx(base, rel=1e-12)
    assert energy_one_point_limit(tau, 1.0) == pytest.approx(base / 2, rel=1e-15)


def test_energy_sum_rejects_bad_area():
    with pytest.raises(ValueError):
        energy_sum_limit(1j, 0.0)


def test_stress_tensor_on_square_and_rotated_tori():
    assert abs(stress_tensor_H(PeriodPair(1.0, 1j))) < 1e-14
    for tau in TAUS:
        p = PeriodPair(1.3, 1.3 * tau)
        h = stress_tensor_H(p)
        # rotating by a quarter turn swaps horizontal and vertical edges
        assert stress_tensor_H(PeriodPair(1j * p.omega1, 1j * p.omega2)) == pytest.approx(-h, rel=1e-12, abs=1e-14)
        assert stress_tensor_H(PeriodPair(-p.omega1, -p.omega2)) == pytest.approx(h, rel=1e-12, abs=1e-14)
        assert stress_tensor_H(PeriodPair(2 * p.omega1, 2 * p.omega2)) == pytest.approx(h / 4, rel=1e-12, abs=1e-14)


def test_difference_prefactor():
    assert DIFFERENCE_PREFACTOR == pytest.approx(math.sqrt(2) * math.pi / 6, rel=1e-15)
    p = PeriodPair(1.0, 2j)
    assert energy_difference_limit(p, 0.1) == pytest.approx(DIFFERENCE_PREFACTOR * stress_tensor_H(p) * 0.01, rel=1e-15)


@pytest.mark.parametrize("w1,w2", [((3, 0), (0, 6)), ((6, 0), (0, 3)), ((4, 0), (0, 3)), ((3, 0), (0, 4))])
def test_stress_tensor_sign_matches_enumeration(w1, w2):
    e = energy_expectations(torus_graph(TorusPeriods(w1, w2)))
    h = stress_tensor_H(PeriodPair(complex(*w1), complex(*w2)))
    assert np.sign(e["H"] - e["V"]) == np.sign(h) != 0


def test_pfaffian_examples():
    assert pfaffian([[0, 3], [-3, 0]]) == 3
    a = np.zeros((4, 4))
    vals = {(0, 1): 2.0, (0, 2): -1.0, (0, 3): 0.5, (1, 2): 4.0, (1, 3): 3.0, (2, 3): 7.0}
    for (r, s), v in vals.items():
        a[r, s], a[s, r] = v, -v
    expected = vals[0, 1] * vals[2, 3] - vals[0, 2] * vals[1, 3] + vals[0, 3] * vals[1, 2]
    assert pfaffian(a) == pytest.approx(expected, rel=1e-14)
    assert pfaffian(np.zeros((0, 0))) == 1


def test_pfaffian_squared_is_determinant():
    rng = np.random.default_rng(8)
    for _ in range(10):
        b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        a = b - b.T
        assert pfaffian(a) ** 2 == pytest.approx(np.linalg.det(a), rel=1e-10)


def test_pfaffian_input_errors():
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        pfaffian([[0, 1], [1, 0]])


def test_matrix_of_the_odd_formula_is_antisymmetric():
    p = PeriodPair(1.0, 1.2j)
    m = odd_matrix([0.1 + 0.2j, 0.6 + 0.7j, 0.3 + 0.9j], p)
    assert m.shape == (6, 6)
    assert np.allclose(m, -m.T, atol=0)


def test_one_point_from_multipoint():
    p = PeriodPair(1.0, 1.5j)
    c = one_point_constant(p)
    assert multipoint_limit([0.2 + 0.3j], p) == pytest.approx(math.pi * c, rel=1e-14)


def test_coinciding_points_rejected():
    p = PeriodPair(1.0, 1j)
    with pytest.raises(GeometryError):
        multipoint_limit([0.1, 1.1], p)


def test_two_point_symmetry():
    p = PeriodPair(1.0, 0.4 + 1.1j)
    a, b = 0.1 + 0.2j, 0.55 + 0.7j
    v = multipoint_limit([a, b], p)
    assert v > 0
    assert multipoint_limit([b, a], p) == pytest.approx(v, rel=1e-13)
    assert multipoint_limit([a + p.omega1, b - p.omega2], p) == pytest.approx(v, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=2, max_size=4).filter(lambda x: len(x) % 2 == 0))
def test_even_multipoint_is_real_and_nonnegative(raw):
    p = PeriodPair(1.0, 0.2 + 1.3j)
    pts = [x + y * p.omega2 for x, y in raw]
    try:
        v = multipoint_limit(pts, p)
    except GeometryError:
        return
    assert v >= 0 and math.isfinite(v)


def test_energy_coefficient_parity():
    p = PeriodPair(1.0, 1.3j)
    e = [0.2 + 0.1j, 0.7 + 0.6j, 0.4 + 1.0j]
    for s in TWISTED:
        assert energy_coefficient(s, e[:1], p) == 0
        assert energy_coefficient(s, e, p) == 0
        assert energy_coefficient(s, [], p) == pytest.approx(sector_weights(p.tau).normalized()[s], rel=1e-15)
    assert energy_coefficient((0, 0), [], p) == 0
    assert energy_coefficient((0, 0), e[:2], p) == 0
    assert energy_coefficient((0, 0), e[:1], p) == pytest.approx(math.pi * one_point_constant(p), rel=1e-14)


def test_periodic_sector_observable_is_constant():
    p = PeriodPair(1.0, 1.1j)
    a = 0.1 + 0.1j
    values = [f_continuum((0, 0), a, z, [], p) for z in (0.5 + 0.3j, 0.2 + 0.8j, 0.9 + 0.5j)]
    expected = -1j * math.pi * one_point_constant(p) * ETA_DEFAULT
    assert np.allclose(values, expected, rtol=1e-14, atol=0)


@pytest.mark.parametrize("sector", TWISTED)
def test_observable_periodicity(sector):
    p = PeriodPair(1.0, 0.3 + 1.2j)
    a, e = 0.15 + 0.2j, [0.6 + 0.5j, 0.3 + 0.9j]
    i, j = sector
    for z in (0.45 + 0.35j, 0.8 + 0.1j):
        f = f_continuum(sector, a, z, e, p)
        assert f_continuum(sector, a, z + p.omega1, e, p) == pytest.approx((-1) ** i * f, rel=1e-10)
        assert f_continuum(sector, a, z + p.omega2, e, p) == pytest.approx((-1) ** j * f, rel=1e-10)


@pytest.mark.parametrize("sector", [(0, 0), *TWISTED])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_residues(sector, k):
    p = PeriodPair(1.0, 0.2 + 1.1j)
    energies = [0.6 + 0.4j, 0.3 + 0.8j][:k]
    report = residue_validator(sector, 0.1 + 0.15j, energies, p)
    assert report.passed(1e-8), report.max_error()


@pytest.mark.parametrize("tau", TAUS)
def test_kernel_linear_coefficients(tau):
    w1 = 1.7 * cmath.exp(0.4j)
    p = PeriodPair(w1, w1 * tau)
    coeffs = kernel_linear_coefficients(p)
    r, n = 0.02 * abs(w1), 64
    zs = r * np.exp(2j * np.pi * np.arange(n) / n)
    for s in TWISTED:
        vals = np.array([jacobi_kernel(s, z, p) for z in zs])
        assert np.mean(vals * zs) == pytest.approx(1.0, abs=1e-12)
        assert abs(np.mean(vals / zs) - coeffs[s]) < 1e-9 * max(1, abs(coeffs[s]))


def test_empty_correlator():
    assert correlator([], (0, 1), PeriodPair(1.0, 1j)) == 1
