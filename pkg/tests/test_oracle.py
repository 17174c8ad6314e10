import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isingtorus import oracle
from isingtorus.constants import ALPHA_C, BETA_C, EPS_BAR_SQUARE
from isingtorus.geometry import SECTORS, TorusPeriods
from isingtorus.oracle import (
    BudgetError,
    DisorderPath,
    disorder_correlator,
    dual_loop,
    dual_path,
    edge_weighted_sum,
    energy_correlation,
    energy_expectations,
    energy_from_sectors,
    energy_from_subgraphs,
    even_subgraphs,
    high_temperature_sum,
    homology_bits,
    is_even,
    mask_of,
    mu_sector_expectation,
    partition_function,
    polynomial_at_critical,
    quadratic_form,
    signed_subgraph_sum,
    star,
    subgraph_data,
    subgraph_polynomial,
    torus_graph,
)

SMALL = [((3, 0), (0, 3)), ((4, 0), (0, 3)), ((4, 0), (1, 3)), ((4, 0), (0, 4))]


def graph(w1=(3, 0), w2=(0, 3), kind="square"):
    return torus_graph(TorusPeriods(w1, w2), kind)


def test_infinite_temperature():
    g = graph()
    assert partition_function(g, 0.0) == 2**9


@pytest.mark.parametrize("w1,w2", SMALL)
@pytest.mark.parametrize("beta", [0.3, BETA_C, 0.7])
def test_high_temperature_expansion(w1, w2, beta):
    g = graph(w1, w2)
    zi = high_temperature_sum(g, math.tanh(beta))
    expected = math.cosh(beta) ** g.n_edges * 2**g.n_vertices * zi
    assert partition_function(g, beta) == pytest.approx(expected, rel=1e-12)


def test_high_temperature_expansion_triangular():
    g = graph(kind="triangular")
    beta = 0.25
    zi = high_temperature_sum(g, math.tanh(beta))
    assert partition_function(g, beta) == pytest.approx(math.cosh(beta) ** g.n_edges * 2**g.n_vertices * zi, rel=1e-12)


def test_plaquette_flip_is_a_gauge():
    g = graph((4, 0), (0, 3))
    assert partition_function(g, BETA_C, star(g, 5)) == pytest.approx(partition_function(g, BETA_C), rel=1e-14)


def test_energy_correlation_basics():
    g = graph((4, 0), (0, 3))
    assert energy_correlation(g, BETA_C, []) == 1.0
    with pytest.raises(ValueError):
        energy_correlation(g, BETA_C, [3, 3])
    e1, e2 = g.edge((0, 0), "H"), g.edge((2, 1), "V")
    f1, f2 = g.edge((1, 2), "H"), g.edge((3, 0), "V")
    assert energy_correlation(g, BETA_C, [e1, e2]) == pytest.approx(energy_correlation(g, BETA_C, [f1, f2]), rel=1e-13)


def test_even_subgraphs_of_three_by_three():
    g = graph()
    subs = list(even_subgraphs(g))
    assert len(subs) == 2 ** (18 - 9 + 1)
    assert len(set(subs)) == len(subs)
    assert 0 in subs
    assert all(is_even(g, xi) for xi in subs)


def test_quadratic_form_table():
    g = graph()
    column = mask_of(g.edge((0, y), "V") for y in range(3))  # lifts to an omega2 step
    row = mask_of(g.edge((x, 0), "H") for x in range(3))  # lifts to an omega1 step
    table = {
        0: {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 0},
        column: {(0, 0): 1, (0, 1): 1, (1, 0): 0, (1, 1): 0},
        column ^ row: {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 1},
    }
    assert homology_bits(g, column) == (1, 0)
    for xi, row_values in table.items():
        for s, q in row_values.items():
            assert quadratic_form(g, xi, s) == q


@pytest.mark.parametrize("w1,w2", SMALL)
def test_periodic_sector_vanishes_at_criticality(w1, w2):
    g = graph(w1, w2)
    scale = high_temperature_sum(g, ALPHA_C)
    assert abs(signed_subgraph_sum(g, ALPHA_C, (0, 0))) <= 1e-13 * scale


@pytest.mark.parametrize("w1,w2", SMALL)
def test_sign_identity_per_subgraph(w1, w2):
    g = graph(w1, w2)
    d = subgraph_data(g)
    total = -d.sign((0, 0)) + d.sign((0, 1)) + d.sign((1, 0)) + d.sign((1, 1))
    assert np.all(total == 2)
    z = {s: signed_subgraph_sum(g, 0.3, s, d) for s in SECTORS}
    assert -z[(0, 0)] + z[(0, 1)] + z[(1, 0)] + z[(1, 1)] == pytest.approx(2 * high_temperature_sum(g, 0.3, d), rel=1e-12)


def test_sector_sums_independent_of_reference_point():
    p = TorusPeriods((4, 0), (1, 3))
    a = torus_graph(p)
    b = torus_graph(p, z0=(0.3, 0.7))
    for s in SECTORS:
        assert signed_subgraph_sum(a, 0.4, s) == pytest.approx(signed_subgraph_sum(b, 0.4, s), rel=1e-13)


def test_reference_point_through_vertex_rejected():
    with pytest.raises(ValueError):
        torus_graph(TorusPeriods((3, 0), (0, 3)), z0=(0, 0.5))


@pytest.mark.parametrize("w1,w2", SMALL[:3])
def test_energy_from_subgraph_sums(w1, w2):
    g = graph(w1, w2)
    direct = energy_expectations(g)
    d = subgraph_data(g)
    for tag in g.tags:
        e = g.edge((1, 1), tag)
        assert energy_from_subgraphs(g, e, d) == pytest.approx(direct[tag], abs=1e-13)
        assert energy_from_sectors(g, e, d) == pytest.approx(direct[tag], abs=1e-13)


def test_energy_from_subgraphs_triangular():
    g = graph(kind="triangular")
    direct = energy_expectations(g)
    for tag in g.tags:
        e = g.edge((0, 0), tag)
        assert energy_from_subgraphs(g, e) == pytest.approx(direct[tag], abs=1e-13)
        assert energy_from_sectors(g, e) == pytest.approx(direct[tag], abs=1e-13)


def test_disorder_correlator_trivial_cases():
    g = graph((4, 0), (0, 3))
    e = g.edge((1, 1), "H")
    u, v = g.edges[e][:2]
    assert disorder_correlator(g, BETA_C, 0, [u, v]) == pytest.approx(EPS_BAR_SQUARE + energy_correlation(g, BETA_C, [e]), rel=1e-13)
    # a contractible loop around vertex 5: +1 without spins inside, -1 with one
    loop = star(g, 5)
    assert disorder_correlator(g, BETA_C, loop, []) == pytest.approx(1.0, rel=1e-13)
    w = g.index((3, 2))
    plain = disorder_correlator(g, BETA_C, 0, [5, w])
    assert disorder_correlator(g, BETA_C, loop, [5, w]) == pytest.approx(-plain, rel=1e-13)
    assert disorder_correlator(g, BETA_C, 0, [5]) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 11), max_size=4), st.integers(0, 11), st.integers(0, 11))
def test_gauge_invariance(stars, u, w):
    g = graph((4, 0), (0, 3))
    p = dual_path(g, (0, 0), (2, 1))
    gauge = DisorderPath(0)
    for v in stars:
        gauge = gauge ^ star(g, v)
    base = disorder_correlator(g, BETA_C, p, [u, w])
    sign = (-1) ** (stars.count(u) + stars.count(w)) if u != w else 1
    assert disorder_correlator(g, BETA_C, p ^ gauge, [u, w]) == pytest.approx(sign * base, rel=1e-12, abs=1e-14)


def test_dual_path_boundary():
    g = graph((4, 0), (0, 4))
    p = dual_path(g, (0, 0), (2, 3))
    assert p.boundary(g) == {g.index((0, 0)), g.index((2, 3))}
    loop = dual_loop(g, 1, 0)
    assert loop.boundary(g) == set()
    assert disorder_correlator(g, BETA_C, loop, []) < 1.0


@pytest.mark.parametrize("w1,w2", [((3, 0), (0, 3)), ((4, 0), (1, 3))])
def test_sector_disorder_expectations(w1, w2):
    g = graph(w1, w2)
    mus = {s: mu_sector_expectation(g, s) for s in SECTORS}
    assert sum(mus.values()) == pytest.approx(1.0, abs=1e-13)
    assert abs(mus[(0, 0)]) < 1e-13
    z = {s: signed_subgraph_sum(g, ALPHA_C, s) for s in SECTORS[1:]}
    tot = sum(z.values())
    for s in SECTORS[1:]:
        assert mus[s] == pytest.approx(z[s] / tot, abs=1e-12)


def test_square_torus_sector_symmetry():
    g = graph((4, 0), (0, 4))
    assert mu_sector_expectation(g, (0, 1)) == pytest.approx(mu_sector_expectation(g, (1, 0)), abs=1e-13)


def test_periodic_sector_energy_symmetry():
    g = graph((4, 0), (0, 3))
    eh = mu_sector_expectation(g, (0, 0), energies=[g.edge((1, 1), "H")])
    ev = mu_sector_expectation(g, (0, 0), energies=[g.edge((1, 1), "V")])
    assert eh == pytest.approx(ev, abs=1e-13)


def test_edge_weighted_sum_without_signs():
    g = graph()
    e = g.edge((0, 0), "H")
    direct = energy_expectations(g)["H"]
    assert edge_weighted_sum(g, ALPHA_C, None, e) / (math.sqrt(2) * high_temperature_sum(g, ALPHA_C)) == pytest.approx(direct, abs=1e-13)


def test_budget(monkeypatch):
    monkeypatch.setattr(oracle, "MAX_SPIN_VERTICES", 8)
    with pytest.raises(BudgetError):
        partition_function(graph(), BETA_C)


def test_exact_evaluation_at_criticality():
    assert polynomial_at_critical([1]) == (1, 0)
    assert polynomial_at_critical([0, 1]) == (-1, 1)
    assert polynomial_at_critical([3, 0, 1]) == (6, -2)  # 3 + (3 - 2 sqrt2)
    coeffs = [2, -1, 5, 0, 7]
    a, b = polynomial_at_critical(coeffs)
    assert a + b * math.sqrt(2) == pytest.approx(np.polynomial.polynomial.polyval(ALPHA_C, coeffs), rel=1e-12)
    for w1, w2 in SMALL:
        g = graph(w1, w2)
        assert polynomial_at_critical(subgraph_polynomial(g, (0, 0))) == (0, 0)
        assert polynomial_at_critical(subgraph_polynomial(g, (1, 1))) != (0, 0)
