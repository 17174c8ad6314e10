"""Discrete fermionic observables on the corner graph of a doubled square torus.

A corner sits at z = z_o + (s_x, s_y)/4 between the primal vertex z_o and
the dual vertex z_b = z_o + (s_x, s_y)/2, with s in {+-1}^2.  Corners are
encoded by (z_o, s) with z_o reduced modulo the doubled period lattice.

The observable F(a, z) = eta_z E[s_{z_o} s_{a_o} mu_{z_b} mu_{a_b} prod eps]
is built by transport from the base corner a^+: every step of z either
moves z_b across a primal edge (which toggles that edge in the disorder
chain) or moves z_o along a primal edge (which flips the sign if that edge
is in the chain), and the spinor eta_z follows the rotation of z_b - z_o
continuously.  The corners a and their three other lifts are split into
a^+ (on the left as seen from a_b) and a^-, and the corner edges crossing
the energy edges are removed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
import cmath
import math

import numpy as np

from .constants import BETA_C
from .geometry import SECTORS, TorusPeriods, check_sector, enumerate_vertices, reduce_vertex
from .oracle import (
    DisorderPath,
    TorusGraph,
    disorder_correlator,
    dual_loop,
    energy_correlation,
    mu_sector_expectation,
)

SQRT2 = math.sqrt(2.0)
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class CornerVertex:
    """Corner (primal, direction); split is +1/-1 on the two copies of a cut corner."""

    primal: tuple[int, int]
    direction: tuple[int, int]
    split: int = 0
    sheet: int = 0

    @property
    def position(self) -> tuple[float, float]:
        return (self.primal[0] + self.direction[0] / 4, self.primal[1] + self.direction[1] / 4)

    @property
    def dual(self) -> tuple[float, float]:
        return (self.primal[0] + self.direction[0] / 2, self.primal[1] + self.direction[1] / 2)

    def key(self) -> tuple:
        return (self.primal, self.direction, self.split)


def _unit(direction) -> complex:
    return complex(direction[0], direction[1]) / SQRT2


def dirac_spinor(corner: CornerVertex) -> complex:
    """eta_z = e^{i pi/4} ((z_b - z_o)/|z_b - z_o|)^{-1/2}, principal root, negated on sheet 1."""
    eta = cmath.exp(0.25j * math.pi) / cmath.sqrt(_unit(corner.direction))
    return -eta if corner.sheet else eta


def _rotation(d_from, d_to) -> float:
    """Signed angle (+-pi/2) from direction d_from to d_to."""
    return cmath.phase(_unit(d_to) / _unit(d_from))


@dataclass
class CutGraph:
    """Corner graph of the doubled torus with cuts at a and across the energy edges."""

    graph: TorusGraph
    doubled: TorusPeriods
    a: CornerVertex
    energies: tuple
    adjacency: dict = field(default_factory=dict)

    def base_vertex(self, p) -> tuple[int, int]:
        return reduce_vertex(self.graph.periods, p)

    def lift(self, corner: CornerVertex, p: int, q: int) -> CornerVertex:
        (x1, y1), (x2, y2) = self.graph.periods.omega1, self.graph.periods.omega2
        x, y = corner.primal
        v = reduce_vertex(self.doubled, (x + p * x1 + q * x2, y + p * y1 + q * y2))
        return CornerVertex(v, corner.direction, corner.split)

    def a_lifts(self) -> list[CornerVertex]:
        return [self.lift(CornerVertex(self.a.primal, self.a.direction), p, q) for p in (0, 1) for q in (0, 1)]

    def corners(self) -> list[CornerVertex]:
        return sorted(self.adjacency, key=lambda c: (c.primal, c.direction, c.split))


def _primal_edge(graph: TorusGraph, v, step) -> int:
    """Base edge index of the primal edge from lifted v to v + step."""
    dx, dy = step
    if dy == 0:
        start = v if dx == 1 else (v[0] - 1, v[1])
        return graph.edge(start, "H")
    start = v if dy == 1 else (v[0], v[1] - 1)
    return graph.edge(start, "V")


def _moves(graph: TorusGraph, doubled: TorusPeriods, corner: CornerVertex):
    """The four corner-graph steps from a corner.

    Yields (neighbour without split, kind, base edge, rotation) where kind is
    'primal' when z_o moves along the edge and 'dual' when z_b crosses it.
    """
    (x, y), (sx, sy) = corner.primal, corner.direction
    for step, new_dir in (((sx, 0), (-sx, sy)), ((0, sy), (sx, -sy))):
        v = (x + step[0], y + step[1])
        e = _primal_edge(graph, (x, y), step)
        yield CornerVertex(reduce_vertex(doubled, v), new_dir), "primal", e, _rotation((sx, sy), new_dir)
    for step, new_dir in (((0, sy), (-sx, sy)), ((sx, 0), (sx, -sy))):
        e = _primal_edge(graph, (x, y), step)
        yield CornerVertex(corner.primal, new_dir), "dual", e, _rotation((sx, sy), new_dir)


def _split_sign(kind: str, rotation: float) -> int:
    """Copy of a cut corner owning a step: a^+ keeps the z_o step turning left and the z_b step turning right."""
    ccw = rotation > 0
    return 1 if (kind == "primal") == ccw else -1


def build_cut_graph(graph: TorusGraph, a: CornerVertex, energies=()) -> CutGraph:
    if graph.kind != "square":
        raise NotImplementedError("observables are implemented on the square lattice")
    doubled = graph.periods.doubled()
    energies = tuple(sorted(int(e) for e in energies))
    a = CornerVertex(reduce_vertex(doubled, a.primal), a.direction)
    cut = CutGraph(graph, doubled, a, energies)
    for e in energies:
        if e in _corner_edges(graph, a):
            raise ValueError("energy edges must not be incident to the corner a")
    split = {c.key()[:2] for c in cut.a_lifts()}
    adjacency: dict = {}
    for v in enumerate_vertices(doubled):
        for d in ((1, 1), (-1, 1), (-1, -1), (1, -1)):
            base = CornerVertex(v, d)
            for nb, kind, e, rot in _moves(graph, doubled, base):
                if kind == "dual" and e in energies:
                    continue
                src = CornerVertex(v, d, _split_sign(kind, rot)) if base.key()[:2] in split else base
                if nb.key()[:2] in split:
                    # the reverse step has the opposite rotation and the same kind
                    nb = CornerVertex(nb.primal, nb.direction, _split_sign(kind, -rot))
                adjacency.setdefault(src, []).append((nb, kind, e, rot))
    cut.adjacency = adjacency
    return cut


def _corner_edges(graph: TorusGraph, corner: CornerVertex) -> set[int]:
    """Base edges that have this corner among their four corners."""
    (x, y), (sx, sy) = corner.primal, corner.direction
    return {_primal_edge(graph, (x, y), (sx, 0)), _primal_edge(graph, (x, y), (0, sy))}


@dataclass
class ObservableField:
    """Values of F(a, .) on the cut corner graph, with the transported spinor."""

    cut: CutGraph
    values: dict
    eta: dict
    state: dict
    eta_a: complex
    sector: tuple | None = None

    def __getitem__(self, corner: CornerVertex) -> complex:
        return self.values[corner]

    def corners(self):
        return self.cut.corners()

    def lift(self, corner: CornerVertex, p: int, q: int) -> CornerVertex:
        return self.cut.lift(corner, p, q)

    @property
    def a_plus(self) -> CornerVertex:
        return CornerVertex(self.cut.a.primal, self.cut.a.direction, 1)

    @property
    def a_minus(self) -> CornerVertex:
        return CornerVertex(self.cut.a.primal, self.cut.a.direction, -1)

    def a_left(self) -> CornerVertex:
        return _near_corner(self.cut, +1)

    def a_right(self) -> CornerVertex:
        return _near_corner(self.cut, -1)


def _near_corner(cut: CutGraph, side: int) -> CornerVertex:
    """a_L (side +1) = a + i(a_b - a_o) or a_R (side -1) = a - i(a_b - a_o)."""
    (x, y), (sx, sy) = cut.a.primal, cut.a.direction
    # i * (sx, sy)/2 = (-sy, sx)/2; a_L has primal a_o + (0, sy) or (sx, 0) and direction -(s)
    if side > 0:
        off = (0, sy) if sx * sy > 0 else (sx, 0)
    else:
        off = (sx, 0) if sx * sy > 0 else (0, sy)
    v = reduce_vertex(cut.doubled, (x + off[0], y + off[1]))
    return CornerVertex(v, (-sx, -sy))


class _Correlator:
    """Memoized E[s_u s_w mu_gamma prod eps] on the base torus."""

    def __init__(self, graph: TorusGraph, beta: float, energies):
        self.graph, self.beta, self.energies = graph, beta, tuple(energies)
        self._cache: dict = {}

    def __call__(self, mask: int, u: int, w: int) -> float:
        key = (mask, min(u, w), max(u, w))
        if key not in self._cache:
            self._cache[key] = disorder_correlator(self.graph, self.beta, mask, [u, w], self.energies)
        return self._cache[key]


def _step_state(state, kind: str, e: int, rot: float):
    mask, sign, eta = state
    if kind == "dual":
        mask ^= 1 << e
    elif (mask >> e) & 1:
        sign = -sign
    return mask, sign, eta * cmath.exp(-0.5j * rot)


def observable_field(graph: TorusGraph, a: CornerVertex, energies=(), beta: float = BETA_C, check: bool = True) -> ObservableField:
    """F_{e_1..e_k}(a, .) on the cut doubled torus, normalised by F(a, a^+) = eta_a E[prod eps].

    With ``check`` every edge of the cut graph is verified to transport the
    value consistently, i.e. the field is single valued.
    """
    cut = build_cut_graph(graph, a, energies)
    corr = _Correlator(graph, beta, cut.energies)
    a_o = graph.index(cut.a.primal)
    start = CornerVertex(cut.a.primal, cut.a.direction, 1)
    eta_a = dirac_spinor(start)
    states = {start: (0, 1, eta_a)}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        for nb, kind, e, rot in cut.adjacency[c]:
            if nb not in states:
                states[nb] = _step_state(states[c], kind, e, rot)
                queue.append(nb)

    def value(c, state):
        mask, sign, eta = state
        return eta * sign * corr(mask, graph.index(c.primal), a_o)

    values = {c: value(c, s) for c, s in states.items()}
    if check:
        scale = max(abs(v) for v in values.values())
        for c, nbs in cut.adjacency.items():
            for nb, kind, e, rot in nbs:
                moved = value(nb, _step_state(states[c], kind, e, rot))
                if abs(moved - values[nb]) > 1e-12 * scale:
                    raise ArithmeticError(f"observable is not single valued across {c} -> {nb}")
    eta = {c: s[2] for c, s in states.items()}
    return ObservableField(cut, values, eta, states, eta_a)


class CutCornerError(KeyError):
    """Raised when a split corner is addressed without its +/- designation."""


def observable_F(graph: TorusGraph, a: CornerVertex, z: CornerVertex, energies=(), beta: float = BETA_C) -> complex:
    """Single value F_{e_1..e_k}(a, z); z must carry split = +-1 when it lies on a cut."""
    F = observable_field(graph, a, energies, beta, check=False)
    z = CornerVertex(reduce_vertex(F.cut.doubled, z.primal), z.direction, z.split)
    if z not in F.values:
        raise CutCornerError(f"{z} is a split corner; pass split=+1 or -1")
    return F.values[z]


def antisymmetrize(F: ObservableField, sector) -> ObservableField:
    """F^(ij)(a, z) = (1/4) sum_pq (-1)^{ip+jq} F(a, z + p omega1 + q omega2)."""
    i, j = check_sector(sector)
    values = {}
    for c in F.values:
        total = 0j
        for p in (0, 1):
            for q in (0, 1):
                total += (-1) ** ((i * p + j * q) % 2) * F.values[F.lift(c, p, q)]
        values[c] = total / 4
    return ObservableField(F.cut, values, F.eta, F.state, F.eta_a, (i, j))


def _edge_corners(v, tag):
    """(NE, SW, NW, SE) corners of the primal edge from v in direction tag."""
    x, y = v
    if tag == "H":
        return (((x + 1, y), (-1, 1)), ((x, y), (1, -1)), ((x, y), (1, 1)), ((x + 1, y), (-1, -1)))
    return (((x, y + 1), (1, -1)), ((x, y), (-1, 1)), ((x, y + 1), (-1, -1)), ((x, y), (1, 1)))


def sholomorphy_residual(F: ObservableField, v, tag: str) -> complex | None:
    """F(e_NE) + F(e_SW) - F(e_NW) - F(e_SE) for the doubled-torus edge at v; None on a cut."""
    cut = F.cut
    corners = []
    for p, d in _edge_corners(v, tag):
        c = CornerVertex(reduce_vertex(cut.doubled, p), d)
        if c not in F.values:
            return None
        corners.append(c)
    ne, sw, nw, se = (F.values[c] for c in corners)
    return ne + sw - nw - se


def sholomorphy_report(F: ObservableField) -> dict:
    """Residuals at every doubled-torus edge not bordering a or an energy edge."""
    graph = F.cut.graph
    skip = set(F.cut.energies)
    out = {}
    for v in enumerate_vertices(F.cut.doubled):
        for tag in ("H", "V"):
            if graph.edge(v, tag) in skip:
                continue
            r = sholomorphy_residual(F, v, tag)
            if r is not None:
                out[(v, tag)] = r
    return out


def phase_residual(F: ObservableField) -> float:
    """max |Im(F(z) / eta_z)| over all corners, with eta_z the principal spinor."""
    return max(abs((val / dirac_spinor(CornerVertex(c.primal, c.direction))).imag) for c, val in F.values.items())


def projection(eta: complex, x: complex) -> complex:
    """Orthogonal projection of x onto the line eta R."""
    return 0.5 * (x + eta * eta * x.conjugate())


@dataclass
class ConstancyReport:
    c: float
    max_deviation: float
    max_on_eta_a: float
    imag_c: float

    def passed(self, tol: float = RESIDUAL_TOL) -> bool:
        return max(self.max_deviation, self.max_on_eta_a, self.imag_c) <= tol


def constancy_check_00(F00: ObservableField) -> ConstancyReport:
    """Check F^(00)(a, z) = Proj_{eta_z}(i eta_a c) for one real constant c (no energy insertions)."""
    if F00.sector != (0, 0):
        raise ValueError("constancy holds for the (0,0) sector field")
    if F00.cut.energies:
        raise ValueError("constancy holds for the field without energy insertions")
    ia = 1j * F00.eta_a
    cs = [F00.values[c] / ia for c, eta in F00.eta.items() if abs((eta / ia).imag) < 1e-9]
    c = complex(np.mean(cs))
    dev = max(abs(F00.values[k] - projection(F00.eta[k], ia * c)) for k in F00.values)
    on_a = max(abs(F00.values[k]) for k, eta in F00.eta.items() if abs((eta / F00.eta_a).imag) < 1e-9)
    return ConstancyReport(float(c.real), float(dev), float(on_a), abs(c.imag))


def _mu_loop(graph: TorusGraph, p: int, q: int, avoid=()) -> DisorderPath:
    return dual_loop(graph, p, q, avoid=avoid)


def special_values(graph: TorusGraph, energies=(), a: CornerVertex | None = None, beta: float = BETA_C) -> list[tuple[str, complex, complex]]:
    """Rows (label, field value, oracle value) of the special-value table."""
    if a is None:
        a = CornerVertex((0, 0), (1, 1))
    F = observable_field(graph, a, energies, beta)
    energies = F.cut.energies
    eta_a = F.eta_a
    rows = []
    base = energy_correlation(graph, beta, list(energies)) if energies else 1.0
    rows.append(("a+", F[F.a_plus], eta_a * base))
    rows.append(("a-", F[F.a_minus], -eta_a * base))
    a_o = F.cut.a.primal
    e_near = {}
    for side, name in ((1, "L"), (-1, "R")):
        c = _near_corner(F.cut, side)
        e = _primal_edge(graph, a_o, _step_between(a_o, c.primal, F.cut))
        e_near[name] = e
        val = energy_correlation(graph, beta, [e, *energies])
        rows.append((f"a{name}", F[c], -1j * eta_a * SQRT2 * val))
    for p, q in ((1, 0), (0, 1), (1, 1)):
        loop = _mu_loop(graph, p, q, avoid=energies)
        mu = disorder_correlator(graph, beta, loop, [], energies)
        rows.append((f"a+ +({p},{q})", F[F.lift(F.a_plus, p, q)], -eta_a * mu))
        rows.append((f"a- +({p},{q})", F[F.lift(F.a_minus, p, q)], eta_a * mu))
        for side, name in ((1, "L"), (-1, "R")):
            c = F.lift(_near_corner(F.cut, side), p, q)
            e = e_near[name]
            loop = _mu_loop(graph, p, q, avoid=[e, *energies])
            val = disorder_correlator(graph, beta, loop, [], [e, *energies])
            rows.append((f"a{name} +({p},{q})", F[c], 1j * eta_a * SQRT2 * val))
    return rows


def _step_between(u, v, cut: CutGraph):
    """Unit step from lifted u to the doubled-torus vertex v (adjacent)."""
    for step in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        if reduce_vertex(cut.doubled, (u[0] + step[0], u[1] + step[1])) == v:
            return step
    raise ValueError("vertices are not adjacent")


def sector_special_values(graph: TorusGraph, sector, energies=(), a: CornerVertex | None = None, beta: float = BETA_C):
    """Rows (label, F^(ij) value, oracle value) at a^+, a^-, a_L, a_R."""
    if a is None:
        a = CornerVertex((0, 0), (1, 1))
    F = observable_field(graph, a, energies, beta)
    Fs = antisymmetrize(F, sector)
    energies = F.cut.energies
    eta_a = F.eta_a
    m = mu_sector_expectation(graph, sector, beta, energies)
    rows = [("a+", Fs[F.a_plus], eta_a * m), ("a-", Fs[F.a_minus], -eta_a * m)]
    for side, name in ((1, "L"), (-1, "R")):
        c = _near_corner(F.cut, side)
        e = _primal_edge(graph, F.cut.a.primal, _step_between(F.cut.a.primal, c.primal, F.cut))
        val = mu_sector_expectation(graph, sector, beta, [e, *energies])
        rows.append((f"a{name}", Fs[c], -1j * eta_a * SQRT2 * val))
    return rows


def energy_difference_discrete(graph: TorusGraph, beta: float = BETA_C, a: CornerVertex | None = None) -> float:
    """E eps_H - E eps_V from the twisted sector observables at a_L and a_R.

    With a_b - a_o = (1+i)/2 the edge between a and a_L is vertical and the
    one between a and a_R is horizontal.  Then
    E[mu^(ij)(eps_H - eps_V)] = (F^(ij)(a, a_L) - F^(ij)(a, a_R)) / (i sqrt2 eta_a)
    and the periodic sector contributes nothing.
    """
    if a is None:
        a = CornerVertex((0, 0), (1, 1))
    if a.direction != (1, 1):
        raise ValueError("the difference formula uses the corner with a_b - a_o = (1+i)/2")
    F = observable_field(graph, a, (), beta)
    left, right = F.a_left(), F.a_right()
    total = 0j
    for s in SECTORS[1:]:
        Fs = antisymmetrize(F, s)
        total += (Fs[left] - Fs[right]) / (1j * SQRT2 * F.eta_a)
    if abs(total.imag) > 1e-12:
        raise ArithmeticError("energy difference has an imaginary part")
    return float(total.real)


def mu00_energy_difference(graph: TorusGraph, beta: float = BETA_C) -> float:
    """E[mu^(00)(eps_V - eps_H)] read off the periodic-sector field; vanishes identically."""
    F = observable_field(graph, CornerVertex((0, 0), (1, 1)), (), beta)
    F00 = antisymmetrize(F, (0, 0))
    val = -(F00[F.a_left()] - F00[F.a_right()]) / (1j * SQRT2 * F.eta_a)
    return float(val.real)
