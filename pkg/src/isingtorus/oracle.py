"""Brute-force ground truth on small tori.

Two independent exact enumerations are provided:

* spin sums over all 2^|V| configurations, accumulated as integer
  histograms over the number of unsatisfied bonds (so every Boltzmann sum
  is a polynomial in exp(-2 beta) with exact integer coefficients);
* sums over even subgraphs, enumerated as the cycle space of the graph and
  accumulated as integer polynomials in alpha, split by the signs of the
  four quadratic forms.

Disorder insertions are represented by the set of primal edges whose
couplings are flipped (the primal edges crossed by a dual chain).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import math

import numpy as np

from .constants import BETA_C, critical_beta, eps_bar
from .geometry import (
    TorusPeriods,
    check_sector,
    enumerate_vertices,
    lattice_offsets,
    reduce_vertex,
    require_simple,
    vertex_index,
)

MAX_SPIN_VERTICES = 30
MAX_CYCLE_EDGES = 40
_LOW_BITS = 20

SQUARE_TAGS = ("H", "V")
TRIANGULAR_TAGS = ("e0", "e1", "e2")


class BudgetError(ValueError):
    pass


# ---------------------------------------------------------------- graphs


@dataclass
class TorusGraph:
    """Quotient graph of the square or triangular lattice by a period lattice.

    Edge number ``n * ndir + d`` leaves vertex ``n`` in direction ``d``; the
    lifted starting point is the vertex representative itself.
    """

    periods: TorusPeriods
    kind: str
    vertices: list
    edges: list  # (start index, end index, tag)
    offsets: tuple
    z0: tuple = field(default=None)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def tags(self) -> tuple:
        return SQUARE_TAGS if self.kind == "square" else TRIANGULAR_TAGS

    def index(self, p) -> int:
        return vertex_index(self.periods, p)

    def edge(self, p, tag) -> int:
        """Edge leaving (the class of) vertex p in direction ``tag``."""
        return self.index(p) * len(self.offsets) + self.tags.index(tag)

    def edge_tag(self, e: int) -> str:
        return self.edges[e][2]

    def edges_with_tag(self, tag) -> list[int]:
        return [e for e, (_, _, t) in enumerate(self.edges) if t == tag]

    @cached_property
    def crossing_masks(self) -> tuple[int, int]:
        """Bitmasks of edges crossing the lines z0 + t*omega1 and z0 + t*omega2."""
        m1, m2 = 0, 0
        for e, (u, _, t) in enumerate(self.edges):
            p = self.vertices[u]
            off = self.offsets[self.tags.index(t)]
            q = (p[0] + off[0], p[1] + off[1])
            c1, c2 = _edge_crossings(self.periods, self.z0, p, q)
            m1 |= c1 << e
            m2 |= c2 << e
        return m1, m2

    @cached_property
    def incidence(self) -> list[list[tuple[int, int]]]:
        """Per vertex, the list of (edge, other endpoint)."""
        inc = [[] for _ in self.vertices]
        for e, (u, v, _) in enumerate(self.edges):
            inc[u].append((e, v))
            inc[v].append((e, u))
        return inc


def _period_coords(periods: TorusPeriods, p) -> tuple[Fraction, Fraction]:
    """Coordinates (u, v) of p in the basis (omega1, omega2)."""
    (x1, y1), (x2, y2) = periods.omega1, periods.omega2
    d = periods.det
    return Fraction(p[0] * y2 - p[1] * x2, d), Fraction(p[1] * x1 - p[0] * y1, d)


def _count_between(a: Fraction, b: Fraction, c: Fraction) -> int:
    """Number of integers n with c + n strictly between a and b."""
    lo, hi = min(a, b), max(a, b)
    return math.floor(hi - c) - math.floor(lo - c) - (1 if (hi - c).denominator == 1 else 0)


def _edge_crossings(periods, z0, p, q) -> tuple[int, int]:
    u0, v0 = _period_coords(periods, z0)
    up, vp = _period_coords(periods, p)
    uq, vq = _period_coords(periods, q)
    # the line parallel to omega1 has constant v, the one parallel to omega2 constant u
    return _count_between(vp, vq, v0) & 1, _count_between(up, uq, u0) & 1


def admissible_z0(periods: TorusPeriods, z0) -> bool:
    """True when neither reference line through z0 meets a vertex."""
    u0, v0 = _period_coords(periods, z0)
    (x1, y1), (x2, y2) = periods.omega1, periods.omega2
    d = periods.det
    # vertex coordinates d*v range over gcd(x1, y1) Z, d*u over gcd(x2, y2) Z
    g1, g2 = math.gcd(x1, y1), math.gcd(x2, y2)
    return (d * v0 / g1).denominator != 1 and (d * u0 / g2).denominator != 1


def default_z0(periods: TorusPeriods) -> tuple[Fraction, Fraction]:
    """(1/2, 1/2) when admissible, otherwise (omega1 + omega2)/(2 det)."""
    half = (Fraction(1, 2), Fraction(1, 2))
    if admissible_z0(periods, half):
        return half
    d = periods.det
    (x1, y1), (x2, y2) = periods.omega1, periods.omega2
    return Fraction(x1 + x2, 2 * d), Fraction(y1 + y2, 2 * d)


def torus_graph(periods: TorusPeriods, kind: str = "square", z0=None) -> TorusGraph:
    require_simple(periods, kind)
    offs = lattice_offsets(kind)
    tags = SQUARE_TAGS if kind == "square" else TRIANGULAR_TAGS
    verts = enumerate_vertices(periods)
    edges = []
    for n, p in enumerate(verts):
        for off, tag in zip(offs, tags):
            edges.append((n, vertex_index(periods, (p[0] + off[0], p[1] + off[1])), tag))
    if z0 is None:
        z0 = default_z0(periods)
    else:
        z0 = (Fraction(z0[0]), Fraction(z0[1]))
        if not admissible_z0(periods, z0):
            raise ValueError(f"reference point {z0} puts a line through a vertex")
    return TorusGraph(periods, kind, verts, edges, offs, z0)


def mask_of(edges) -> int:
    m = 0
    for e in edges:
        m ^= 1 << int(e)
    return m


def mask_edges(mask: int) -> list[int]:
    out, e = [], 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return out


# ---------------------------------------------------------------- spins


def _spin_histogram(graph: TorusGraph, flips: int, marks: list[tuple[int, ...]]) -> np.ndarray:
    """Exact counts of configurations by (unsatisfied bonds, mark pattern).

    ``flips`` is a bitmask of edges with coupling -1.  Each mark is a tuple
    of vertices whose spin product is recorded; bit m of the pattern is set
    when mark m equals -1.  Returns int64 counts of shape (|E|+1, 2^M).

    Vertex 0 is pinned to +1 and the global flip is restored at the end.
    The remaining spins are split into a vectorized low block and a high
    block traversed in Gray-code order with incremental bond updates.
    """
    n = graph.n_vertices
    if n > MAX_SPIN_VERTICES:
        raise BudgetError(f"{n} spins exceed the enumeration budget of {MAX_SPIN_VERTICES}")
    nE = graph.n_edges
    M = len(marks)
    P = 1 << M
    nfree = n - 1
    L = min(nfree, _LOW_BITS)
    H = nfree - L
    idx = np.arange(1 << L, dtype=np.int64)

    def is_low(v):
        return 1 <= v <= L

    low_spin = {v: (1 - 2 * ((idx >> (v - 1)) & 1)).astype(np.int8) for v in range(1, L + 1)}
    high_spin = {v: 1 for v in range(L + 1, n)}
    high_spin[0] = 1

    J = np.array([-1 if (flips >> e) & 1 else 1 for e in range(nE)], dtype=np.int64)

    def bond(e, u, v):
        su = low_spin[u] if is_low(u) else high_spin[u]
        sv = low_spin[v] if is_low(v) else high_spin[v]
        return J[e] * su * sv

    # sum of J s s over all bonds, as (array over low block) + scalar
    sum_js = np.zeros(1 << L, dtype=np.int16)
    for e, (u, v, _) in enumerate(graph.edges):
        sum_js += bond(e, u, v)

    low_code = np.zeros(1 << L, dtype=np.int64)
    odd_mask = 0
    mark_high = []
    for m, mk in enumerate(marks):
        verts = [v for v in set(mk) if mk.count(v) % 2 == 1]
        if len(verts) % 2 == 1:
            odd_mask |= 1 << m
        prod = np.ones(1 << L, dtype=np.int8)
        hi = []
        for v in verts:
            if is_low(v):
                prod = prod * low_spin[v]
            else:
                hi.append(v)
        low_code |= (prod < 0).astype(np.int64) << m
        mark_high.append(hi)

    hp = 0
    acc = np.zeros((nE + 1, P), dtype=np.int64)
    size = (nE + 1) * P
    for step in range(1 << H):
        if step:
            bit = (step & -step).bit_length() - 1
            h = L + 1 + bit
            for e, w in graph.incidence[h]:
                sum_js -= 2 * bond(e, h, w)
            high_spin[h] = -high_spin[h]
            for m, hi in enumerate(mark_high):
                if h in hi:
                    hp ^= 1 << m
        unsat = (nE - sum_js.astype(np.int64)) // 2
        table = np.bincount(unsat * P + low_code, minlength=size).reshape(nE + 1, P)
        perm = np.arange(P) ^ hp
        acc[:, perm] += table
    return acc + acc[:, np.arange(P) ^ odd_mask]


def _pattern_signs(P: int, M: int) -> np.ndarray:
    """(P, M) array of mark values for each pattern code."""
    codes = np.arange(P)[:, None]
    return 1 - 2 * ((codes >> np.arange(M)[None, :]) & 1)


def _boltzmann_sum(counts: np.ndarray, beta: float, nE: int) -> np.ndarray:
    """Sum over unsatisfied-bond counts with weight exp(beta (|E| - 2k))."""
    k = np.arange(counts.shape[0])
    w = np.exp(beta * (nE - 2 * k))
    return w @ counts


def partition_function(graph: TorusGraph, beta: float, flipped: int = 0) -> float:
    """Sum over spins of exp(beta * sum J s s), J = -1 on flipped edges."""
    flips = flipped.mask if isinstance(flipped, DisorderPath) else int(flipped)
    counts = _spin_histogram(graph, flips, [])
    return float(_boltzmann_sum(counts, beta, graph.n_edges)[0])


def _endpoints(graph, e):
    u, v, _ = graph.edges[e]
    return (u, v)


def energy_correlation(graph: TorusGraph, beta: float, edges) -> float:
    """E[prod_m eps_{e_m}] with eps = s s - eps_bar for the lattice kind."""
    edges = [int(e) for e in edges]
    if len(set(edges)) != len(edges):
        raise ValueError("energy insertions must be at distinct edges")
    if not edges:
        return 1.0
    return disorder_correlator(graph, beta, 0, [], energies=edges)


def disorder_correlator(
    graph: TorusGraph, beta: float, gamma, spin_sites, energies=()
) -> float:
    """E[s_{v1} ... s_{vn} mu_gamma prod eps_e] with mu_gamma = exp(-2 beta sum_{gamma} s s).

    ``spin_sites`` are vertex indices; ``energies`` edge indices whose
    energy densities are taken with the unflipped bond products.
    """
    flips = gamma.mask if isinstance(gamma, DisorderPath) else int(gamma)
    sites = [int(v) for v in spin_sites]
    odd = [v for v in set(sites) if sites.count(v) % 2 == 1]
    if len(odd) % 2 == 1:
        return 0.0
    ebar = eps_bar(graph.kind)
    marks = [tuple(odd)] + [_endpoints(graph, e) for e in energies]
    num = _spin_histogram(graph, flips, marks)
    den = _spin_histogram(graph, 0, [])
    nE = graph.n_edges
    zs = _boltzmann_sum(num, beta, nE)
    signs = _pattern_signs(num.shape[1], len(marks)).astype(float)
    obs = signs[:, 0] * np.prod(signs[:, 1:] - ebar, axis=1)
    Z = _boltzmann_sum(den, beta, nE)[0]
    return float(zs @ obs / Z)


def energy_expectations(graph: TorusGraph, beta: float | None = None) -> dict[str, float]:
    """E eps_e for one edge of each direction (translation invariant)."""
    if beta is None:
        beta = critical_beta(graph.kind)
    return {t: energy_correlation(graph, beta, [graph.edge((0, 0), t)]) for t in graph.tags}


def energy_sum_bruteforce(graph: TorusGraph, beta: float | None = None) -> float:
    return sum(energy_expectations(graph, beta).values())


# ---------------------------------------------------------------- disorder paths


@dataclass(frozen=True)
class DisorderPath:
    """Chain of dual edges mod 2, stored as the mask of primal edges crossed."""

    mask: int = 0

    def __xor__(self, other: "DisorderPath") -> "DisorderPath":
        return DisorderPath(self.mask ^ other.mask)

    def edges(self) -> list[int]:
        return mask_edges(self.mask)

    def boundary(self, graph: TorusGraph) -> set[int]:
        """Faces (indexed by lower-left vertex) with odd incidence."""
        out: set[int] = set()
        for e in self.edges():
            out ^= set(edge_faces(graph, e))
        return out


def edge_faces(graph: TorusGraph, e: int) -> tuple[int, int]:
    """The two square faces bordering edge e (face = index of lower-left vertex)."""
    if graph.kind != "square":
        raise NotImplementedError("dual chains are implemented for the square lattice")
    u, _, tag = graph.edges[e]
    x, y = graph.vertices[u]
    other = (x, y - 1) if tag == "H" else (x - 1, y)
    return graph.index((x, y)), graph.index(other)


def _dual_step(x, y, dx, dy):
    """Primal edge (lifted start, tag) crossed by the dual step from face (x, y)."""
    if dx == 1:
        return (x + 1, y), "V"
    if dx == -1:
        return (x, y), "V"
    if dy == 1:
        return (x, y + 1), "H"
    return (x, y), "H"


def dual_path(graph: TorusGraph, start, end, avoid=()) -> DisorderPath:
    """Shortest dual path between lifted faces ``start`` and ``end``.

    Faces are labelled by their lower-left lattice point in the plane, so a
    path to ``start + lattice vector`` winds around the torus.  Edges in
    ``avoid`` are never crossed.  Raises when no such path exists.
    """
    avoid = set(int(e) for e in avoid)
    start = tuple(start)
    end = tuple(end)
    pad = 2 + max(abs(c) for c in graph.periods.omega1 + graph.periods.omega2)
    lo = (min(start[0], end[0]) - pad, min(start[1], end[1]) - pad)
    hi = (max(start[0], end[0]) + pad, max(start[1], end[1]) + pad)
    prev = {start: None}
    queue = deque([start])
    while queue:
        f = queue.popleft()
        if f == end:
            break
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            g = (f[0] + dx, f[1] + dy)
            if g in prev or not (lo[0] <= g[0] <= hi[0] and lo[1] <= g[1] <= hi[1]):
                continue
            p, tag = _dual_step(f[0], f[1], dx, dy)
            e = graph.edge(p, tag)
            if e in avoid:
                continue
            prev[g] = (f, e)
            queue.append(g)
    if end not in prev:
        raise ValueError("no dual path avoiding the requested edges")
    mask = 0
    f = end
    while prev[f] is not None:
        f, e = prev[f]
        mask ^= 1 << e
    return DisorderPath(mask)


def dual_loop(graph: TorusGraph, p: int, q: int, avoid=()) -> DisorderPath:
    """A dual loop lifting to p*omega1 + q*omega2, not crossing ``avoid``."""
    if (p, q) == (0, 0):
        return DisorderPath(0)
    (x1, y1), (x2, y2) = graph.periods.omega1, graph.periods.omega2
    shift = (p * x1 + q * x2, p * y1 + q * y2)
    best = None
    for f in graph.vertices:
        try:
            path = dual_path(graph, f, (f[0] + shift[0], f[1] + shift[1]), avoid)
        except ValueError:
            continue
        if best is None or bin(path.mask).count("1") < bin(best.mask).count("1"):
            best = path
    if best is None:
        raise ValueError("no loop representative avoids the requested edges")
    return best


def star(graph: TorusGraph, v: int) -> DisorderPath:
    """Dual loop around vertex v: flips the four couplings at v."""
    return DisorderPath(mask_of(e for e, _ in graph.incidence[v]))


def mu_pq_expectation(graph: TorusGraph, p: int, q: int, beta: float = BETA_C, energies=()) -> float:
    """E[mu_pq prod eps] with a loop representative avoiding the energy edges."""
    loop = dual_loop(graph, p, q, avoid=energies)
    return disorder_correlator(graph, beta, loop, [], energies=energies)


def mu_sector_weights(graph: TorusGraph, sector) -> dict[tuple[int, int], int]:
    """Coefficients c_pq with mu^(ij) = sum_pq c_pq mu_pq / 4."""
    i, j = check_sector(sector)
    return {
        (p, q): (-1) ** (((1 - i) * p + (1 - j) * q + p * q) % 2)
        for p in (0, 1)
        for q in (0, 1)
    }


def mu_sector_expectation(graph: TorusGraph, sector, beta: float = BETA_C, energies=()) -> float:
    """E[mu^(ij) prod eps] assembled from the four loop classes."""
    coeff = mu_sector_weights(graph, sector)
    total = 0.0
    for (p, q), c in coeff.items():
        total += c * mu_pq_expectation(graph, p, q, beta, energies)
    return total / 4.0


# ---------------------------------------------------------------- even subgraphs


def cycle_basis(graph: TorusGraph) -> list[int]:
    """Fundamental cycles of a BFS spanning tree, as edge bitmasks."""
    n = graph.n_vertices
    parent = [None] * n  # (parent vertex, edge)
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    tree = set()
    while queue:
        u = queue.popleft()
        for e, w in graph.incidence[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = (u, e)
                tree.add(e)
                queue.append(w)

    def root_path(v):
        m = 0
        while parent[v] is not None:
            v, e = parent[v]
            m ^= 1 << e
        return m

    basis = []
    for e, (u, v, _) in enumerate(graph.edges):
        if e not in tree:
            basis.append((1 << e) ^ root_path(u) ^ root_path(v))
    return basis


def even_subgraphs(graph: TorusGraph):
    """Yield every even subgraph (edge bitmask) once, in Gray-code order."""
    if graph.n_edges > MAX_CYCLE_EDGES:
        raise BudgetError(f"{graph.n_edges} edges exceed the cycle-space budget")
    basis = cycle_basis(graph)
    xi = 0
    yield xi
    for step in range(1, 1 << len(basis)):
        xi ^= basis[(step & -step).bit_length() - 1]
        yield xi


def even_subgraph_array(graph: TorusGraph) -> np.ndarray:
    """All even subgraphs as a uint64 array (same set as even_subgraphs)."""
    if graph.n_edges > MAX_CYCLE_EDGES:
        raise BudgetError(f"{graph.n_edges} edges exceed the cycle-space budget")
    basis = cycle_basis(graph)
    out = np.zeros(1 << len(basis), dtype=np.uint64)
    for k, b in enumerate(basis):
        half = 1 << k
        out[half : 2 * half] = out[:half] ^ np.uint64(b)
    return out


def is_even(graph: TorusGraph, xi: int) -> bool:
    deg = [0] * graph.n_vertices
    for e in mask_edges(xi):
        u, v, _ = graph.edges[e]
        deg[u] += 1
        deg[v] += 1
    return all(d % 2 == 0 for d in deg)


def homology_bits(graph: TorusGraph, xi: int) -> tuple[int, int]:
    """(phi10, phi01): crossing parities with the lines along omega1, omega2."""
    m1, m2 = graph.crossing_masks
    return bin(xi & m1).count("1") & 1, bin(xi & m2).count("1") & 1


def quadratic_form_bits(phi10, phi01, sector):
    i, j = sector
    return ((1 - i) * phi10 + (1 - j) * phi01 + phi10 * phi01) % 2


def sector_form_bits(phi10, phi01, sector):
    """Quadratic form attached to the sector that is antiperiodic along omega1 iff i.

    A twist flipping the edges that cross the line along omega1 changes the
    sign of loops winding along omega2, so the sector label is the transpose
    of the quadratic-form label: the sector (i, j) uses q_ji.
    """
    i, j = sector
    return quadratic_form_bits(phi10, phi01, (j, i))


def quadratic_form(graph: TorusGraph, xi: int, sector) -> int:
    """q_ij(xi) = (1-i) phi10 + (1-j) phi01 + phi10 phi01 mod 2."""
    sector = check_sector(sector)
    return quadratic_form_bits(*homology_bits(graph, xi), sector)


@dataclass
class SubgraphData:
    """Vectorized view of the cycle space: sizes and homology bits."""

    sizes: np.ndarray
    phi10: np.ndarray
    phi01: np.ndarray
    masks: np.ndarray

    def sign(self, sector) -> np.ndarray:
        """(-1)^{q_ji}: the sign entering the sector-(i,j) partition function."""
        return 1 - 2 * sector_form_bits(self.phi10, self.phi01, check_sector(sector))

    def contains(self, e: int) -> np.ndarray:
        return ((self.masks >> np.uint64(e)) & np.uint64(1)).astype(bool)


def subgraph_data(graph: TorusGraph) -> SubgraphData:
    masks = even_subgraph_array(graph)
    m1, m2 = (np.uint64(m) for m in graph.crossing_masks)
    return SubgraphData(
        sizes=np.bitwise_count(masks).astype(np.int64),
        phi10=(np.bitwise_count(masks & m1) & 1).astype(np.int64),
        phi01=(np.bitwise_count(masks & m2) & 1).astype(np.int64),
        masks=masks,
    )


def _poly(sizes, weights, n_edges) -> np.ndarray:
    return np.bincount(sizes, weights=weights, minlength=n_edges + 1).astype(np.int64)


def subgraph_polynomial(graph: TorusGraph, sector=None, data: SubgraphData | None = None) -> np.ndarray:
    """Integer coefficients c_k of sum_xi sign(xi) alpha^|xi| (sign 1 if sector is None)."""
    data = data or subgraph_data(graph)
    w = np.ones_like(data.sizes) if sector is None else data.sign(sector)
    return _poly(data.sizes, w, graph.n_edges)


def polynomial_at_critical(coeffs) -> tuple[int, int]:
    """Exact value a + b sqrt2 of an integer polynomial at alpha_c = sqrt2 - 1."""
    a = b = 0
    pa, pb = 1, 0  # (sqrt2 - 1)^k = pa + pb sqrt2
    for c in coeffs:
        a, b = a + int(c) * pa, b + int(c) * pb
        pa, pb = 2 * pb - pa, pa - pb
    return a, b


def _polyval(coeffs, alpha: float) -> float:
    return float(np.polynomial.polynomial.polyval(alpha, coeffs.astype(float)))


def high_temperature_sum(graph: TorusGraph, alpha: float, data=None) -> float:
    """Z^I = sum over even subgraphs of alpha^|xi|."""
    return _polyval(subgraph_polynomial(graph, None, data), alpha)


def signed_subgraph_sum(graph: TorusGraph, alpha: float, sector, data=None) -> float:
    """Z^(ij) = sum_xi (-1)^{q_ji(xi)} alpha^|xi| (see :func:`sector_form_bits`)."""
    return _polyval(subgraph_polynomial(graph, sector, data), alpha)


def _edge_split(graph, e, sector, data):
    data = data or subgraph_data(graph)
    w = np.ones_like(data.sizes) if sector is None else data.sign(sector)
    inside = data.contains(e)
    p_in = _poly(data.sizes, np.where(inside, w, 0), graph.n_edges)
    p_out = _poly(data.sizes, np.where(inside, 0, w), graph.n_edges)
    return p_in, p_out


def edge_weighted_sum(graph: TorusGraph, alpha: float, sector, e: int, data=None) -> float:
    """B^(ij)(e) = sum_xi (alpha^-1 1_{e in xi} - alpha 1_{e not in xi}) (-1)^q alpha^|xi|.

    With sector None the signs are omitted.
    """
    p_in, p_out = _edge_split(graph, e, sector, data)
    return _polyval(p_in, alpha) / alpha - alpha * _polyval(p_out, alpha)


def triangular_weighted_sum(graph: TorusGraph, alpha: float, sector, e: int, data=None) -> float:
    """sum_xi b(e, xi) (-1)^q alpha^|xi| with b = (1/alpha - eps_bar) 1_in + (alpha - eps_bar) 1_out."""
    ebar = eps_bar(graph.kind)
    p_in, p_out = _edge_split(graph, e, sector, data)
    return (1 / alpha - ebar) * _polyval(p_in, alpha) + (alpha - ebar) * _polyval(p_out, alpha)


def energy_from_subgraphs(graph: TorusGraph, e: int, data=None) -> float:
    """E eps_e at criticality from the high-temperature expansion alone."""
    data = data or subgraph_data(graph)
    alpha = math.tanh(critical_beta(graph.kind))
    zi = high_temperature_sum(graph, alpha, data)
    if graph.kind == "square":
        return edge_weighted_sum(graph, alpha, None, e, data) / (math.sqrt(2.0) * zi)
    return triangular_weighted_sum(graph, alpha, None, e, data) / zi


def energy_from_sectors(graph: TorusGraph, e: int, data=None) -> float:
    """E eps_e = (B01 + B10 + B11 - B00) / (2 sqrt2 Z^I) (square lattice)."""
    data = data or subgraph_data(graph)
    alpha = math.tanh(critical_beta(graph.kind))
    zi = high_temperature_sum(graph, alpha, data)
    if graph.kind == "square":
        b = {s: edge_weighted_sum(graph, alpha, s, e, data) for s in ((0, 0), (0, 1), (1, 0), (1, 1))}
        return (b[(0, 1)] + b[(1, 0)] + b[(1, 1)] - b[(0, 0)]) / (2 * math.sqrt(2.0) * zi)
    b = {s: triangular_weighted_sum(graph, alpha, s, e, data) for s in ((0, 0), (0, 1), (1, 0), (1, 1))}
    return (b[(0, 1)] + b[(1, 0)] + b[(1, 1)] - b[(0, 0)]) / (2 * zi)


def lift_of(graph: TorusGraph, p) -> tuple[int, int]:
    return reduce_vertex(graph.periods, p)
