"""Integer lattice geometry of discrete tori.

A torus is Z^2 modulo the lattice spanned by two integer period vectors.
Vertices are enumerated with a Hermite normal form of the period matrix and
momenta are kept as exact rationals so that the zero mode can be detected
without thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

SECTORS = ((0, 0), (0, 1), (1, 0), (1, 1))

SQUARE_OFFSETS = ((1, 0), (0, 1))
# Triangular lattice in the basis (1, e^{i pi/3}): e0 = 1, e1 = e^{i pi/3},
# e2 = e^{2 i pi/3} = e^{i pi/3} - 1.
TRIANGULAR_OFFSETS = ((1, 0), (0, 1), (-1, 1))


class DegenerateLatticeError(ValueError):
    pass


def _as_pair(v) -> tuple[int, int]:
    x, y = v
    if int(x) != x or int(y) != y:
        raise TypeError(f"period components must be integers, got {v!r}")
    return int(x), int(y)


@dataclass(frozen=True)
class TorusPeriods:
    """Integer periods (lattice units) of a discrete torus with mesh size.

    The orientation is normalized so that det(omega1, omega2) > 0, which is
    Im(omega2/omega1) > 0; a negatively oriented pair has omega2 negated
    (the period lattice, and hence the torus, is unchanged).
    """

    omega1: tuple[int, int]
    omega2: tuple[int, int]
    mesh: float = 1.0

    def __post_init__(self):
        w1 = _as_pair(self.omega1)
        w2 = _as_pair(self.omega2)
        d = w1[0] * w2[1] - w1[1] * w2[0]
        if d == 0:
            raise DegenerateLatticeError(f"collinear periods {w1}, {w2}")
        if d < 0:
            w2 = (-w2[0], -w2[1])
        if not self.mesh > 0:
            raise ValueError("mesh must be positive")
        object.__setattr__(self, "omega1", w1)
        object.__setattr__(self, "omega2", w2)

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.omega1, self.omega2
        return a * d - b * c

    @property
    def n_vertices(self) -> int:
        return self.det

    @property
    def tau(self) -> complex:
        return complex(*self.omega2) / complex(*self.omega1)

    @property
    def area(self) -> float:
        return self.det * self.mesh**2

    def doubled(self) -> "TorusPeriods":
        """Torus with periods 2*omega1, 2*omega2 (the fourfold cover)."""
        (a, b), (c, d) = self.omega1, self.omega2
        return TorusPeriods((2 * a, 2 * b), (2 * c, 2 * d), self.mesh)


def check_sector(sector) -> tuple[int, int]:
    i, j = sector
    if i not in (0, 1) or j not in (0, 1):
        raise ValueError(f"sector bits must be 0 or 1, got {sector!r}")
    return int(i), int(j)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, u, v) with u*a + v*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_u, u = 1, 0
    old_v, v = 0, 1
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_u, u = u, old_u - k * u
        old_v, v = v, old_v - k * v
    if old_r < 0:
        old_r, old_u, old_v = -old_r, -old_u, -old_v
    return old_r, old_u, old_v


def hnf_basis(periods: TorusPeriods) -> tuple[int, int, int]:
    """Triangular basis (a, 0), (b, c) of the period lattice, 0 <= b < a."""
    (x1, y1), (x2, y2) = periods.omega1, periods.omega2
    g, u, v = _xgcd(y1, y2)
    if g == 0:
        raise DegenerateLatticeError("periods span no vertical direction")
    a = periods.det // g
    b = (u * x1 + v * x2) % a
    return a, b, g


def reduce_vertex(periods: TorusPeriods, p) -> tuple[int, int]:
    """Canonical representative of the class of p in Z^2 / Lambda."""
    a, b, c = hnf_basis(periods)
    x, y = _as_pair(p)
    k = y // c
    return (x - k * b) % a, y - k * c


def in_lattice(periods: TorusPeriods, p) -> bool:
    return reduce_vertex(periods, p) == (0, 0)


def enumerate_vertices(periods: TorusPeriods) -> list[tuple[int, int]]:
    """The |det| coset representatives {0 <= x < a, 0 <= y < c}."""
    a, _, c = hnf_basis(periods)
    return [(x, y) for y in range(c) for x in range(a)]


def vertex_index(periods: TorusPeriods, p) -> int:
    """Position of the representative of p in enumerate_vertices."""
    a, _, _ = hnf_basis(periods)
    x, y = reduce_vertex(periods, p)
    return y * a + x


def shift_vector(periods: TorusPeriods, sector) -> tuple[Fraction, Fraction]:
    """Exact solution of s.omega1 = i/2, s.omega2 = j/2."""
    i, j = check_sector(sector)
    (x1, y1), (x2, y2) = periods.omega1, periods.omega2
    d2 = 2 * periods.det
    return Fraction(i * y2 - j * y1, d2), Fraction(j * x1 - i * x2, d2)


def momentum_numerators(periods: TorusPeriods, sector) -> tuple[np.ndarray, np.ndarray, int]:
    """Sector momentum grid as integer numerators over a common denominator.

    Returns (px, py, D) with q = (px/D, py/D), D = 2|det|, numerators reduced
    to [0, D).  This is the array form of :func:`momentum_grid` used by the
    spectral products.
    """
    i, j = check_sector(sector)
    a, b, c = hnf_basis(periods)
    d = periods.det
    D = 2 * d
    (x1, y1), (x2, y2) = periods.omega1, periods.omega2
    m, n = np.meshgrid(np.arange(a, dtype=np.int64), np.arange(c, dtype=np.int64), indexing="ij")
    m = m.ravel()
    n = n.ravel()
    # dual lattice point (m/a, (n a - m b)/(a c)) written over 2d
    px = 2 * m * c + (i * y2 - j * y1)
    py = 2 * (n * a - m * b) + (j * x1 - i * x2)
    return np.mod(px, D), np.mod(py, D), D


def momentum_grid(periods: TorusPeriods, sector) -> list[tuple[Fraction, Fraction]]:
    """Exact momenta of a sector, each reduced into [0, 1)^2."""
    px, py, D = momentum_numerators(periods, sector)
    return [(Fraction(int(u), D), Fraction(int(v), D)) for u, v in zip(px, py)]


def reduce_momentum(q) -> tuple[Fraction, Fraction]:
    qx, qy = (Fraction(t) for t in q)
    return qx - (qx.numerator // qx.denominator), qy - (qy.numerator // qy.denominator)


def lattice_offsets(kind: str) -> tuple[tuple[int, int], ...]:
    if kind == "square":
        return SQUARE_OFFSETS
    if kind == "triangular":
        return TRIANGULAR_OFFSETS
    raise ValueError(f"unknown lattice kind {kind!r}")


def is_simple(periods: TorusPeriods, kind: str = "square") -> bool:
    """True when the quotient graph has no self-loops and no multi-edges.

    A loop appears when a neighbor offset u lies in the period lattice, a
    double edge when a difference u - u' of two distinct offsets does.
    """
    offs = lattice_offsets(kind)
    steps = [s for u in offs for s in (u, (-u[0], -u[1]))]
    bad: set[tuple[int, int]] = set(steps)
    for u in steps:
        for w in steps:
            if u != w:
                bad.add((u[0] - w[0], u[1] - w[1]))
    return not any(in_lattice(periods, p) for p in bad)


def require_simple(periods: TorusPeriods, kind: str = "square") -> None:
    if not is_simple(periods, kind):
        raise ValueError(
            f"torus {periods.omega1}x{periods.omega2} is too small: its {kind} graph "
            "has loops or multiple edges (need at least 3 rows/columns per direction)"
        )


def periods_from_tau(tau: complex, n: int) -> TorusPeriods:
    """Integer periods ((n, 0), round(n tau)) approximating tau at mesh 1/n."""
    w2 = (int(round(n * tau.real)), int(round(n * tau.imag)))
    return TorusPeriods((n, 0), w2, 1.0 / n)


def min_distance_to_integers(qs: Iterable) -> float:
    best = np.inf
    for qx, qy in qs:
        dx = abs(float(qx) - round(float(qx)))
        dy = abs(float(qy) - round(float(qy)))
        best = min(best, float(np.hypot(dx, dy)))
    return best
