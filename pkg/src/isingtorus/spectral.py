"""Momentum-space Kac-Ward and Laplacian determinants on tori.

Every determinant is a product over a sector momentum grid and is carried
as a :class:`LogProduct` (log-magnitude plus sign) so that tori with 10^6
vertices neither overflow nor underflow.

The symbols are evaluated in factorized forms that are manifestly
nonnegative and free of cancellation near the critical zero mode:

    v(a, q)     = (a^2 + 2a - 1)^2 + 4a(1 - a^2)(sin^2 pi q1 + sin^2 pi q2)
    v_tri(a, q) = ((a^2 - 4a + 1)(a + 1))^2
                  + 4a(1 - a^2)^2 (sin^2 pi q1 + sin^2 pi q2 + sin^2 pi (q1 - q2))

which are algebraically identical to the expansions in z = e^{2 pi i q1},
w = e^{2 pi i q2}.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .constants import ALPHA_C, ALPHA_TRI, C_TRI, EPS_BAR_SQUARE
from .geometry import SECTORS, TorusPeriods, check_sector, momentum_numerators

_CRIT_TOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class LogProduct:
    """A real number stored as (log|x|, sign); sign 0 means exactly zero."""

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.sign == 0:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def from_value(cls, x: float) -> "LogProduct":
        if x == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @classmethod
    def from_factors(cls, factors) -> "LogProduct":
        f = np.asarray(factors, dtype=float).ravel()
        if np.any(f == 0):
            return cls(-math.inf, 0)
        sign = -1 if np.count_nonzero(f < 0) % 2 else 1
        return cls(float(np.sum(np.log(np.abs(f)))), sign)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __mul__(self, other: "LogProduct") -> "LogProduct":
        if self.sign == 0 or other.sign == 0:
            return LogProduct(-math.inf, 0)
        return LogProduct(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    def __truediv__(self, other: "LogProduct") -> "LogProduct":
        if other.sign == 0:
            raise ZeroDivisionError("division by an exact zero")
        if self.sign == 0:
            return self
        return LogProduct(self.log_magnitude - other.log_magnitude, self.sign * other.sign)

    def sqrt(self) -> "LogProduct":
        """Positive square root; requires a nonnegative value."""
        if self.sign < 0:
            raise ValueError("square root of a negative product")
        if self.sign == 0:
            return self
        return LogProduct(0.5 * self.log_magnitude, 1)

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _is_critical(alpha: float, alpha_star: float) -> bool:
    return abs(alpha - alpha_star) <= _CRIT_TOL


def _sin2(q) -> np.ndarray:
    return np.sin(np.pi * np.asarray(q, dtype=float)) ** 2


def _split(q):
    q = np.asarray(q, dtype=float) if not isinstance(q, tuple) else q
    if isinstance(q, tuple):
        return np.asarray(float(q[0])), np.asarray(float(q[1]))
    return q[..., 0], q[..., 1]


def _square_mass(alpha: float) -> float:
    """Signed square root of v(alpha, 0); exactly zero at the critical point."""
    return 0.0 if _is_critical(alpha, ALPHA_C) else alpha * alpha + 2 * alpha - 1


def _tri_mass(alpha: float) -> float:
    return 0.0 if _is_critical(alpha, ALPHA_TRI) else (alpha * alpha - 4 * alpha + 1) * (alpha + 1)


def _v_square(alpha, s1, s2):
    return _square_mass(alpha) ** 2 + 4 * alpha * (1 - alpha * alpha) * (s1 + s2)


def _v_tri(alpha, s1, s2, s12):
    return _tri_mass(alpha) ** 2 + 4 * alpha * (1 - alpha * alpha) ** 2 * (s1 + s2 + s12)


def symbol_v(alpha: float, q) -> float | np.ndarray:
    """v(alpha, q) = (1+a^2)^2 + a(a^2-1)(z + 1/z + w + 1/w), z = e^{2 pi i q1}, w = e^{2 pi i q2}.

    ``q`` is a pair (q1, q2) or an array with last axis of length 2.
    """
    alpha = _check_alpha(alpha)
    q1, q2 = _split(q)
    out = _v_square(alpha, _sin2(q1), _sin2(q2))
    return float(out) if np.ndim(out) == 0 else out


def tri_symbol_v(alpha: float, q) -> float | np.ndarray:
    """Triangular-lattice symbol; q in coordinates dual to the basis (1, e^{i pi/3}).

    Expanded form: (1 + 3a^2 + 8a^3 + 3a^4 + a^6)
                   + (2a^3 - a - a^5)(z + w + 1/z + 1/w + z/w + w/z).
    """
    alpha = _check_alpha(alpha)
    q1, q2 = _split(q)
    out = _v_tri(alpha, _sin2(q1), _sin2(q2), _sin2(np.asarray(q1) - np.asarray(q2)))
    return float(out) if np.ndim(out) == 0 else out


# Oriented edge directions of the one-vertex square torus: E, N, W, S.
KW_DIRECTIONS = ("E", "N", "W", "S")
TRI_DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def _transfer_block(alpha, q, steps, angles):
    z = np.exp(2j * np.pi * float(q[0]))
    w = np.exp(2j * np.pi * float(q[1]))
    n = len(steps)
    T = np.zeros((n, n), dtype=complex)
    for d, (a, b) in enumerate(steps):
        phase = z**a * w**b
        for dp in range(n):
            turn = angles[dp] - angles[d]
            turn = (turn + np.pi) % (2 * np.pi) - np.pi
            if abs(abs(turn) - np.pi) < 1e-9:
                continue  # no backtracking
            T[d, dp] = alpha * phase * np.exp(0.5j * turn)
    return np.eye(n) - T


def kw_block(alpha: float, q) -> np.ndarray:
    """4x4 Kac-Ward block on the oriented edges (E, N, W, S) of a one-vertex torus.

    Entry (d, d') is -alpha * exp(i turn/2) * phase(d) when an edge in
    direction d can be followed by one in direction d' (no U-turn); the
    phase of a step is z, w, 1/z, 1/w for E, N, W, S.
    """
    alpha = _check_alpha(alpha)
    steps = ((1, 0), (0, 1), (-1, 0), (0, -1))
    angles = (0.0, np.pi / 2, np.pi, 3 * np.pi / 2)
    return _transfer_block(alpha, q, steps, angles)


def tri_kw_block(alpha: float, q) -> np.ndarray:
    """6x6 analog of :func:`kw_block` for the triangular lattice."""
    alpha = _check_alpha(alpha)
    angles = tuple(k * np.pi / 3 for k in range(6))
    return _transfer_block(alpha, q, TRI_DIRECTIONS, angles)


def _grid_sines(periods: TorusPeriods, sector):
    px, py, D = momentum_numerators(periods, sector)
    s1 = np.sin(np.pi * px / D) ** 2
    s2 = np.sin(np.pi * py / D) ** 2
    s12 = np.sin(np.pi * np.mod(px - py, D) / D) ** 2
    zero = (px == 0) & (py == 0)
    return s1, s2, s12, zero


def _factors(kind, alpha, periods, sector):
    s1, s2, s12, zero = _grid_sines(periods, sector)
    if kind == "square":
        return _v_square(alpha, s1, s2), zero
    return _v_tri(alpha, s1, s2, s12), zero


def det_kw(alpha: float, periods: TorusPeriods, sector, kind: str = "square") -> LogProduct:
    """det KW^(ij) as the product of the symbol over the sector momentum grid."""
    alpha = _check_alpha(alpha)
    sector = check_sector(sector)
    f, _ = _factors(kind, alpha, periods, sector)
    return LogProduct.from_factors(f)


def sector_partition_function(alpha: float, periods: TorusPeriods, sector, kind: str = "square") -> LogProduct:
    """Signed square root Z^(ij) of det KW^(ij).

    Twisted sectors have no zero factor and take the positive root.  In the
    periodic sector the q = 0 factor is the square of an explicit polynomial
    m(alpha) and Z^(00) = s * m(alpha) * sqrt(prod_{q != 0} v) with s fixed by
    Z^(00) -> 1 as alpha -> 0; this makes Z^(00) change sign at criticality.
    """
    alpha = _check_alpha(alpha)
    sector = check_sector(sector)
    f, zero = _factors(kind, alpha, periods, sector)
    if sector != (0, 0):
        return LogProduct.from_factors(f).sqrt()
    rest = LogProduct.from_factors(f[~zero]).sqrt()
    if kind == "square":
        mass = -_square_mass(alpha)
    else:
        mass = _tri_mass(alpha)
    return rest * LogProduct.from_value(mass)


def laplacian_eigenvalues(periods: TorusPeriods, sector, kind: str = "square") -> np.ndarray:
    """Eigenvalues of -Delta on the sector function space.

    Square: 4 sin^2 pi q1 + 4 sin^2 pi q2 = v(alpha_c, q) / (2 alpha_c^2).
    Triangular: |c_tri| v_tri(alpha_tri, q) = 4 (sin^2 pi q1 + sin^2 pi q2 + sin^2 pi (q1 - q2)).
    """
    s1, s2, s12, _ = _grid_sines(periods, check_sector(sector))
    if kind == "square":
        return 4 * (s1 + s2)
    return 4 * (s1 + s2 + s12)


def det_laplacian(periods: TorusPeriods, sector, drop_zero_mode: bool = False, kind: str = "square") -> LogProduct:
    """Product of the eigenvalues of -Delta^(ij); with drop_zero_mode, det* of Delta^(00).

    The zero mode is removed by the exact test q = 0 on the rational grid.
    """
    sector = check_sector(sector)
    s1, s2, s12, zero = _grid_sines(periods, sector)
    lam = 4 * (s1 + s2) if kind == "square" else 4 * (s1 + s2 + s12)
    if drop_zero_mode:
        if not zero.any():
            raise ValueError(f"sector {sector} has no zero mode to drop")
        lam = lam[~zero]
    return LogProduct.from_factors(lam)


def _energy_ratio(periods, kind, prefactor):
    num = det_laplacian(periods, (0, 0), True, kind).sqrt()
    logs = [det_laplacian(periods, s, False, kind).sqrt().log_magnitude for s in SECTORS[1:]]
    top = max(logs)
    log_den = top + math.log(sum(math.exp(l - top) for l in logs))
    return prefactor * math.exp(num.log_magnitude - log_den) / periods.n_vertices


def energy_sum_exact(periods: TorusPeriods) -> float:
    """E eps_V + E eps_H = 4 sqrt(det* D00) / (sum_{ij != 00} sqrt(det Dij)) / |T|."""
    return _energy_ratio(periods, "square", 4.0)


def tri_energy_sum_exact(periods: TorusPeriods) -> float:
    """E eps_e0 + E eps_e1 + E eps_e2 on a triangular torus (periods in the (1, e^{i pi/3}) basis)."""
    return _energy_ratio(periods, "triangular", 6.0 * math.sqrt(2.0))


def sector_ratios(periods: TorusPeriods, alpha: float = ALPHA_C) -> dict[tuple[int, int], float]:
    """Z^(ij) / (Z01 + Z10 + Z11) for the three twisted sectors."""
    logs = {s: sector_partition_function(alpha, periods, s).log_magnitude for s in SECTORS[1:]}
    top = max(logs.values())
    tot = sum(math.exp(l - top) for l in logs.values())
    return {s: math.exp(l - top) / tot for s, l in logs.items()}


def tri_laplacian_eigenvalue(q) -> float | np.ndarray:
    """c_tri * v_tri(alpha_tri, q): eigenvalue of Delta f = sum_{y~x} (f(y) - f(x))."""
    return C_TRI * tri_symbol_v(ALPHA_TRI, q)


def anisotropic_symbol(alpha_h: float, alpha_v: float, q1, q2):
    """Symbol with weight alpha_h on horizontal and alpha_v on vertical steps, and its gradient.

    v = (1+ah^2)(1+av^2) - 2 ah (1-av^2) cos 2 pi q1 - 2 av (1-ah^2) cos 2 pi q2,
    evaluated as m^2 + 4 ah (1-av^2) s1 + 4 av (1-ah^2) s2 with
    m = ah av + ah + av - 1 and s = sin^2 pi q.  Returns (v, dv/dah, dv/dav).
    """
    ah, av = _check_alpha(alpha_h), _check_alpha(alpha_v)
    s1, s2 = _sin2(q1), _sin2(q2)
    c1, c2 = 1 - 2 * s1, 1 - 2 * s2
    m = ah * av + ah + av - 1
    v = m * m + 4 * ah * (1 - av * av) * s1 + 4 * av * (1 - ah * ah) * s2
    dh = 2 * ah * (1 + av * av) - 2 * (1 - av * av) * c1 + 4 * ah * av * c2
    dv = 2 * av * (1 + ah * ah) - 2 * (1 - ah * ah) * c2 + 4 * ah * av * c1
    return v, dh, dv


def directional_energies(periods: TorusPeriods, alpha: float = ALPHA_C) -> tuple[float, float]:
    """(E eps_H, E eps_V) on a square torus from derivatives of the sector products.

    Differentiates log Z^I with respect to the horizontal and vertical
    weights separately, using 2 Z^I = -Z00 + Z01 + Z10 + Z11.
    """
    alpha = _check_alpha(alpha)
    logs, terms = [], []
    for sector in SECTORS:
        px, py, D = momentum_numerators(periods, sector)
        v, dh, dv = anisotropic_symbol(alpha, alpha, px / D, py / D)
        keep = ~((px == 0) & (py == 0)) if sector == (0, 0) else np.ones(v.shape, bool)
        gh = 0.5 * float(np.sum(dh[keep] / v[keep]))
        gv = 0.5 * float(np.sum(dv[keep] / v[keep]))
        logs.append(0.5 * float(np.sum(np.log(v[keep]))))
        if sector == (0, 0):
            # -Z00 = m * R with m = ah av + ah + av - 1, R the root of the nonzero factors
            m = _square_mass(alpha)
            terms.append((m, m * gh + alpha + 1, m * gv + alpha + 1))
        else:
            terms.append((1.0, gh, gv))
    top = max(logs)
    w = [math.exp(l - top) for l in logs]
    z = sum(wi * t[0] for wi, t in zip(w, terms))
    zh = sum(wi * t[1] for wi, t in zip(w, terms))
    zv = sum(wi * t[2] for wi, t in zip(w, terms))
    scale = (1 - alpha * alpha) / periods.n_vertices
    base = alpha - EPS_BAR_SQUARE
    return base + scale * zh / z, base + scale * zv / z


def energy_difference_exact(periods: TorusPeriods, alpha: float = ALPHA_C) -> float:
    """E eps_H - E eps_V on a square torus."""
    h, v = directional_energies(periods, alpha)
    return h - v
