"""Continuum limits: sector weights, energy densities and fermionic correlators.

Fermionic correlators are Pfaffians of two-point functions of symbols
psi_w and psi*_w placed at points of the torus.  In a twisted sector
(i, j) != (0, 0) the two-point function is

    <psi_w psi_u> = K(w - u),  <psi*_w psi*_u> = conj(K(w - u)),  <psi_w psi*_u> = 0,

with K = cs, ns, ds for (0,1), (1,0), (1,1).  In the periodic sector K is
replaced by the Weierstrass zeta function and the mixed pairing is the
constant <psi_w psi*_u> = -pi i c, with c the one-point energy coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .specfun import (
    PeriodPair,
    check_tau,
    jacobi_kernel,
    theta_constants,
    weierstrass_zeta,
)

TWISTED = ((0, 1), (1, 0), (1, 1))
ETA_DEFAULT = cmath.exp(1j * math.pi / 8)

# E eps_H - E eps_V = DIFFERENCE_PREFACTOR * H * delta^2 + o(delta^2)
DIFFERENCE_PREFACTOR = math.sqrt(2.0) * math.pi / 6.0

CONTOUR_POINTS = 64
IMAG_TOL = 1e-10


class GeometryError(ValueError):
    """Raised when points coincide or a contour cannot be placed."""


@dataclass(frozen=True)
class SectorWeights:
    z01: float
    z10: float
    z11: float

    @property
    def total(self) -> float:
        return self.z01 + self.z10 + self.z11

    def weight(self, sector) -> float:
        return {(0, 1): self.z01, (1, 0): self.z10, (1, 1): self.z11}[tuple(sector)]

    def normalized(self) -> dict[tuple[int, int], float]:
        return {s: self.weight(s) / self.total for s in TWISTED}


def sector_weights(tau) -> SectorWeights:
    """(|theta2|, |theta4|, |theta3|) for the sectors (0,1), (1,0), (1,1)."""
    t2, t3, t4 = theta_constants(tau).as_tuple()
    return SectorWeights(abs(t2), abs(t4), abs(t3))


def energy_sum_limit(tau, area: float = 1.0) -> float:
    """Coefficient of delta in E eps_V + E eps_H."""
    tau = check_tau(tau)
    if area <= 0:
        raise ValueError("area must be positive")
    t2, t3, t4 = (abs(t) for t in theta_constants(tau).as_tuple())
    return 2 * math.sqrt(tau.imag) * t2 * t3 * t4 / (t2 + t3 + t4) / math.sqrt(area)


def energy_one_point_limit(tau, area: float = 1.0) -> float:
    """Coefficient of delta in E eps_H (and in E eps_V)."""
    return 0.5 * energy_sum_limit(tau, area)


def kernel_linear_coefficients(periods: PeriodPair) -> dict[tuple[int, int], complex]:
    """Coefficient c of u in K(u) = 1/u + c u + O(u^3) for each twisted kernel.

    c = (pi^2 / (6 omega1^2)) * {theta2^4 - 2 theta3^4, theta2^4 + theta3^4, theta3^4 - 2 theta2^4}.
    """
    t2, t3, _ = theta_constants(periods.tau).as_tuple()
    a, b = t2**4, t3**4
    s = math.pi**2 / (6 * periods.omega1**2)
    return {(0, 1): s * (a - 2 * b), (1, 0): s * (a + b), (1, 1): s * (b - 2 * a)}


def stress_tensor_H(periods: PeriodPair) -> float:
    """H(omega1, omega2) = sum over twisted sectors of (Z_ij / Z) Re[omega1^-2 X_ij]."""
    t2, t3, _ = theta_constants(periods.tau).as_tuple()
    a, b = t2**4, t3**4
    inv = periods.omega1 ** (-2)
    brackets = {(0, 1): a - 2 * b, (1, 0): a + b, (1, 1): b - 2 * a}
    w = sector_weights(periods.tau).normalized()
    return float(sum(w[s] * (inv * brackets[s]).real for s in TWISTED))


def energy_difference_limit(periods: PeriodPair, mesh: float) -> float:
    """Leading term of E eps_H - E eps_V at mesh size delta."""
    return DIFFERENCE_PREFACTOR * stress_tensor_H(periods) * mesh * mesh


def pfaffian(m) -> complex:
    """Pfaffian of an antisymmetric matrix by pivoted skew Gaussian elimination."""
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("pfaffian needs a square matrix")
    if n % 2:
        raise ValueError("pfaffian needs an even dimension")
    if not np.allclose(a, -a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0))):
        raise ValueError("matrix is not antisymmetric")
    pf = 1.0 + 0j
    for k in range(0, n - 1, 2):
        p = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if p != k + 1:
            a[[k + 1, p], :] = a[[p, k + 1], :]
            a[:, [k + 1, p]] = a[:, [p, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0:
            return 0j
        pf *= a[k, k + 1]
        if k + 2 < n:
            t = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(t, col) - np.outer(col, t)
    return pf


def _check_distinct(points, periods: PeriodPair, tol: float = 1e-8):
    pts = [complex(p) for p in points]
    scale = abs(periods.omega1)
    for n in range(len(pts)):
        for m in range(n + 1, len(pts)):
            if _torus_distance(pts[n] - pts[m], periods) < tol * scale:
                raise GeometryError(f"points {pts[n]} and {pts[m]} coincide on the torus")
    return pts


def _torus_distance(d: complex, periods: PeriodPair) -> float:
    best = math.inf
    for p in (-1, 0, 1):
        for q in (-1, 0, 1):
            best = min(best, abs(d + p * periods.omega1 + q * periods.omega2))
    return best


def one_point_constant(periods: PeriodPair) -> float:
    """c with E eps_H ~ c delta; area taken from the periods."""
    return energy_one_point_limit(periods.tau, periods.area)


def _pairing(sector, periods: PeriodPair, c: float):
    """Two-point function <O_1 O_2> for symbols O = (starred, point)."""
    if tuple(sector) == (0, 0):
        kernel = lambda d: weierstrass_zeta(d, periods)
        mixed = -1j * math.pi * c
    else:
        kernel = lambda d: jacobi_kernel(sector, d, periods)
        mixed = 0j

    def pair(o1, o2):
        s1, w1 = o1
        s2, w2 = o2
        if s1 != s2:
            return mixed if not s1 else -mixed
        if w1 == w2:
            return 0j
        k = kernel(w1 - w2)
        return k.conjugate() if s1 else k

    return pair


def correlation_matrix(symbols, sector, periods: PeriodPair) -> np.ndarray:
    """Antisymmetric matrix of pairings for a list of (starred, point) symbols."""
    pair = _pairing(sector, periods, one_point_constant(periods))
    n = len(symbols)
    m = np.zeros((n, n), dtype=complex)
    for r in range(n):
        for s in range(r + 1, n):
            m[r, s] = pair(symbols[r], symbols[s])
            m[s, r] = -m[r, s]
    return m


def correlator(symbols, sector, periods: PeriodPair) -> complex:
    """<O_1 ... O_2N> as the Pfaffian of the pairing matrix; the empty product is 1."""
    if not symbols:
        return 1.0 + 0j
    return pfaffian(correlation_matrix(symbols, sector, periods))


def _energy_symbols(energies):
    out = []
    for e in energies:
        out += [(False, complex(e)), (True, complex(e))]
    return out


def energy_coefficient(sector, energies, periods: PeriodPair) -> complex:
    """E^(ij)_{e_1...e_k}: nonzero only for even k in twisted sectors and odd k in (0,0)."""
    sector = tuple(sector)
    k = len(energies)
    energies = _check_distinct(energies, periods)
    if (sector == (0, 0)) == (k % 2 == 0):
        return 0j
    value = (1j**k) * correlator(_energy_symbols(energies), sector, periods)
    if sector != (0, 0):
        value *= sector_weights(periods.tau).normalized()[sector]
    return value


def f_continuum(sector, a: complex, z: complex, energies, periods: PeriodPair, eta_a: complex = ETA_DEFAULT) -> complex:
    """Continuum fermionic observable f^(ij)_{e_1...e_k}(a, z)."""
    sector = tuple(sector)
    k = len(energies)
    _check_distinct([a, z, *energies], periods)
    conj_eta = (sector != (0, 0)) == (k % 2 == 0)
    symbols = _energy_symbols(energies) + [(False, complex(z)), (not conj_eta, complex(a))]
    value = (1j**k) * correlator(symbols, sector, periods)
    value *= eta_a.conjugate() if conj_eta else eta_a
    if sector != (0, 0):
        value *= sector_weights(periods.tau).normalized()[sector]
    return value


def _real(value: complex) -> float:
    if abs(value.imag) > IMAG_TOL * (1 + abs(value)):
        raise ArithmeticError(f"expected a real value, got {value}")
    return float(value.real)


def multipoint_limit(points, periods: PeriodPair) -> float:
    """Limit of pi^k delta^-k E[eps_e1 ... eps_ek] for distinct points e_1..e_k.

    Even k: sum over twisted sectors of (Z_ij/Z) |Pf K_ij(e_n - e_m)|^2.
    Odd k: i^k Pf M with M built on interleaved (psi_e, psi*_e) rows.
    """
    pts = _check_distinct(points, periods)
    k = len(pts)
    if k % 2 == 0:
        w = sector_weights(periods.tau).normalized()
        total = 0.0
        for s in TWISTED:
            symbols = [(False, p) for p in pts]
            total += w[s] * abs(correlator(symbols, s, periods)) ** 2
        return total
    return _real((1j**k) * correlator(_energy_symbols(pts), (0, 0), periods))


def odd_matrix(points, periods: PeriodPair) -> np.ndarray:
    """The 2k x 2k matrix M of the odd-k formula, rows ordered psi_e1, psi*_e1, psi_e2, ..."""
    return correlation_matrix(_energy_symbols(_check_distinct(points, periods)), (0, 0), periods)


def contour_laurent(func, center: complex, radius: float, n: int = CONTOUR_POINTS) -> tuple[complex, complex]:
    """(residue, constant term) of func at center from an n-point trapezoid rule on a circle."""
    t = 2 * np.pi * np.arange(n) / n
    zs = center + radius * np.exp(1j * t)
    vals = np.array([func(z) for z in zs])
    return complex(np.mean(vals * (zs - center))), complex(np.mean(vals))


def _singularities(points, periods: PeriodPair, reach: int = 2):
    out = []
    for p in points:
        for u in range(-reach, reach + 1):
            for v in range(-reach, reach + 1):
                out.append(complex(p) + u * periods.omega1 + v * periods.omega2)
    return out


def _radius(center: complex, others) -> float:
    d = min(abs(center - o) for o in others if abs(center - o) > 1e-12)
    return 0.25 * d


@dataclass
class ResidueReport:
    residues_e: list
    expected_e: list
    residue_a: complex
    expected_residue_a: complex
    constant_a: complex
    expected_constant_a: complex
    residue_sum: complex

    def max_error(self) -> float:
        errs = [abs(r - e) for r, e in zip(self.residues_e, self.expected_e)]
        errs.append(abs(self.residue_a - self.expected_residue_a))
        errs.append(abs(self.constant_a - self.expected_constant_a))
        errs.append(abs(self.residue_sum))
        return max(errs)

    def passed(self, tol: float = 1e-8) -> bool:
        return self.max_error() <= tol


def residue_validator(sector, a: complex, energies, periods: PeriodPair, eta_a: complex = ETA_DEFAULT) -> ResidueReport:
    """Check the pole structure of f^(ij)_{e_1..e_k}(a, .) by contour extraction.

    Verifies the residue i conj(f_{without e_m}(a, e_m)) at each e_m, the
    residue conj(eta_a) E_{e...} and constant term -i eta_a E_{e...a} at a,
    and that the residues over a fundamental cell of the doubled torus sum
    to zero.
    """
    sector = tuple(sector)
    a = complex(a)
    energies = [complex(e) for e in energies]
    _check_distinct([a, *energies], periods)
    sing = _singularities([a, *energies], periods)
    f = lambda z: f_continuum(sector, a, z, energies, periods, eta_a)
    res_e, exp_e = [], []
    for m, e in enumerate(energies):
        r = _radius(e, sing)
        if r < 1e-6 * abs(periods.omega1):
            raise GeometryError("contour too close to another singularity")
        res_e.append(contour_laurent(f, e, r)[0])
        rest = energies[:m] + energies[m + 1:]
        exp_e.append(1j * f_continuum(sector, a, e, rest, periods, eta_a).conjugate())
    r = _radius(a, sing)
    res_a, const_a = contour_laurent(f, a, r)
    exp_res = eta_a.conjugate() * energy_coefficient(sector, energies, periods)
    exp_const = -1j * eta_a * energy_coefficient(sector, [*energies, a], periods)
    total = 0j
    for p in (0, 1):
        for q in (0, 1):
            shift = p * periods.omega1 + q * periods.omega2
            for c in [a, *energies]:
                total += contour_laurent(f, c + shift, _radius(c, sing))[0]
    return ResidueReport(res_e, exp_e, res_a, exp_res, const_a, exp_const, total)
