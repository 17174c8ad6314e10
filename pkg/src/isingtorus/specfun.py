"""Theta constants, Dedekind eta, scaled Jacobi functions and Weierstrass zeta.

All series use the nome q = e^{i pi tau}.  Functions of a complex argument
are first reduced into a fundamental cell of the period lattice, where the
theta series converge geometrically, and the exact (anti)periodicity or
quasi-periodicity is applied to the result.
"""

from __future__ import annotations

from dataclasses import dataclass
import cmath
import math

import numpy as np

MAX_TERMS = 400
SERIES_TOL = 1e-16
MIN_IM_TAU = 0.05
POLE_TOL = 1e-10


class PoleError(ValueError):
    """Raised when a function is evaluated too close to one of its poles."""

    def __init__(self, message: str, pole: complex):
        super().__init__(message)
        self.pole = pole


@dataclass(frozen=True)
class ThetaConstants:
    theta2: complex
    theta3: complex
    theta4: complex

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return self.theta2, self.theta3, self.theta4


@dataclass(frozen=True)
class PeriodPair:
    """Continuum periods with Im(omega2 / omega1) > 0."""

    omega1: complex
    omega2: complex

    def __post_init__(self):
        object.__setattr__(self, "omega1", complex(self.omega1))
        object.__setattr__(self, "omega2", complex(self.omega2))
        if self.omega1 == 0 or (self.omega2 / self.omega1).imag <= 0:
            raise ValueError("periods must satisfy Im(omega2/omega1) > 0")

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    @property
    def area(self) -> float:
        return (self.omega1.conjugate() * self.omega2).imag

    def doubled(self) -> "PeriodPair":
        return PeriodPair(2 * self.omega1, 2 * self.omega2)


def check_tau(tau) -> complex:
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"modular parameter must have Im tau > 0, got {tau}")
    if tau.imag < MIN_IM_TAU:
        raise ValueError(f"Im tau = {tau.imag} < {MIN_IM_TAU}; apply a modular transform first")
    return tau


def nome(tau) -> complex:
    return cmath.exp(1j * math.pi * check_tau(tau))


def _series(term, start: int = 1) -> complex:
    """Sum term(n) for n >= start until a term is negligible relative to the sum."""
    total = 0j
    for n in range(start, start + MAX_TERMS):
        t = term(n)
        total += t
        if abs(t) <= SERIES_TOL * max(abs(total), 1e-300):
            return total
    return total


def theta_constants(tau) -> ThetaConstants:
    """(theta2, theta3, theta4) at argument 0 and nome q = e^{i pi tau}."""
    tau = check_tau(tau)
    q = cmath.exp(1j * math.pi * tau)
    q4 = cmath.exp(0.25j * math.pi * tau)
    t3 = 1 + 2 * _series(lambda n: q ** (n * n))
    t4 = 1 + 2 * _series(lambda n: (-1) ** n * q ** (n * n))
    t2 = 2 * q4 * _series(lambda n: q ** (n * (n + 1)), start=0)
    return ThetaConstants(t2, t3, t4)


def dedekind_eta(tau) -> complex:
    """eta(tau) = (theta2 theta3 theta4 / 2)^{1/3}, principal cube root."""
    t2, t3, t4 = theta_constants(tau).as_tuple()
    return (0.5 * t2 * t3 * t4) ** (1.0 / 3.0)


def modulus_and_K(tau) -> tuple[complex, complex]:
    """Elliptic modulus k = (theta2/theta3)^2 and K = (pi/2) theta3^2."""
    t2, t3, _ = theta_constants(tau).as_tuple()
    return (t2 / t3) ** 2, 0.5 * math.pi * t3 * t3


def theta_functions(v: complex, tau) -> tuple[complex, complex, complex, complex]:
    """(theta1, theta2, theta3, theta4)(v | tau); accurate for |Im v| <= pi Im tau."""
    tau = check_tau(tau)
    v = complex(v)
    q = cmath.exp(1j * math.pi * tau)
    q4 = cmath.exp(0.25j * math.pi * tau)
    t1 = 2 * q4 * _series(lambda n: (-1) ** n * q ** (n * (n + 1)) * cmath.sin((2 * n + 1) * v), start=0)
    t2 = 2 * q4 * _series(lambda n: q ** (n * (n + 1)) * cmath.cos((2 * n + 1) * v), start=0)
    t3 = 1 + 2 * _series(lambda n: q ** (n * n) * cmath.cos(2 * n * v))
    t4 = 1 + 2 * _series(lambda n: (-1) ** n * q ** (n * n) * cmath.cos(2 * n * v))
    return t1, t2, t3, t4


def reduce_to_cell(z: complex, periods: PeriodPair) -> tuple[complex, int, int]:
    """Write z = r + m omega1 + n omega2 with r in the cell centred at 0."""
    z = complex(z)
    w1, w2 = periods.omega1, periods.omega2
    det = (w1.conjugate() * w2).imag
    # real coordinates of z in the basis (w1, w2)
    a = (z.conjugate() * w2).imag / det
    b = (w1.conjugate() * z).imag / det
    m, n = round(a), round(b)
    return z - m * w1 - n * w2, m, n


# kernel -> (theta index in the numerator, periodicity bits (i, j))
_JACOBI = {"cs": (2, (0, 1)), "ns": (4, (1, 0)), "ds": (3, (1, 1))}


def jacobi_cnd(kind: str, z: complex, periods: PeriodPair) -> complex:
    """Scaled Jacobi function (2K/omega1) f((2K/omega1) z, k) for f in {cs, ns, ds}.

    Evaluated as (pi/omega1) theta_a theta_b theta_c(v) / theta_1(v) with
    v = pi z / omega1.  The result picks up (-1)^i under z -> z + omega1 and
    (-1)^j under z -> z + omega2, with (i, j) = (0,1), (1,0), (1,1) for
    cs, ns, ds.  Poles sit on the lattice omega1 Z + omega2 Z.
    """
    if kind not in _JACOBI:
        raise ValueError(f"unknown Jacobi kernel {kind!r}")
    index, (i, j) = _JACOBI[kind]
    r, m, n = reduce_to_cell(z, periods)
    if abs(r) < POLE_TOL:
        raise PoleError(f"{kind} evaluated at a pole", complex(z) - r)
    tau = periods.tau
    t2, t3, t4 = theta_constants(tau).as_tuple()
    v = math.pi * r / periods.omega1
    th = theta_functions(v, tau)
    prefactor = {"cs": t3 * t4, "ns": t2 * t3, "ds": t2 * t4}[kind]
    sign = -1 if (i * m + j * n) % 2 else 1
    return sign * (math.pi / periods.omega1) * prefactor * th[index - 1] / th[0]


def jacobi_kernel(sector, z: complex, periods: PeriodPair) -> complex:
    """Two-point kernel of a twisted sector: cs for (0,1), ns for (1,0), ds for (1,1)."""
    kind = {(0, 1): "cs", (1, 0): "ns", (1, 1): "ds"}[tuple(sector)]
    return jacobi_cnd(kind, z, periods)


def eisenstein_e2(tau) -> complex:
    """E2(tau) = 1 - 24 sum_n n q^{2n} / (1 - q^{2n})."""
    q2 = nome(tau) ** 2
    return 1 - 24 * _series(lambda n: n * q2**n / (1 - q2**n))


def _log_theta1_derivative(v: complex, tau: complex) -> complex:
    """theta1'(v)/theta1(v) = cot v + 4 sum_n q^{2n}/(1 - q^{2n}) sin 2nv."""
    q2 = cmath.exp(2j * math.pi * tau)
    return 1 / cmath.tan(v) + 4 * _series(lambda n: q2**n / (1 - q2**n) * cmath.sin(2 * n * v))


def quasi_periods(periods: PeriodPair) -> tuple[complex, complex]:
    """(c1, c2) with zeta(z + omega_k) = zeta(z) + c_k."""
    w1, w2 = periods.omega1, periods.omega2
    c1 = math.pi**2 * eisenstein_e2(periods.tau) / (3 * w1)
    c2 = (c1 * w2 - 2j * math.pi) / w1
    return c1, c2


def weierstrass_zeta(z: complex, periods: PeriodPair) -> complex:
    """Weierstrass zeta function of the lattice omega1 Z + omega2 Z.

    On the central cell, zeta(z) = (pi^2 E2 / (3 omega1^2)) z + (pi/omega1) theta1'/theta1(pi z/omega1);
    elsewhere the quasi-periods are added.
    """
    r, m, n = reduce_to_cell(z, periods)
    if abs(r) < POLE_TOL:
        raise PoleError("zeta evaluated at a lattice point", complex(z) - r)
    w1, tau = periods.omega1, periods.tau
    c1, c2 = quasi_periods(periods)
    core = c1 * r / w1 + (math.pi / w1) * _log_theta1_derivative(math.pi * r / w1, tau)
    return core + m * c1 + n * c2


def weierstrass_zeta_array(z, periods: PeriodPair) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.vectorize(lambda x: weierstrass_zeta(x, periods), otypes=[complex])(z)
