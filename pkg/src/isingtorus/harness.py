"""Command line driver: exact-identity suites, mesh sweeps, continuum limits and fits.

Configurations are JSON objects.  Every subcommand has a default
configuration; a user file overrides top-level keys, and unknown keys are
rejected.  Results are written as CSV rows with a fixed column order plus a
JSON summary.  Exit status: 0 when every check passes, 1 when any check
fails, 2 for usage or configuration errors.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from .constants import ALPHA_C, ALPHA_TRI, critical_beta
from .continuum import (
    DIFFERENCE_PREFACTOR,
    TWISTED,
    energy_difference_limit,
    energy_one_point_limit,
    energy_sum_limit,
    multipoint_limit,
    odd_matrix,
    pfaffian,
    residue_validator,
    sector_weights,
    stress_tensor_H,
)
from .geometry import SECTORS, TorusPeriods, periods_from_tau
from .observables import (
    CornerVertex,
    antisymmetrize,
    constancy_check_00,
    energy_difference_discrete,
    observable_field,
    phase_residual,
    sector_special_values,
    sholomorphy_report,
    special_values,
)
from .oracle import (
    energy_expectations,
    energy_from_sectors,
    energy_sum_bruteforce,
    high_temperature_sum,
    mu_sector_expectation,
    polynomial_at_critical,
    signed_subgraph_sum,
    subgraph_data,
    subgraph_polynomial,
    torus_graph,
)
from .specfun import PeriodPair, dedekind_eta
from .spectral import (
    det_laplacian,
    energy_difference_exact,
    energy_sum_exact,
    sector_partition_function,
    sector_ratios,
    tri_energy_sum_exact,
)

CSV_COLUMNS = ("quantity", "N", "omega1x", "omega1y", "omega2x", "omega2y", "alpha", "value", "limit", "abs_err", "rel_err")
MAX_SWEEP_N = 4096
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CATALAN = 0.915965594177219015


class ConfigError(ValueError):
    """Malformed configuration; reported with the offending key."""


# ------------------------------------------------------------------ reports


@dataclass
class Row:
    quantity: str
    N: int
    omega1: tuple
    omega2: tuple
    alpha: float
    value: float
    limit: float = math.nan

    @property
    def abs_err(self) -> float:
        return abs(self.value - self.limit)

    @property
    def rel_err(self) -> float:
        return self.abs_err / abs(self.limit) if self.limit != 0 else math.nan

    def cells(self) -> list[str]:
        f = lambda x: format(float(x), ".17g")
        return [
            self.quantity,
            str(self.N),
            str(self.omega1[0]),
            str(self.omega1[1]),
            str(self.omega2[0]),
            str(self.omega2[1]),
            f(self.alpha),
            f(self.value),
            f(self.limit),
            f(self.abs_err),
            f(self.rel_err),
        ]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    command: str
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def summary(self) -> dict:
        return {
            "command": self.command,
            "passed": self.passed,
            "runtime_s": self.runtime,
            "checks": [asdict(c) for c in self.checks],
            "fits": self.fits,
            "rows": [dict(zip(CSV_COLUMNS, r.cells())) for r in self.rows],
        }


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.cells())


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_outputs(report: Report, out) -> None:
    """Write ``out`` as CSV and ``out`` with a .json suffix as the summary."""
    if out is None:
        return
    out = str(out)
    write_csv(report.rows, out)
    stem = out[:-4] if out.endswith(".csv") else out
    with open(stem + ".json", "w") as fh:
        json.dump(report.summary(), fh, indent=2)


# ------------------------------------------------------------------ configuration


def _torus(w1, w2, lattice="square"):
    return {"omega1": list(w1), "omega2": list(w2), "lattice": lattice}


DEFAULTS = {
    "verify": {
        "tori": [
            _torus((3, 0), (0, 3)),
            _torus((4, 0), (0, 3)),
            _torus((4, 0), (1, 3)),
            _torus((3, 1), (-1, 4)),
            _torus((3, 0), (0, 3), "triangular"),
        ],
        "alphas": [0.2, "critical", 0.6],
        "sign_identity_alpha": 0.3,
        "suites": ["energy-sum", "kac-ward", "sign-identity", "sector-energy", "observables", "disorder-sectors", "triangular"],
        "tolerance": 1e-10,
        "observable_tolerance": 1e-12,
        "observable_max_vertices": 13,
    },
    "sweep": {
        "tau": [0.0, 1.0],
        "sizes": [64, 128, 256, 512],
        "quantities": ["energy_sum", "sector_ratios", "laplacian"],
    },
    "fit-c": {
        "taus": [[0.0, 1.0], [0.0, 2.0], [0.5, 1.0]],
        "sizes": [32, 64, 128, 256],
        "tolerance": 1e-4,
        "kronecker_tolerance": 1e-2,
        "doubling_n": 8,
        "doubling_tolerance": 1e-9,
    },
    "limits": {
        "taus": [[0.0, 1.0], [0.0, 2.0], [0.5, 1.0]],
        "points": [[0.13, 0.21], [0.52, 0.37], [0.31, 0.78]],
        "a": [0.71, 0.12],
        "tolerance": 1e-8,
    },
    "diff-study": {
        "brute_force": [
            _torus((4, 0), (0, 3)),
            _torus((3, 0), (0, 4)),
            _torus((3, 0), (0, 6)),
            _torus((6, 0), (0, 3)),
            _torus((4, 0), (0, 6)),
            _torus((4, 0), (0, 4)),
        ],
        "families": [
            {"omega1": [3, 0], "omega2": [0, 4], "scales": [1, 2, 4, 8, 16, 32, 64]},
            {"omega1": [4, 0], "omega2": [0, 3], "scales": [1, 2, 4, 8, 16, 32, 64]},
            {"omega1": [3, 0], "omega2": [0, 6], "scales": [1, 2, 4, 8, 16, 32, 64]},
        ],
        "tolerance": 0.25,
        "cross_check_tolerance": 1e-10,
    },
}

_SUITES = tuple(DEFAULTS["verify"]["suites"])


def load_config(command: str, path=None) -> dict:
    """Defaults for ``command`` overridden by the JSON object in ``path``."""
    cfg = json.loads(json.dumps(DEFAULTS[command]))
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        for key, value in user.items():
            if key not in cfg:
                raise ConfigError(f"{path}: unknown key {key!r} for {command} (allowed: {sorted(cfg)})")
            cfg[key] = value
    validate_config(command, cfg)
    return cfg


def _alpha_value(a, key="alphas") -> float:
    if a == "critical":
        return ALPHA_C
    if not isinstance(a, (int, float)) or isinstance(a, bool):
        raise ConfigError(f"{key}: expected a number or 'critical', got {a!r}")
    if not 0.0 < a < 1.0:
        raise ConfigError(f"{key}: alpha must lie in (0, 1), got {a}")
    return float(a)


def _parse_torus(t, key) -> tuple[TorusPeriods, str]:
    if not isinstance(t, dict):
        raise ConfigError(f"{key}: each torus must be an object")
    extra = set(t) - {"omega1", "omega2", "lattice"}
    if extra:
        raise ConfigError(f"{key}: unknown torus keys {sorted(extra)}")
    try:
        periods = TorusPeriods(tuple(t["omega1"]), tuple(t["omega2"]))
    except KeyError as exc:
        raise ConfigError(f"{key}: torus needs {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    lattice = t.get("lattice", "square")
    if lattice not in ("square", "triangular"):
        raise ConfigError(f"{key}: lattice must be 'square' or 'triangular'")
    return periods, lattice


def _parse_tau(t, key) -> complex:
    if not (isinstance(t, list) and len(t) == 2 and all(isinstance(x, (int, float)) for x in t)):
        raise ConfigError(f"{key}: tau must be [re, im]")
    if t[1] <= 0:
        raise ConfigError(f"{key}: tau must have positive imaginary part")
    return complex(t[0], t[1])


def _sizes(s, key, minimum=1) -> list[int]:
    if not (isinstance(s, list) and all(isinstance(n, int) and n > 0 for n in s)):
        raise ConfigError(f"{key}: sizes must be a list of positive integers")
    if any(b <= a for a, b in zip(s, s[1:])):
        raise ConfigError(f"{key}: sizes must be strictly increasing")
    if len(s) < minimum:
        raise ConfigError(f"{key}: need at least {minimum} sizes")
    return s


def validate_config(command: str, cfg: dict) -> None:
    if command == "verify":
        for t in cfg["tori"]:
            _parse_torus(t, "tori")
        for a in cfg["alphas"]:
            _alpha_value(a)
        _alpha_value(cfg["sign_identity_alpha"], "sign_identity_alpha")
        bad = [s for s in cfg["suites"] if s not in _SUITES]
        if bad:
            raise ConfigError(f"suites: unknown suite(s) {bad} (allowed: {list(_SUITES)})")
    elif command == "sweep":
        _parse_tau(cfg["tau"], "tau")
        sizes = _sizes(cfg["sizes"], "sizes")
        if sizes[-1] > MAX_SWEEP_N:
            raise ConfigError(f"sizes: N = {sizes[-1]} exceeds {MAX_SWEEP_N}")
        bad = [q for q in cfg["quantities"] if q not in DEFAULTS["sweep"]["quantities"]]
        if bad:
            raise ConfigError(f"quantities: unknown {bad}")
    elif command == "fit-c":
        for t in cfg["taus"]:
            _parse_tau(t, "taus")
        _sizes(cfg["sizes"], "sizes", minimum=4)
    elif command == "limits":
        for t in cfg["taus"]:
            _parse_tau(t, "taus")
        for p in [*cfg["points"], cfg["a"]]:
            if not (isinstance(p, list) and len(p) == 2):
                raise ConfigError("points: each point must be [x, y]")
    elif command == "diff-study":
        for t in cfg["brute_force"]:
            _parse_torus(t, "brute_force")
        for fam in cfg["families"]:
            extra = set(fam) - {"omega1", "omega2", "scales"}
            if extra:
                raise ConfigError(f"families: unknown keys {sorted(extra)}")
            _parse_torus({"omega1": fam["omega1"], "omega2": fam["omega2"]}, "families")
            _sizes(fam["scales"], "families.scales", minimum=2)


# ------------------------------------------------------------------ verify suites


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def suite_energy_sum(report: Report, periods: TorusPeriods, tol: float) -> None:
    g = torus_graph(periods)
    brute = energy_sum_bruteforce(g)
    exact = energy_sum_exact(periods)
    report.rows.append(Row("energy_sum", periods.n_vertices, periods.omega1, periods.omega2, ALPHA_C, exact, brute))
    report.check(f"energy-sum {periods.omega1}x{periods.omega2}", _rel(exact, brute) <= tol, f"rel {_rel(exact, brute):.2e}")


def suite_kac_ward(report: Report, periods: TorusPeriods, alphas, tol: float, kind: str = "square") -> None:
    g = torus_graph(periods, kind)
    data = subgraph_data(g)
    for a in alphas:
        for s in SECTORS:
            spectral = sector_partition_function(a, periods, s, kind).value()
            brute = signed_subgraph_sum(g, a, s, data)
            if kind == "square" and a == ALPHA_C and polynomial_at_critical(subgraph_polynomial(g, s, data)) == (0, 0):
                brute = 0.0
            if brute == 0.0 or spectral == 0.0:
                ok = spectral == 0.0 and abs(brute) <= tol
                err = abs(brute)
            else:
                err = _rel(spectral, brute)
                ok = err <= tol
            report.rows.append(Row(f"kac_ward_Z{s[0]}{s[1]}", periods.n_vertices, periods.omega1, periods.omega2, a, spectral, brute))
            report.check(f"kac-ward {kind} {periods.omega1}x{periods.omega2} alpha={a:.6g} sector {s}", ok, f"err {err:.2e}")


def suite_sign_identity(report: Report, periods: TorusPeriods, alpha: float, tol: float) -> None:
    g = torus_graph(periods)
    data = subgraph_data(g)
    total = -data.sign((0, 0)) + data.sign((0, 1)) + data.sign((1, 0)) + data.sign((1, 1))
    report.check(f"sign-identity pointwise {periods.omega1}x{periods.omega2}", bool(np.all(total == 2)), f"{total.size} even subgraphs")
    z = {s: sector_partition_function(alpha, periods, s).value() for s in SECTORS}
    combo = -z[(0, 0)] + z[(0, 1)] + z[(1, 0)] + z[(1, 1)]
    zi = high_temperature_sum(g, alpha, data)
    report.rows.append(Row("sign_identity_2ZI", periods.n_vertices, periods.omega1, periods.omega2, alpha, combo, 2 * zi))
    report.check(f"sign-identity determinants {periods.omega1}x{periods.omega2}", _rel(combo, 2 * zi) <= tol, f"rel {_rel(combo, 2 * zi):.2e}")


def suite_sector_energy(report: Report, periods: TorusPeriods, tol: float) -> None:
    g = torus_graph(periods)
    data = subgraph_data(g)
    direct = energy_expectations(g)
    for tag in g.tags:
        e = g.edge((0, 0), tag)
        val = energy_from_sectors(g, e, data)
        report.rows.append(Row(f"sector_energy_eps_{tag}", periods.n_vertices, periods.omega1, periods.omega2, ALPHA_C, val, direct[tag]))
        report.check(f"sector-energy {periods.omega1}x{periods.omega2} {tag}", abs(val - direct[tag]) <= tol, f"abs {abs(val - direct[tag]):.2e}")


def suite_observables(report: Report, periods: TorusPeriods, tol: float) -> None:
    g = torus_graph(periods)
    a = CornerVertex((0, 0), (1, 1))
    F = observable_field(g, a)
    name = f"{periods.omega1}x{periods.omega2}"
    hol = max(abs(r) for r in sholomorphy_report(F).values())
    report.check(f"observables s-holomorphic {name}", hol <= tol, f"max residual {hol:.2e}")
    for s in SECTORS:
        r = max(abs(x) for x in sholomorphy_report(antisymmetrize(F, s)).values())
        report.check(f"observables s-holomorphic F{s} {name}", r <= tol, f"max residual {r:.2e}")
    ph = phase_residual(F)
    report.check(f"observables phase condition {name}", ph <= tol, f"max {ph:.2e}")
    rows = special_values(g, (), a)
    for s in SECTORS:
        rows += [(f"{s} {lbl}", x, y) for lbl, x, y in sector_special_values(g, s, (), a)]
    err = max(abs(x - y) for _, x, y in rows)
    report.check(f"observables special values {name}", err <= tol, f"{len(rows)} values, max {err:.2e}")
    const = constancy_check_00(antisymmetrize(F, (0, 0)))
    report.check(f"observables F00 constancy {name}", const.passed(tol), f"c = {const.c:.12g}")
    e = energy_expectations(g)
    d = energy_difference_discrete(g)
    report.rows.append(Row("observables_energy_difference", periods.n_vertices, periods.omega1, periods.omega2, ALPHA_C, d, e["H"] - e["V"]))
    report.check(f"observables energy difference {name}", abs(d - (e["H"] - e["V"])) <= tol, f"abs {abs(d - (e['H'] - e['V'])):.2e}")


def suite_disorder_sectors(report: Report, periods: TorusPeriods, tol: float) -> None:
    g = torus_graph(periods)
    beta = critical_beta("square")
    data = subgraph_data(g)
    z = {s: signed_subgraph_sum(g, ALPHA_C, s, data) for s in TWISTED}
    tot = sum(z.values())
    mus = {s: mu_sector_expectation(g, s, beta) for s in SECTORS}
    report.check(f"disorder-sectors sum of sectors {periods.omega1}x{periods.omega2}", abs(sum(mus.values()) - 1) <= tol)
    report.check(f"disorder-sectors mu00 {periods.omega1}x{periods.omega2}", abs(mus[(0, 0)]) <= tol, f"{mus[(0, 0)]:.2e}")
    spectral = sector_ratios(periods)
    for s in TWISTED:
        report.rows.append(Row(f"disorder_sectors_mu{s[0]}{s[1]}", periods.n_vertices, periods.omega1, periods.omega2, ALPHA_C, mus[s], z[s] / tot))
        ok = abs(mus[s] - z[s] / tot) <= tol and abs(spectral[s] - z[s] / tot) <= tol
        report.check(f"disorder-sectors {periods.omega1}x{periods.omega2} sector {s}", ok, f"abs {abs(mus[s] - z[s] / tot):.2e}")


def suite_triangular(report: Report, periods: TorusPeriods, tol: float) -> None:
    g = torus_graph(periods, "triangular")
    brute = energy_sum_bruteforce(g)
    exact = tri_energy_sum_exact(periods)
    report.rows.append(Row("triangular_energy_sum", periods.n_vertices, periods.omega1, periods.omega2, ALPHA_TRI, exact, brute))
    report.check(f"triangular {periods.omega1}x{periods.omega2}", _rel(exact, brute) <= tol, f"rel {_rel(exact, brute):.2e}")


def run_verify(cfg: dict, jobs: int = 1) -> Report:
    t0 = time.perf_counter()
    report = Report("verify")
    tol = cfg["tolerance"]
    alphas = [_alpha_value(a) for a in cfg["alphas"]]
    suites = set(cfg["suites"])
    for t in cfg["tori"]:
        periods, lattice = _parse_torus(t, "tori")
        if lattice == "triangular":
            if "triangular" in suites:
                suite_triangular(report, periods, tol)
            if "kac-ward" in suites:
                suite_kac_ward(report, periods, [ALPHA_TRI], tol, "triangular")
            continue
        if "energy-sum" in suites:
            suite_energy_sum(report, periods, tol)
        if "kac-ward" in suites:
            suite_kac_ward(report, periods, alphas, tol)
        if "sign-identity" in suites:
            suite_sign_identity(report, periods, _alpha_value(cfg["sign_identity_alpha"]), tol)
        if "sector-energy" in suites:
            suite_sector_energy(report, periods, tol)
        if "disorder-sectors" in suites:
            suite_disorder_sectors(report, periods, tol)
        if "observables" in suites and periods.n_vertices <= cfg["observable_max_vertices"]:
            suite_observables(report, periods, cfg["observable_tolerance"])
    report.runtime = time.perf_counter() - t0
    return report


# ------------------------------------------------------------------ sweeps and fits


def _sweep_point(args) -> list[Row]:
    tau, n, quantities = args
    periods = periods_from_tau(tau, n)
    w1, w2 = periods.omega1, periods.omega2
    area = tau.imag
    rows = []
    if "energy_sum" in quantities:
        rows.append(Row("N_energy_sum", n, w1, w2, ALPHA_C, n * energy_sum_exact(periods), energy_sum_limit(tau, area)))
    if "sector_ratios" in quantities:
        ratios = sector_ratios(periods)
        lim = sector_weights(tau).normalized()
        for s in TWISTED:
            rows.append(Row(f"sector_ratio_{s[0]}{s[1]}", n, w1, w2, ALPHA_C, ratios[s], lim[s]))
    if "laplacian" in quantities:
        rows.append(Row("log_det_laplacian_00", n, w1, w2, ALPHA_C, det_laplacian(periods, (0, 0), True).log_magnitude))
        for s in TWISTED:
            rows.append(Row(f"log_det_laplacian_{s[0]}{s[1]}", n, w1, w2, ALPHA_C, det_laplacian(periods, s).log_magnitude))
    return rows


def _map(func, items, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def run_sweep(cfg: dict, jobs: int = 1) -> Report:
    t0 = time.perf_counter()
    report = Report("sweep")
    tau = _parse_tau(cfg["tau"], "tau")
    sizes = cfg["sizes"]
    for rows in _map(_sweep_point, [(tau, n, tuple(cfg["quantities"])) for n in sizes], jobs):
        report.rows.extend(rows)
    for q in sorted({r.quantity for r in report.rows if not math.isnan(r.limit)}):
        errs = [r.abs_err for r in report.rows if r.quantity == q]
        ns = [r.N for r in report.rows if r.quantity == q]
        fit = {"final_abs_err": errs[-1], "final_rel_err": [r.rel_err for r in report.rows if r.quantity == q][-1]}
        if len(errs) > 1 and min(errs) > 0:
            # empirical order p in abs_err ~ N^-p
            fit["decay_order"] = float(-np.polyfit(np.log(ns), np.log(errs), 1)[0])
        report.fits[q] = fit
        report.check(f"sweep {q} error decreasing", all(b < a for a, b in zip(errs, errs[1:])), f"{errs}")
    report.runtime = time.perf_counter() - t0
    return report


def kronecker_value(tau: complex) -> float:
    """det*_zeta of the continuum Laplacian: Im tau |T| |eta(tau)|^4 with omega1 = 1."""
    area = tau.imag
    return tau.imag * area * abs(dedekind_eta(tau)) ** 4


def _laplacian_point(args):
    tau, n = args
    periods = periods_from_tau(tau, n)
    logdet = det_laplacian(periods, (0, 0), True).log_magnitude
    y = logdet - math.log(n * n * kronecker_value(tau))
    return periods.n_vertices, y


def fit_lattice_constant(tau: complex, sizes, jobs: int = 1) -> dict:
    """Least-squares fit of log det* Delta00 - log(N^2 det*_zeta) = C |T^delta| + b."""
    pts = _map(_laplacian_point, [(tau, n) for n in sizes], jobs)
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    C, b = np.polyfit(x, y, 1)
    resid = y - C * x
    return {"C": float(C), "intercept": float(b), "residuals": resid.tolist(), "sizes": list(sizes)}


def doubling_identity(n: int) -> tuple[float, float]:
    """(log det Delta^10 on (n,0),(0,n), log of det* Delta00 ratio of the doubled torus)."""
    base = TorusPeriods((n, 0), (0, n))
    dbl = TorusPeriods((2 * n, 0), (0, n))
    lhs = det_laplacian(base, (1, 0)).log_magnitude
    rhs = det_laplacian(dbl, (0, 0), True).log_magnitude - det_laplacian(base, (0, 0), True).log_magnitude
    return lhs, rhs


def run_fit_c(cfg: dict, jobs: int = 1) -> Report:
    t0 = time.perf_counter()
    report = Report("fit-c")
    fits = {}
    for t in cfg["taus"]:
        tau = _parse_tau(t, "taus")
        fit = fit_lattice_constant(tau, cfg["sizes"], jobs)
        fits[str(tau)] = fit
        n = cfg["sizes"][-1]
        p = periods_from_tau(tau, n)
        detrended = math.exp(fit["residuals"][-1])
        report.rows.append(Row("kronecker_detrended", n, p.omega1, p.omega2, ALPHA_C, detrended, 1.0))
        report.check(f"fit-c kronecker tau={tau}", abs(detrended - 1) <= cfg["kronecker_tolerance"], f"ratio {detrended:.8f}")
    cs = [f["C"] for f in fits.values()]
    report.fits = {"per_tau": fits, "C_mean": float(np.mean(cs)), "C_spread": float(max(cs) - min(cs)), "four_G_over_pi": 4 * CATALAN / math.pi}
    report.check("fit-c C independent of tau", max(cs) - min(cs) <= cfg["tolerance"], f"spread {max(cs) - min(cs):.2e}")
    lhs, rhs = doubling_identity(cfg["doubling_n"])
    report.check("fit-c doubling identity", abs(lhs - rhs) <= cfg["doubling_tolerance"] * max(1.0, abs(lhs)), f"{lhs:.12g} vs {rhs:.12g}")
    report.runtime = time.perf_counter() - t0
    return report


# ------------------------------------------------------------------ continuum limits


def run_limits(cfg: dict, jobs: int = 1) -> Report:
    t0 = time.perf_counter()
    report = Report("limits")
    tol = cfg["tolerance"]
    pts = [complex(*p) for p in cfg["points"]]
    a = complex(*cfg["a"])
    for t in cfg["taus"]:
        tau = _parse_tau(t, "taus")
        w = PeriodPair(1.0, tau)
        area = w.area
        esum = energy_sum_limit(tau, area)
        report.rows.append(Row("energy_sum_limit", 0, (1, 0), (tau.real, tau.imag), ALPHA_C, esum))
        # the same torus in the bases (tau, -1) and (1, tau + 1)
        s_val = energy_sum_limit(-1 / tau, area / abs(tau) ** 2) / abs(tau)
        t_val = energy_sum_limit(tau + 1, area)
        report.check(f"limits modular S tau={tau}", _rel(s_val, esum) <= tol, f"{s_val:.15g} vs {esum:.15g}")
        report.check(f"limits modular T tau={tau}", _rel(t_val, esum) <= tol)
        H = stress_tensor_H(w)
        Hrot = stress_tensor_H(PeriodPair(1j, 1j * tau))
        report.rows.append(Row("stress_tensor_H", 0, (1, 0), (tau.real, tau.imag), ALPHA_C, H))
        report.check(f"limits H rotation tau={tau}", abs(Hrot + H) <= 1e-12 * max(1, abs(H)), f"H = {H:.15g}")
        if abs(tau - 1j) < 1e-15:
            report.check("limits H vanishes on the square torus", abs(H) <= 1e-12, f"{H:.2e}")
        for k in (1, 2, 3):
            val = multipoint_limit(pts[:k], w)
            report.rows.append(Row(f"multipoint_k{k}", 0, (1, 0), (tau.real, tau.imag), ALPHA_C, val))
            report.check(f"limits multipoint k={k} finite real tau={tau}", math.isfinite(val))
        m = odd_matrix(pts[:3], w)
        pf = pfaffian(m)
        det = np.linalg.det(m)
        report.check(f"limits Pf^2 = det tau={tau}", abs(pf * pf - det) <= 1e-10 * max(1, abs(det)))
        one = multipoint_limit(pts[:1], w) / math.pi
        report.check(f"limits k=1 consistency tau={tau}", _rel(one, energy_one_point_limit(tau, area)) <= tol)
        for s in SECTORS:
            for k in (0, 1, 2):
                rep = residue_validator(s, a, pts[:k], w)
                report.check(f"limits residues sector {s} k={k} tau={tau}", rep.passed(tol), f"max {rep.max_error():.2e}")
    report.runtime = time.perf_counter() - t0
    return report


# ------------------------------------------------------------------ difference study


def richardson(values, sizes) -> float:
    """First-order Richardson step in 1/N on the last two entries."""
    (n1, n2), (v1, v2) = sizes[-2:], values[-2:]
    return (n2 * v2 - n1 * v1) / (n2 - n1)


def _continuum_pair(periods: TorusPeriods) -> PeriodPair:
    return PeriodPair(complex(*periods.omega1), complex(*periods.omega2))


def run_diff_study(cfg: dict, jobs: int = 1) -> Report:
    """Anisotropy E eps_H - E eps_V against the stress-tensor prediction.

    Signs come from exhaustive enumeration.  Magnitudes come from the exact
    spectral difference (checked against enumeration on every brute-force
    torus), scaled up along each family and Richardson extrapolated.
    """
    t0 = time.perf_counter()
    report = Report("diff-study")
    for t in cfg["brute_force"]:
        periods, _ = _parse_torus(t, "brute_force")
        e = energy_expectations(torus_graph(periods))
        brute = e["H"] - e["V"]
        exact = energy_difference_exact(periods)
        H = stress_tensor_H(_continuum_pair(periods))
        pred = energy_difference_limit(_continuum_pair(periods), 1.0)
        report.rows.append(Row("diff_bruteforce", periods.n_vertices, periods.omega1, periods.omega2, ALPHA_C, brute, pred))
        name = f"{periods.omega1}x{periods.omega2}"
        report.check(f"diff-study exact vs enumeration {name}", abs(exact - brute) <= cfg["cross_check_tolerance"], f"{abs(exact - brute):.2e}")
        if abs(H) <= 1e-12:
            report.check(f"diff-study square torus {name}", abs(brute) <= 1e-12, f"{brute:.2e}")
        else:
            report.check(f"diff-study sign {name}", np.sign(brute) == np.sign(H), f"diff {brute:.6g}, H {H:.6g}")
    fam_out = {}
    for fam in cfg["families"]:
        w1, w2 = tuple(fam["omega1"]), tuple(fam["omega2"])
        ratios, sizes = [], []
        for k in fam["scales"]:
            p = TorusPeriods((k * w1[0], k * w1[1]), (k * w2[0], k * w2[1]))
            d = energy_difference_exact(p)
            pred = energy_difference_limit(_continuum_pair(p), 1.0)
            report.rows.append(Row("diff_exact", p.n_vertices, p.omega1, p.omega2, ALPHA_C, d, pred))
            ratios.append(d / pred)
            sizes.append(k)
        extrap = richardson(ratios, sizes)
        key = f"{w1}x{w2}"
        fam_out[key] = {"scales": sizes, "ratios": ratios, "extrapolated_ratio": extrap}
        report.check(f"diff-study magnitude {key}", abs(extrap - 1) <= cfg["tolerance"], f"extrapolated ratio {extrap:.6f}")
    report.fits = {"families": fam_out, "prefactor": DIFFERENCE_PREFACTOR}
    report.runtime = time.perf_counter() - t0
    return report


# ------------------------------------------------------------------ entry point

COMMANDS = {
    "verify": run_verify,
    "sweep": run_sweep,
    "limits": run_limits,
    "fit-c": run_fit_c,
    "diff-study": run_diff_study,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isingtorus", description="Finite-torus Ising energy identities and continuum limits.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file overriding the default configuration")
        p.add_argument("--out", help="CSV output path; the JSON summary goes next to it")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for independent sizes")
        if name == "verify":
            p.add_argument("--suite", action="append", choices=_SUITES, help="restrict to a suite (repeatable)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.command, args.config)
        if getattr(args, "suite", None):
            cfg["suites"] = args.suite
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = COMMANDS[args.command](cfg, args.jobs)
    write_outputs(report, args.out)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}")
    print(f"{args.command}: {'all passed' if report.passed else 'FAILURES'} ({len(report.checks)} checks, {report.runtime:.1f} s)")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
