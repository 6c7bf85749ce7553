"""Verification suites behind ``fjforms verify``.

Each suite returns a report ``{suite, config, checks, timing}`` where every check
is ``{name, value, bound, pass}``.  Reports contain no wall-clock data, so a
fixed seed and config give byte-identical JSON.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import numpy as np

from . import appendix, n3
from .fj import rank_probe, stabilizer_rank_drop
from .lattice import fsum_complex
from .poincare import detgrowth_probe
from .symmat import SymplecticElement, UnimodularMatrix, UpperHalfPoint, random_symplectic_word
from .theta import (
    ThetaChar,
    TruncationBudget,
    characteristics,
    theta_eval,
    theta_pushforward_check,
    theta_transformation_matrix,
    theta_translation_check,
)
from .unimod import build_t_family

__all__ = [
    "RunConfig",
    "SUITES",
    "run_suite",
    "report_json",
    "exit_code",
    "theta_box_oracle",
    "random_theta_point",
    "random_unimodular",
    "RANK_PROBE_POINTS",
    "SWAP_POINT",
]


@dataclass
class RunConfig:
    tol: float = 1e-12
    budget_radius: int = 60
    grid: int = 16
    seed: int = 0
    q_max: int = 3
    height: int = 1
    n: int = 3
    npts: int = 20

    def budget(self, tol: float | None = None) -> TruncationBudget:
        return TruncationBudget(self.tol if tol is None else tol, self.budget_radius)

    def update(self, values: dict) -> "RunConfig":
        types = {f.name: f.type for f in fields(self)}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            if raw is None:
                continue
            conv = float if types[key] in ("float", float) else int
            val = conv(raw)
            if key in ("seed", "height"):
                if val < 0:
                    raise ValueError(f"{key} must be non-negative")
            elif val <= 0:
                raise ValueError(f"{key} must be positive")
            setattr(self, key, val)
        return self

    @staticmethod
    def parse_file(text: str) -> dict:
        """Flat ``key = value`` lines; ``#`` starts a comment."""
        out = {}
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {ln}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = v
        return out


def _check(name, value, bound, ok):
    if isinstance(value, complex):
        value = [value.real, value.imag]
    elif isinstance(value, (np.floating, np.integer)):
        value = value.item()
    return {"name": name, "value": value, "bound": bound, "pass": bool(ok)}


def _report(suite, cfg, checks, status=None):
    rep = {"suite": suite, "config": asdict(cfg), "checks": checks, "timing": None}
    if status is not None:
        rep["status"] = status
    return rep


def report_json(report) -> str:
    return json.dumps(report, indent=2) + "\n"


def exit_code(report) -> int:
    if report.get("status") == "inconclusive":
        return 3
    return 0 if all(c["pass"] for c in report["checks"]) else 1


# -- theta -------------------------------------------------------------------------------------


def theta_box_oracle(c: ThetaChar, Zhat, zhat, K: int = 10) -> complex:
    """Plain sum over the box ``|k_i| <= K``; no ellipsoid, no tail bookkeeping."""
    Z = np.asarray(Zhat, dtype=complex)
    z = np.asarray(zhat, dtype=complex).reshape(-1)
    a = np.array([float(x) for x in c.a])
    rng = range(-K, K + 1)
    terms = []
    for k in itertools.product(rng, repeat=c.dim):
        v = np.array(k, dtype=float) + a
        terms.append(np.exp(2j * math.pi * c.m * (v @ Z @ v + 2 * v @ z)))
    return fsum_complex(terms)


def random_theta_point(d: int, rng):
    X = rng.uniform(-0.5, 0.5, (d, d))
    L = rng.normal(0, 0.3, (d, d))
    Y = L @ L.T + 0.6 * np.eye(d)
    Z = (X + X.T) / 2 + 1j * Y
    z = rng.uniform(-0.5, 0.5, d) + 1j * rng.uniform(-0.3, 0.3, d)
    return Z, z


def random_unimodular(d: int, rng, steps: int = 4) -> UnimodularMatrix:
    U = np.eye(d, dtype=np.int64)
    for _ in range(steps):
        E = np.eye(d, dtype=np.int64)
        if d > 1 and rng.random() < 0.7:
            i, j = rng.choice(d, 2, replace=False)
            E[i, j] = rng.choice([-1, 1])
        else:
            i = rng.integers(d)
            E[i, i] = -1
        U = U @ E
    return UnimodularMatrix(U)


def _theta_oracle_checks(cfg, rng, npts, dims=(1, 2, 3)):
    budget = cfg.budget()
    checks = []
    for d in dims:
        K = 10 if d < 3 else 7
        worst = 0.0
        for _ in range(npts):
            Z, z = random_theta_point(d, rng)
            c = ThetaChar(1, tuple(Fraction(int(x), 2) for x in rng.integers(0, 2, d)))
            worst = max(worst, abs(theta_eval(c, Z, z, budget) - theta_box_oracle(c, Z, z, K)))
        checks.append(_check(f"oracle max abs error (d={d}, {npts} points)", worst, 1e-12, worst <= 1e-12))
    return checks


def _theta_law_checks(cfg, rng, ncases):
    budget = cfg.budget()
    bound = 2 * budget.tol
    trans = par = push = 0.0
    for i in range(ncases):
        d = 1 + i % 3
        Z, z = random_theta_point(d, rng)
        m = int(rng.integers(1, 3))
        c = ThetaChar(m, tuple(Fraction(int(x), 2 * m) for x in rng.integers(0, 2 * m, d)))
        S = rng.integers(-2, 3, (d, d))
        S = np.triu(S) + np.triu(S, 1).T
        trans = max(trans, theta_translation_check(c, Z, z, S, budget))
        c1 = ThetaChar(1, tuple(Fraction(int(x), 2) for x in rng.integers(0, 2, d)))
        par = max(par, abs(theta_eval(c1, Z, -z, budget) - theta_eval(c1, Z, z, budget)))
        push = max(push, theta_pushforward_check(c1, random_unimodular(d, rng), Z, z, budget))
    return [
        _check(f"translation law ({ncases} cases)", trans, bound, trans <= bound),
        _check(f"parity at index 1 ({ncases} cases)", par, bound, par <= bound),
        _check(f"unimodular pushforward ({ncases} cases)", push, bound, push <= bound),
    ]


def _transformation_checks(cfg, rng, count=5):
    budget = cfg.budget()
    checks = []
    for d in (1, 2):
        unit = indep = 0.0
        Zhat = 1j * np.eye(d) + 0.1 * np.ones((d, d)) + 0.05j * (np.ones((d, d)) - np.eye(d))
        for _ in range(count):
            Mp = random_symplectic_word(d, 4, rng)
            r0 = theta_transformation_matrix(Mp, Zhat, budget, seed=cfg.seed)
            r1 = theta_transformation_matrix(Mp, Zhat, budget, seed=cfg.seed + 1)
            unit = max(unit, r0.unitarity_defect())
            indep = max(indep, float(np.abs(r0.matrix - r1.matrix).max()))
        checks.append(_check(f"transformation matrix unitary (Gamma_{d}, {count} elements)", unit, 1e-6, unit <= 1e-6))
        checks.append(_check(f"transformation matrix sample-independent (Gamma_{d})", indep, 1e-6, indep <= 1e-6))
    return checks


def suite_theta_id(cfg: RunConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    checks = _theta_oracle_checks(cfg, rng, cfg.npts)
    checks += _theta_law_checks(cfg, rng, max(cfg.npts, 10))
    checks += _transformation_checks(cfg, rng)
    return _report("theta-id", cfg, checks)


# -- appendix ------------------------------------------------------------------------------------


def appendix_classes_check() -> tuple[int, int, bool]:
    """(matched with equality, total, involution holds) over the 72 even-type classes."""
    matched = 0
    involution = True
    classes = appendix.all_classes(0)
    for c in classes:
        try:
            m = appendix.congruence_match(c)
        except appendix.NoPartnerError:
            continue
        if appendix.coefficient_equality_check(c, m):
            matched += 1
        involution &= appendix.congruence_match(m.partner).partner == c
    return matched, len(classes), involution


def delta_b_residuals(rng, npts: int = 50, budget: TruncationBudget = TruncationBudget()) -> dict:
    out = {}
    for b in appendix.B_VALUES:
        worst = 0.0
        for _ in range(npts):
            z11 = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(0.8, 2.0)
            z12, z13 = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.3, 0.3, 2)
            worst = max(worst, appendix.delta_b_symmetry(b, z11, z12, z13, budget))
        out[b] = worst
    return out


def suite_appendix(cfg: RunConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    matched, total, inv = appendix_classes_check()
    checks = [
        _check("congruence classes matched with equal z11-exponent", matched, total, matched == total),
        _check("matching is an involution", inv, True, inv),
    ]
    odd = appendix.all_classes(1)
    odd_ok = sum(appendix.coefficient_equality_check(c, appendix.congruence_match(c)) for c in odd)
    checks.append(_check("odd-type classes matched", odd_ok, len(odd), odd_ok == len(odd)))
    for b, res in delta_b_residuals(rng, 50, cfg.budget()).items():
        checks.append(_check(f"Delta_{b} symmetry residual (50 points)", res, 1e-10, res <= 1e-10))
    z11, z12, z13 = 0.1 + 1.1j, 0.2 + 0.1j, -0.3 + 0.05j
    for kind in (1, 2):
        res = abs(appendix.delta_variant(kind, 1, z11, -z12, z13) - appendix.delta_variant(kind, -1, z11, z12, z13))
        checks.append(_check(f"Delta_{kind},+ at -z12 equals Delta_{kind},-", res, 1e-10, res <= 1e-10))
    return _report("appendix", cfg, checks)


# -- n = 3 ---------------------------------------------------------------------------------------


def suite_n3(cfg: RunConfig) -> dict:
    budget = cfg.budget(min(cfg.tol, 1e-13))
    g = n3.gtilde_counterexample(grid=cfg.grid, budget=budget)
    van = float(np.abs(g.psi_half_011).max())
    pre = g.prefactor_error()
    wit = g.witness()
    dexp = abs(g.exponent - g.oracle_exponent)
    checks = [
        _check("psi_(1/2,0),1,1 of G~ vanishes", van, 1e-10, van <= 1e-10),
        _check("prefactor of psi_(0,0),1,2 of G~", abs(g.prefactor), 12.0, pre <= 1e-6),
        _check("fitted z11-exponent / pi", g.exponent / math.pi, g.oracle_exponent / math.pi, dexp <= 1e-6),
        _check("normalised symmetry residual of G~ (witness)", wit, 1.0, wit >= 1.0),
    ]
    grid = n3.default_z11_grid(3)
    prof = n3.extract_psi_profile(n3.SiegelLayerSource(budget=budget), grid, grid=12, budget=budget,
                                  provenance="fourier-jacobi")
    rel = n3.fj_symmetry_residual(prof) / prof.scale()
    checks += [
        _check("symmetry residual of the GL(3) sum (relative)", rel, 1e-8, rel <= 1e-8),
        _check("closure relations of the GL(3) sum (relative)", prof.closure_residual() / prof.scale(), 1e-9,
               prof.closure_residual() <= 1e-9 * prof.scale()),
        _check("parity identity of the GL(3) sum (relative)", prof.parity_residual() / prof.scale(), 1e-9,
               prof.parity_residual() <= 1e-9 * prof.scale()),
    ]
    raw = float(np.abs(g.psi_002).min())
    from .poincare import gl_sum_bound

    r = n3.crossing_weight(raw, 3.0 ** 18, gl_sum_bound(n3.GTILDE_T, np.diag([1.0, 3.0, 1.0])), 3.0, 1.0)
    checks.append(_check("crossing weight (report only)", r, None, True))
    return _report("n3", cfg, checks)


# -- det(CZ + D) growth ---------------------------------------------------------------------------


def detgrowth_checks(rng, n: int = 3, count: int = 20, length: int = 6):
    Zb = UpperHalfPoint.from_complex(np.diag([1.2j, 1.3j, 1.0j][:n]) + 0.1 + 0.05j * (np.ones((n, n)) - np.eye(n)))
    ys = [10.0, 100.0, 1000.0]
    inc = 0
    spread = 0.0
    for _ in range(count):
        W = random_symplectic_word(n, length, rng, lambda M: bool(M.C[:, -1].any()))
        g = detgrowth_probe(W, Zb, ys)
        inc += g.increasing
        spread = max(spread, g.ratio_spread)
    const = 0.0
    for _ in range(count):
        W = random_symplectic_word(n, length, rng, lambda M: M.is_klingen())
        const = max(const, detgrowth_probe(W, Zb, ys).constant_spread)
    return inc, spread, const


def suite_prop1(cfg: RunConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    checks = []
    for n in (2, 3):
        inc, spread, const = detgrowth_checks(rng, n)
        checks += [
            _check(f"|det(CZ+D)| increasing in y_nn (n={n}, 20 words)", inc, 20, inc == 20),
            _check(f"final |det|/y_nn ratio spread (n={n})", spread, 0.1, spread <= 0.1),
            _check(f"Klingen words constant in y_nn (n={n})", const, 1e-12, const <= 1e-12),
        ]
    return _report("prop1", cfg, checks)


# -- rank probe ------------------------------------------------------------------------------------

RANK_PROBE_POINTS = {
    2: np.array([[1.1j]]),
    3: np.array([[1.2j, 0.05 + 0.02j], [0.05 + 0.02j, 1.7j]]),
}
SWAP_POINT = np.array([[0.1 + 1.3j, 0.05 + 0.3j], [0.05 + 0.3j, 0.1 + 1.3j]])


def suite_rank_probe(cfg: RunConfig) -> dict:
    if cfg.n not in RANK_PROBE_POINTS:
        raise ValueError("rank probe suite supports n = 2 or 3")
    budget = cfg.budget(min(cfg.tol, 1e-14))
    P = UpperHalfPoint.from_complex(RANK_PROBE_POINTS[cfg.n])
    full = 2 ** (cfg.n - 1)
    checks = []
    statuses = []
    for strategy in ("generic", "equal-determinant"):
        fam = build_t_family(P.Y, strategy)
        r = rank_probe(P, fam, budget=budget, q_max=cfg.q_max, guard_height=cfg.height)
        statuses.append(r.status)
        checks.append(_check(f"rank ({strategy})", r.rank, full, r.rank == full))
        checks.append(_check(f"smallest singular value ({strategy})", r.smallest_singular_value, 1e-6,
                             r.smallest_singular_value >= 1e-6))
    if cfg.n == 3:
        S = UpperHalfPoint.from_complex(SWAP_POINT)
        fam = build_t_family(S.Y, "generic")
        r = rank_probe(S, fam, budget=budget, q_max=min(cfg.q_max, 2), guard_height=0)
        drop = stabilizer_rank_drop(S, [[0, 1], [1, 0]], r.table)
        checks.append(_check("swap-stabilised rows (0,1/2) and (1/2,0) agree", drop, 1e-8, drop <= 1e-8))
        checks.append(_check("swap-stabilised rank below 4", r.rank, 4, r.rank < 4))
    status = "full" if all(s == "full" for s in statuses) else "inconclusive"
    return _report("rank-probe", cfg, checks, status)


SUITES = {
    "theta-id": suite_theta_id,
    "appendix": suite_appendix,
    "n3": suite_n3,
    "prop1": suite_prop1,
    "rank-probe": suite_rank_probe,
}


def run_suite(name: str, cfg: RunConfig | None = None) -> dict:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](cfg or RunConfig())
