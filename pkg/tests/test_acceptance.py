"""Acceptance criteria 1-10, one test each; the terminal summary lists PASS/FAIL per criterion."""

import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from fjforms import n3
from fjforms.fj import rank_probe, stabilizer_rank_drop
from fjforms.symmat import HalfEvenMatrix, UpperHalfPoint
from fjforms.theta import ThetaChar, TruncationBudget, theta_eval
from fjforms.unimod import build_t_family, g1_decomposition, psi_eval
from fjforms.verify import (
    RANK_PROBE_POINTS,
    SWAP_POINT,
    RunConfig,
    _theta_law_checks,
    _transformation_checks,
    appendix_classes_check,
    delta_b_residuals,
    detgrowth_checks,
    random_theta_point,
    theta_box_oracle,
)

from .conftest import ACCEPTANCE

H = Fraction(1, 2)


def record(k, ok, desc, detail):
    ACCEPTANCE[k] = (bool(ok), desc, detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {desc}  [{detail}]")
    return ok


def test_criterion_01_theta_oracle():
    rng = np.random.default_rng(1)
    worst, elapsed = 0.0, 0.0
    for d in (1, 2, 3):
        for _ in range(100):
            Z, z = random_theta_point(d, rng)
            c = ThetaChar(1, tuple(Fraction(int(x), 2) for x in rng.integers(0, 2, d)))
            t0 = time.perf_counter()
            v = theta_eval(c, Z, z)
            elapsed += time.perf_counter() - t0
            worst = max(worst, abs(v - theta_box_oracle(c, Z, z, 10 if d < 3 else 7)))
    ok = worst <= 1e-12 and elapsed <= 10.0
    assert record(1, ok, "theta_eval vs box oracle, 100 points per dimension",
                  f"max err {worst:.2e} <= 1e-12, {elapsed:.2f} s <= 10 s")


def test_criterion_02_theta_laws():
    cfg = RunConfig()
    checks = _theta_law_checks(cfg, np.random.default_rng(2), 50)
    detail = ", ".join(f"{c['name'].split(' (')[0]} {c['value']:.1e}" for c in checks)
    assert record(2, all(c["pass"] for c in checks), "translation, parity, pushforward <= 2 tol (50 cases)", detail)


def test_criterion_03_transformation_matrix():
    checks = _transformation_checks(RunConfig(), np.random.default_rng(3), count=5)
    worst = max(c["value"] for c in checks)
    assert record(3, all(c["pass"] for c in checks), "transformation matrix unitary and sample-independent",
                  f"max defect {worst:.1e} <= 1e-6 over Gamma_1, Gamma_2")


def test_criterion_04_g1_decomposition():
    tol = 1e-20
    budget = TruncationBudget(tol)
    rng = np.random.default_rng(4)
    worst = 0.0
    for n, That in ((2, [[3]]), (3, [[4, 1], [1, 4]])):
        d = n - 1
        for t1n in (H, 0):
            T = HalfEvenMatrix.jacobi_normal(That, t1n)
            for _ in range(10):
                Z, _ = random_theta_point(d, rng)
                z = rng.uniform(-0.5, 0.5, d) + 1j * rng.uniform(-0.2, 0.2, d)
                direct, dec = g1_decomposition(T, Z, z, budget)
                worst = max(worst, abs(direct - dec) / (3 * tol))
    closed = 0.0
    for _ in range(10):
        t = int(rng.integers(3, 6))
        z = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(0.8, 1.5)
        p0 = psi_eval(ThetaChar(1, (0,)), HalfEvenMatrix.jacobi_normal([[t]], 0), [[z]], budget)
        ph = psi_eval(ThetaChar(1, (H,)), HalfEvenMatrix.jacobi_normal([[t]], H), [[z]], budget)
        closed = max(closed, abs(p0 - 2 * np.exp(2j * math.pi * t * z)) / tol,
                     abs(ph - 2 * np.exp(2j * math.pi * t * z - 0.5j * math.pi * z)) / tol)
    ok = worst <= 1 and closed <= 1
    assert record(4, ok, "g1 = 2 sum_a psi_a Theta_a (n = 2, 3) and n = 2 closed forms",
                  f"max |diff|/(3 tol) {worst:.2e}, closed forms |diff|/tol {closed:.2e}, tol 1e-20")


def test_criterion_05_appendix():
    t0 = time.perf_counter()
    matched, total, inv = appendix_classes_check()
    elapsed = time.perf_counter() - t0
    res = delta_b_residuals(np.random.default_rng(5), 50)
    worst = max(res.values())
    ok = matched == total == 72 and inv and elapsed < 1.0 and worst <= 1e-10
    assert record(5, ok, "72 congruence classes with exact equality; Delta_b symmetric",
                  f"{matched}/{total} in {elapsed:.3f} s, Delta_b residual {worst:.1e} <= 1e-10")


def test_criterion_06_gtilde_witness():
    g = n3.gtilde_counterexample()
    van = float(np.abs(g.psi_half_011).max())
    pre = g.prefactor_error(12.0)
    dexp = abs(g.exponent - g.oracle_exponent)
    ok = van <= 1e-10 and pre <= 1e-6 and dexp <= 1e-6
    assert record(6, ok, "G~: psi_(1/2,0),1,1 = 0 and psi_(0,0),1,2 = 12 exp(i c z11)",
                  f"|psi_(1/2,0),1,1| {van:.1e}, prefactor err {pre:.1e}, fitted c = {g.exponent / math.pi:.12f} pi, "
                  f"oracle c = {g.oracle_exponent / math.pi:.12f} pi")


def test_criterion_07_det_growth():
    rng = np.random.default_rng(7)
    details, ok = [], True
    for n in (2, 3):
        inc, spread, const = detgrowth_checks(rng, n, count=20)
        ok &= inc == 20 and spread <= 0.1 and const <= 1e-12
        details.append(f"n={n}: {inc}/20 increasing, ratio spread {spread:.1e}, Klingen spread {const:.1e}")
    assert record(7, ok, "|det(CZ+D)| grows with y_nn unless C_in = 0", "; ".join(details))


def test_criterion_08_rank_probe():
    t0 = time.perf_counter()
    budget = TruncationBudget(1e-14)
    parts, ok = [], True
    for n in (2, 3):
        P = UpperHalfPoint.from_complex(RANK_PROBE_POINTS[n])
        for strategy in ("generic", "equal-determinant"):
            r = rank_probe(P, build_t_family(P.Y, strategy), budget=budget)
            full = r.rank == 2 ** (n - 1) and r.smallest_singular_value >= 1e-6
            # an inconclusive status with its profile is an allowed outcome
            ok &= full or (r.status == "inconclusive" and bool(r.profiles))
            parts.append(f"n={n} {strategy}: rank {r.rank}, min sv {r.smallest_singular_value:.2e}, {r.status}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 300
    assert record(8, ok, "full-rank probe at the documented points", "; ".join(parts) + f"; {elapsed:.1f} s")


def test_criterion_09_swap_rank_drop():
    S = UpperHalfPoint.from_complex(SWAP_POINT)
    r = rank_probe(S, build_t_family(S.Y), budget=TruncationBudget(1e-14), q_max=2, guard_height=0)
    drop = stabilizer_rank_drop(S, [[0, 1], [1, 0]], r.table)
    ok = drop <= 1e-8 and r.rank < 4
    assert record(9, ok, "swap-stabilised point: rows (0,1/2), (1/2,0) agree, rank < 4",
                  f"row difference {drop:.1e} <= 1e-8, rank {r.rank}")


def _verify(suite, threads, seed=11):
    env = dict(os.environ, OMP_NUM_THREADS=str(threads), OPENBLAS_NUM_THREADS=str(threads),
               MKL_NUM_THREADS=str(threads))
    out = subprocess.run([sys.executable, "-m", "fjforms", "verify", suite, "--seed", str(seed)],
                         capture_output=True, env=env, check=False)
    return out.returncode, out.stdout


def test_criterion_10_determinism():
    suites = ["theta-id", "appendix", "prop1", "rank-probe", "n3"]
    same, codes = [], []
    for s in suites:
        c1, a = _verify(s, 1)
        _, b = _verify(s, 4)
        _, c = _verify(s, 4)
        same.append(a == b == c and len(a) > 0)
        codes.append(c1)
    ok = all(same)
    assert record(10, ok, "verify reports byte-identical across runs and thread counts",
                  ", ".join(f"{s}: {'same' if x else 'DIFF'} (exit {c})" for s, x, c in zip(suites, same, codes)))
