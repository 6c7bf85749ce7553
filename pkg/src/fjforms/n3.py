"""Degree three: theta coefficients of index-1 Jacobi forms on H_2 x C^2.

Write ``Zhat = [[z11, z12], [z12, z22]]``.  The first ``z22``-layer of a theta
coefficient ``phi_a`` is

    a2 = 0:    psi_{a,1}(z11, z12) exp(2 pi i z22),
               psi_{a,1} = psi_{a,1,1} Th_0(z11, z12) + psi_{a,1,2} Th_{1/2}(z11, z12)
    a2 = 1/2:  psi_{a,1}(z11, z12) exp(3/2 pi i z22),
               psi_{(0,1/2),1}   = sum_j psi_{(0,1/2),1,j+1} Th_{j/3}(3 z11, 3/2 z12)
               psi_{(1/2,1/2),1} = sum_j psi_{(1/2,1/2),1,j+1} Th_{(2j+1)/6}(3 z11, 3/2 z12) exp(-pi i z11 / 6)

with ``Th_b`` the index-1 theta function in one variable.  ``Th_b(3 t, 3/2 z)``
equals the index-3 theta ``Th_{3,b}(t, z/2)``, so thirds and sixths are ordinary
characteristics of index 3.

Each coefficient is recovered by mode matching: over ``x12`` in ``[0, 2)`` the
products ``Th_b(t, z) Th_b(t, -z)`` keep only their diagonal terms, which sum to
``Th_b(2t, 0)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .lattice import DEFAULT_CAP, fsum_complex, radius_for_tail
from .symmat import HalfEvenMatrix
from .theta import ThetaChar, TruncationBudget, theta_eval, theta_eval_many
from .unimod import _leading_exponent, enumerate_bounded, orbit_sum

__all__ = [
    "HALF",
    "CHARS",
    "PsiProfile",
    "JacobiIndexOneForm",
    "GtildeResult",
    "th1",
    "th3",
    "psi_layer",
    "extract_psi_profile",
    "synthetic_phi",
    "gtilde_phi",
    "SiegelLayerSource",
    "fj_symmetry_residual",
    "delta_eval",
    "delta_full_symmetry",
    "gtilde_counterexample",
    "gtilde_oracle",
    "crossing_weight",
    "default_z11_grid",
    "GTILDE_T",
]

HALF = Fraction(1, 2)
CHARS = [(Fraction(0), Fraction(0)), (HALF, Fraction(0)), (Fraction(0), HALF), (HALF, HALF)]
GTILDE_T = HalfEvenMatrix(((1, HALF, 0), (HALF, 1, 0), (0, 0, 1)))
HEX = ((Fraction(1), HALF), (HALF, Fraction(1)))

PhiMap = Callable[[tuple, np.ndarray], np.ndarray]


def _label(a) -> str:
    return "(" + ",".join(str(Fraction(x)) for x in a) + ")"


def default_z11_grid(npts: int = 8) -> np.ndarray:
    """Vertical line ``0.3 + i [1, 2.5]``."""
    return 0.3 + 1j * np.linspace(1.0, 2.5, npts)


def th1(b, tau, z, budget: TruncationBudget = TruncationBudget()) -> complex:
    """One-variable index-1 theta ``sum_m exp(2 pi i (m+b)^2 tau + 4 pi i (m+b) z)``."""
    return theta_eval(ThetaChar(1, (b,)), [[tau]], [z], budget)


def th3(b, tau, z, budget: TruncationBudget = TruncationBudget()) -> complex:
    """``Th_b(3 tau, 3/2 z)`` for ``b`` in ``(1/6)Z``, as an index-3 theta at ``(tau, z/2)``."""
    return theta_eval(ThetaChar(3, (b,)), [[tau]], [z / 2], budget)


def _th_many(m, b, tau, zs, budget):
    return theta_eval_many(ThetaChar(m, (b,)), [[tau]], np.asarray(zs)[:, None], budget)


# -- layer extraction ------------------------------------------------------------------------


def _stack(z11, x12, y12, x22, y22):
    X12, X22 = np.meshgrid(x12, x22, indexing="ij")
    S = np.empty(X12.shape + (2, 2), dtype=complex)
    S[..., 0, 0] = z11
    S[..., 0, 1] = S[..., 1, 0] = X12 + 1j * y12
    S[..., 1, 1] = X22 + 1j * y22
    return S.reshape(-1, 2, 2), X12.shape


def psi_layer(phi: PhiMap, a, z11, z12s, y22: float = 3.0, grid: int = 16) -> np.ndarray:
    """``psi_{a,1}(z11, z12)`` for each ``z12`` by trapezoid quadrature in ``x22``.

    For ``a2 = 1/2`` the layer frequency is 3/4 in ``x22``; multiplying by
    ``exp(-3/2 pi i x22)`` makes the integrand 1-periodic again.
    """
    z12s = np.asarray(z12s, dtype=complex)
    kappa = 1.0 if a[1] == 0 else 0.75
    x22 = np.arange(grid) / grid
    out = np.empty(len(z12s), dtype=complex)
    for i, z12 in enumerate(z12s):
        S, shape = _stack(z11, np.array([z12.real]), z12.imag, x22, y22)
        vals = np.asarray(phi(a, S), dtype=complex)
        out[i] = fsum_complex(vals * np.exp(-2j * math.pi * kappa * x22)) / grid
    return out * math.exp(2 * math.pi * kappa * y22)


def _layer_grid(phi, a, z11, y12, y22, n12, n22):
    """``psi_{a,1}(z11, x12 + i y12)`` on ``x12 = 2 k / n12``, k < n12."""
    kappa = 1.0 if a[1] == 0 else 0.75
    x12 = 2 * np.arange(n12) / n12
    x22 = np.arange(n22) / n22
    S, shape = _stack(z11, x12, y12, x22, y22)
    vals = np.asarray(phi(a, S), dtype=complex).reshape(shape)
    w = np.exp(-2j * math.pi * kappa * x22)
    layer = np.array([fsum_complex(row * w) for row in vals]) / n22
    return x12 + 1j * y12, layer * math.exp(2 * math.pi * kappa * y22)


def _split(z11, z12, layer, basis, budget):
    """Mode matching of ``layer(z12)`` against ``[(m, b, scale, phase)]``.

    Basis functions are ``phase * Th_{m,b}(z11, scale * z12)``; duals flip the sign
    of ``z12`` and the normalisers are ``Th_{m,b}(2 z11, 0)``.
    """
    out = []
    for m, b, scale, phase in basis:
        dual = _th_many(m, b, z11, -scale * z12, budget)
        norm = theta_eval(ThetaChar(m, (b,)), [[2 * z11]], [0], budget)
        out.append(fsum_complex(layer * dual) / len(z12) / (norm * phase))
    return out


def _bases(a, z11):
    if a[1] == 0:
        return [(1, Fraction(0), 1.0, 1.0), (1, HALF, 1.0, 1.0)]
    if a[0] == 0:
        return [(3, Fraction(j, 3), 0.5, 1.0) for j in range(3)]
    ph = np.exp(-1j * math.pi * z11 / 6)
    return [(3, Fraction(2 * j + 1, 6), 0.5, ph) for j in range(3)]


@dataclass(frozen=True, eq=False)
class PsiProfile:
    """Coefficient functions ``psi_{a,1,j}`` sampled on a ``z11`` grid.

    ``values`` is keyed ``"(a1,a2),j"``.  The primary six are the ``j = 1, 2``
    functions for ``a`` in ``(0,0), (1/2,0), (0,1/2)``; the extracted
    ``(0,1/2),3`` and ``(1/2,1/2),j`` are kept for the closure checks.
    """

    z11: np.ndarray
    values: dict
    provenance: str = "unknown"

    PRIMARY = ("(0,0),1", "(0,0),2", "(1/2,0),1", "(1/2,0),2", "(0,1/2),1", "(0,1/2),2")

    def __getitem__(self, key) -> np.ndarray:
        return self.values[key]

    def closure_residual(self) -> float:
        """Max of ``|psi_{(1/2,1/2),1,j} - psi_{(0,1/2),1,s(j)} exp(pi i z11 / 6)|`` with ``s = (3, 1, 2)``."""
        ph = np.exp(1j * math.pi * self.z11 / 6)
        pairs = [("(1/2,1/2),1", "(0,1/2),3"), ("(1/2,1/2),2", "(0,1/2),1"), ("(1/2,1/2),3", "(0,1/2),2")]
        return max(float(np.abs(self[h] - self[z] * ph).max()) for h, z in pairs)

    def parity_residual(self) -> float:
        """``|psi_{(0,1/2),1,2} - psi_{(0,1/2),1,3}|`` (forced by ``z12 -> -z12``)."""
        return float(np.abs(self["(0,1/2),2"] - self["(0,1/2),3"]).max())

    def scale(self) -> float:
        return max(float(np.abs(v).max()) for v in self.values.values())


def extract_psi_profile(
    phi: PhiMap,
    z11_grid=None,
    y12: float = 0.0,
    y22: float = 3.0,
    grid: int = 16,
    budget: TruncationBudget = TruncationBudget(),
    provenance: str = "unknown",
) -> PsiProfile:
    """Recover all ``psi_{a,1,j}(z11)`` from the theta coefficients ``phi_a``.

    ``phi(a, stack)`` evaluates ``phi_a`` on an (N, 2, 2) stack of ``Zhat``.  The
    ``x12`` grid has ``2 * grid`` nodes on ``[0, 2)``.
    """
    if y22 < 3.0 - 1e-12:
        raise ValueError("y22 must be at least 3 so that higher z22-layers stay negligible")
    z11_grid = default_z11_grid() if z11_grid is None else np.asarray(z11_grid, dtype=complex)
    values: dict[str, list] = {}
    for z11 in z11_grid:
        for a in CHARS:
            z12, layer = _layer_grid(phi, a, z11, y12, y22, 2 * grid, grid)
            coeffs = _split(z11, z12, layer, _bases(a, z11), budget)
            for j, c in enumerate(coeffs, start=1):
                values.setdefault(f"{_label(a)},{j}", []).append(c)
    return PsiProfile(z11_grid, {k: np.array(v) for k, v in values.items()}, provenance)


# -- sources -----------------------------------------------------------------------------------


def synthetic_phi(psi: dict, z11_grid, higher: float = 0.0) -> PhiMap:
    """Theta coefficients assembled from prescribed ``psi_{a,1,j}`` values per ``z11``.

    ``psi`` maps ``"(a1,a2),j"`` to arrays over ``z11_grid`` (missing keys are 0).
    ``higher`` adds that multiple of the next layer ``exp(2 pi i z22) x layer`` as
    a distractor.
    """
    z11_grid = np.asarray(z11_grid, dtype=complex)

    def phi(a, stack):
        out = np.zeros(len(stack), dtype=complex)
        for i, Zh in enumerate(stack):
            z11, z12, z22 = Zh[0, 0], Zh[0, 1], Zh[1, 1]
            k = int(np.argmin(np.abs(z11_grid - z11)))
            total = 0j
            for j, (m, b, scale, ph) in enumerate(_bases(a, z11), start=1):
                c = psi.get(f"{_label(a)},{j}")
                if c is None:
                    continue
                total += c[k] * ph * theta_eval(ThetaChar(m, (b,)), [[z11]], [scale * z12])
            kappa = 1.0 if a[1] == 0 else 0.75
            e = np.exp(2j * math.pi * kappa * z22)
            out[i] = total * e * (1 + higher * np.exp(2j * math.pi * z22))
        return out

    return phi


def gtilde_phi(budget: TruncationBudget = TruncationBudget(1e-13)) -> PhiMap:
    """Theta coefficients of ``G~(T, Z)``: the GL(2, Z) sum for ``(0,0)``, zero otherwise."""

    def phi(a, stack):
        if any(a):
            return np.zeros(len(stack), dtype=complex)
        return orbit_sum(HEX, stack, budget, relative=True)

    return phi


class SiegelLayerSource:
    """Theta coefficients of the first ``z33``-layer of the full sum ``G(T, Z)`` over GL(3, Z).

    Writing ``P = U T U^t = [[Phat, p], [p^t, 1]]``, translations move ``p`` by
    integer vectors, so taking ``p = a`` exactly picks one term per orbit:

        phi_a(Zhat) = sum_{U : P_33 = 1, p = a} exp(2 pi i tr((Phat - a a^t) Zhat)).

    The sum is enumerated with ``tr(T U^t Y3 U) <= B`` where
    ``Y3 = [[Yhat, -Yhat a], [-a^t Yhat, a^t Yhat a + y33]]`` turns the admissible
    terms into ``tr((Phat - a a^t) Yhat) + y33``.
    """

    def __init__(self, T: HalfEvenMatrix = GTILDE_T, budget: TruncationBudget = TruncationBudget(),
                 y33: float = 1.0, cap: int = DEFAULT_CAP):
        if T.n != 3:
            raise ValueError("degree three only")
        self.T = T
        self.Tf = T.array
        self.budget = budget
        self.y33 = y33
        self.cap = cap
        self._cache: dict = {}

    def _terms(self, a, Yhat):
        key = (tuple(a), np.round(Yhat, 14).tobytes())
        if key in self._cache:
            return self._cache[key]
        av = np.array([float(x) for x in a])
        Y3 = np.zeros((3, 3))
        Y3[:2, :2] = Yhat
        Y3[:2, 2] = Y3[2, :2] = -Yhat @ av
        Y3[2, 2] = av @ Yhat @ av + self.y33
        lam = float(np.linalg.eigvalsh(self.Tf).min() * np.linalg.eigvalsh(Y3).min())
        s0 = _leading_exponent(self.Tf, Y3, None, self.cap) - self.y33
        # tail over all U, times exp(2 pi y33), below tol * exp(-2 pi s0)
        B = radius_for_tail(9, lam, self.budget.tol, 2 * math.pi, log_prefactor=2 * math.pi * (self.y33 + s0))
        U = enumerate_bounded(self.Tf, Y3, B, cap=self.cap).arrays.astype(float)
        P = np.einsum("nik,kl,njl->nij", U, self.Tf, U, optimize=False)
        keep = (np.abs(P[:, 2, 2] - 1) < 1e-9) & np.all(np.abs(P[:, :2, 2] - av) < 1e-9, axis=1)
        Q = P[keep][:, :2, :2] - np.outer(av, av)
        self._cache[key] = Q.reshape(len(Q), -1)
        return self._cache[key]

    def __call__(self, a, stack) -> np.ndarray:
        stack = np.asarray(stack, dtype=complex)
        out = np.zeros(len(stack), dtype=complex)
        groups: dict[bytes, list[int]] = {}
        for i, Zh in enumerate(stack):
            groups.setdefault(np.round(Zh.imag, 14).tobytes(), []).append(i)
        for idx in groups.values():
            Q = self._terms(a, stack[idx[0]].imag)
            if len(Q) == 0:
                continue
            s = stack[idx].reshape(len(idx), -1) @ Q.T
            for i, row in zip(idx, np.exp(2j * math.pi * s)):
                out[i] = fsum_complex(row)
        return out


@dataclass(frozen=True, eq=False)
class JacobiIndexOneForm:
    """``Phi(Zhat, zhat) = sum_a phi_a(Zhat) Theta_{1,a}(Zhat, zhat)``."""

    phi: PhiMap
    provenance: str = "free-jacobi"
    budget: TruncationBudget = TruncationBudget()

    def __call__(self, Zhat, zhat) -> complex:
        Zh = np.asarray(Zhat, dtype=complex)
        total = []
        for a in CHARS:
            c = complex(self.phi(a, Zh[None])[0])
            if c != 0:
                total.append(c * theta_eval(ThetaChar(1, a), Zh, zhat, self.budget))
        return fsum_complex(total) if total else 0j

    def invariance_defect(self, rng, npts: int = 3) -> float:
        """Relative defect under integral translations, the shear and ``diag(1, -1)``."""
        shear = np.array([[1, 1], [0, 1]])
        flip = np.diag([1, -1])
        worst = 0.0
        for _ in range(npts):
            X = rng.uniform(-0.5, 0.5, (2, 2))
            Zh = (X + X.T) / 2 + 1j * np.array([[1.2, 0.1], [0.1, 3.0]])
            z = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.2, 0.2, 2)
            v0 = self(Zh, z)
            S = rng.integers(-2, 3, (2, 2))
            S = np.triu(S) + np.triu(S, 1).T
            mu = rng.integers(-2, 3, 2)
            moved = [self(Zh + S, z), self(Zh, z + mu)]
            for V in (shear, flip):
                moved.append(self(V.T @ Zh @ V, V.T @ z))
            for v in moved:
                worst = max(worst, abs(v - v0) / max(abs(v0), 1e-300))
        return worst


# -- symmetry checks ----------------------------------------------------------------------------


def fj_symmetry_residual(profile: PsiProfile, normalizer=None) -> float:
    """``max |psi_{(0,0),1,2} - psi_{(1/2,0),1,1}|`` over the grid, optionally divided pointwise."""
    diff = np.abs(profile["(0,0),2"] - profile["(1/2,0),1"])
    if normalizer is not None:
        diff = diff / np.abs(normalizer)
    return float(diff.max())


def delta_eval(psi: dict, z11, z12, z13, z23, budget: TruncationBudget = TruncationBudget()) -> complex:
    """The first ``z22``-layer ``Delta`` assembled from the coefficient values at one ``z11``.

    ``psi`` needs ``"(0,0),1"``, ``"(0,0),2"``, ``"(1/2,0),1"``, ``"(1/2,0),2"``,
    ``"(0,1/2),1"``, ``"(0,1/2),2"``; ``"(0,1/2),3"`` defaults to ``"(0,1/2),2"``.
    """
    g = lambda k: psi.get(k, 0)
    t = lambda b, z: th1(b, z11, z, budget)
    s = lambda b, z: th3(b, z11, z, budget)
    h = HALF
    out = (g("(0,0),1") * t(0, z12) + g("(0,0),2") * t(h, z12)) * t(0, z13)
    out += (g("(1/2,0),1") * t(0, z12) + g("(1/2,0),2") * t(h, z12)) * t(h, z13)
    p1, p2 = g("(0,1/2),1"), g("(0,1/2),2")
    p3 = psi.get("(0,1/2),3", p2)
    ep, em = np.exp(2j * math.pi * z23), np.exp(-2j * math.pi * z23)
    A = p1 * s(0, z12) + p2 * s(Fraction(1, 3), z12) + p3 * s(Fraction(2, 3), z12)
    out += A * (t(0, z13 + z12 / 2) * ep + t(0, z13 - z12 / 2) * em)
    B = p1 * s(Fraction(3, 6), z12) + p3 * s(Fraction(1, 6), z12) + p2 * s(Fraction(5, 6), z12)
    out += B * (t(h, z13 + z12 / 2) * ep + t(h, z13 - z12 / 2) * em)
    return complex(out)


def delta_full_symmetry(psi: dict, z11, z12, z13, z23, budget: TruncationBudget = TruncationBudget()) -> float:
    """``|Delta(z11, z12, z13, z23) - Delta(z11, z13, z12, z23)|``."""
    if z12 == z13:
        return 0.0
    return abs(delta_eval(psi, z11, z12, z13, z23, budget) - delta_eval(psi, z11, z13, z12, z23, budget))


# -- the counterexample --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GtildeResult:
    z11: np.ndarray
    psi_002: np.ndarray
    psi_half_011: np.ndarray
    exponent: float
    prefactor: complex
    oracle_exponent: float
    oracle_prefactor: complex
    profile: PsiProfile = field(repr=False, default=None)

    def witness(self) -> float:
        """Symmetry residual divided by ``|exp(i c z11)|`` with the fitted ``c``."""
        return fj_symmetry_residual(self.profile, np.exp(1j * self.exponent * self.z11))

    def prefactor_error(self, expected: float = 12.0) -> float:
        return float(np.abs(self.psi_002 / np.exp(1j * self.exponent * self.z11) - expected).max())


def _fit_exponent(z11, values):
    """Fit ``values = A exp(i c z11)``: least squares in ``log`` along the grid."""
    z11 = np.asarray(z11)
    logs = np.log(np.asarray(values, dtype=complex))
    # unwrap the phase along the grid before fitting
    ph = np.unwrap(logs.imag)
    L = logs.real + 1j * ph
    M = np.column_stack([np.ones(len(z11)), 1j * z11])
    coef, *_ = np.linalg.lstsq(M, L, rcond=None)
    c = coef[1]
    return float(c.real), complex(np.exp(coef[0]))


def gtilde_counterexample(
    T: HalfEvenMatrix = GTILDE_T,
    z11_grid=None,
    y22: float = 3.0,
    grid: int = 16,
    budget: TruncationBudget = TruncationBudget(1e-13),
    oracle_entries: int = 8,
) -> GtildeResult:
    """Profile of ``G~(T, Z)``, the fitted ``z11``-exponent and the brute-force cross-check."""
    if T.entries != GTILDE_T.entries:
        raise ValueError("the counterexample is stated for T = [[1, 1/2, 0], [1/2, 1, 0], [0, 0, 1]]")
    z11_grid = default_z11_grid() if z11_grid is None else np.asarray(z11_grid, dtype=complex)
    if np.any(z11_grid.imag < 1 - 1e-12):
        raise ValueError("z11 grid needs Im z11 >= 1")
    prof = extract_psi_profile(gtilde_phi(budget), z11_grid, y22=y22, grid=grid, budget=budget,
                               provenance="free-jacobi")
    c, A = _fit_exponent(z11_grid, prof["(0,0),2"])
    oc, oA = gtilde_oracle(z11_grid[[0, -1]], entries=oracle_entries)
    return GtildeResult(z11_grid, prof["(0,0),2"], prof["(1/2,0),1"], c, A, oc, oA, prof)


def gtilde_oracle(z11_pair, z12: complex = 0.13 + 0.07j, entries: int = 8):
    """Exponent and prefactor of the ``z22``-layer from a direct sum over GL(2, Z) with small entries.

    The layer ``L(z11, z12)`` collects ``U`` with ``(U T U^t)_22 = 1``; the ratio
    ``L / Th_{1/2}(z11, z12)`` at two values of ``z11`` fixes ``A exp(i c z11)``.
    """
    r = np.arange(-entries, entries + 1)
    U = np.array(list(itertools.product(r, repeat=4)), dtype=np.int64).reshape(-1, 2, 2)
    det = U[:, 0, 0] * U[:, 1, 1] - U[:, 0, 1] * U[:, 1, 0]
    U = U[np.abs(det) == 1].astype(float)
    Th = np.array([[1.0, 0.5], [0.5, 1.0]])
    P = np.einsum("nik,kl,njl->nij", U, Th, U)
    P = P[np.abs(P[:, 1, 1] - 1) < 1e-12]
    ratios = []
    for z11 in z11_pair:
        L = fsum_complex(np.exp(2j * math.pi * (P[:, 0, 0] * z11 + 2 * P[:, 0, 1] * z12)))
        ratios.append(L / th1(HALF, z11, z12))
    z_a, z_b = z11_pair
    c = np.log(ratios[0] / ratios[1]) / (1j * (z_a - z_b))
    A = ratios[0] / np.exp(1j * c * z_a)
    return float(c.real), complex(A)


def crossing_weight(witness: float, coset_count: float, gl_bound: float, y22: float, y33: float,
                    det_floor: float = 2.0, start: int = 8) -> int:
    """Smallest even ``r >= start`` with ``count * det_floor^-r * bound * exp(2 pi (y22 + y33)) < witness``.

    This is the weight from which the non-identity coset terms, each at most
    ``det_floor^-r`` times the GL-sum bound, can no longer hide the witness
    after the ``exp(2 pi y)`` rescalings of the two layer extractions.
    """
    scale = coset_count * gl_bound * math.exp(2 * math.pi * (y22 + y33))
    r = start
    while scale * det_floor ** (-r) >= witness:
        r += 2
    return r
