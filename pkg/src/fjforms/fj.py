"""Fourier-Jacobi coefficients by quadrature, theta coefficients and rank probes.

If the first ``z_nn``-layer of a periodic ``F`` is ``sum_b phi_b(Zhat) Theta_{1,b}(Zhat, zhat)``,
Fourier orthogonality in ``x_hat = Re zhat`` and ``x_nn`` gives

    phi_a(Zhat) exp(-2 pi y_nn) Theta_{1,a}(2 Zhat, 0)
        = int F(Z) exp(-2 pi i x_nn) Theta_{1,a}(Zhat, -zhat) dx_hat dx_nn.

Only the terms with ``k + b = l + a`` survive the ``x_hat`` integral and the
imaginary parts of ``zhat`` cancel between the two theta factors, so the
normaliser does not depend on ``Im zhat``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .lattice import fsum_complex
from .poincare import CosetTruncation, enumerate_cosets, truncated_poincare
from .symmat import (
    HalfEvenMatrix,
    SymplecticElement,
    UnimodularMatrix,
    UpperHalfPoint,
    cocycle_det,
    numerical_rank,
)
from .theta import (
    ThetaChar,
    TruncationBudget,
    as_point,
    characteristics,
    pushforward_char,
    theta_eval,
    theta_eval_many,
)
from .unimod import TFamily, leading_exponent, orbit_sum, psi_eval

__all__ = [
    "PeriodicFunctionHandle",
    "CoefficientTable",
    "RefinementError",
    "RankProbeResult",
    "extract_phi",
    "extract_all_phi",
    "rank_probe",
    "psi_columns",
    "stabilizer_rank_drop",
    "fundamental_domain_guard",
]


class RefinementError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class PeriodicFunctionHandle:
    """A function on the upper half-space, 1-periodic in every real coordinate.

    ``evaluator`` maps an (N, n, n) complex stack to N values and must be safe to
    call concurrently.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    n: int

    def __call__(self, stack) -> np.ndarray:
        stack = np.asarray(stack, dtype=complex)
        if stack.ndim == 2:
            stack = stack[None]
        return np.asarray(self.evaluator(stack), dtype=complex).reshape(len(stack))

    @classmethod
    def theta_layers(cls, Zdim: int, coeffs: dict, budget: TruncationBudget = TruncationBudget()):
        """``F(Z) = sum_a c_a Theta_{1,a}(Zhat, zhat) exp(2 pi i z_nn)`` with constant ``c_a``."""
        d = Zdim - 1
        items = [(a if isinstance(a, ThetaChar) else ThetaChar(1, a), c) for a, c in coeffs.items()]

        def ev(stack):
            out = np.zeros(len(stack), dtype=complex)
            for groups in _by_zhat(stack):
                Zh = stack[groups[0], :d, :d]
                zs = stack[groups, :d, d]
                layer = np.exp(2j * math.pi * stack[groups, d, d])
                val = sum(c * theta_eval_many(a, Zh, zs, budget) for a, c in items)
                out[groups] = val * layer
            return out

        return cls(ev, Zdim)

    @classmethod
    def poincare(cls, T: HalfEvenMatrix, trunc: CosetTruncation | None = None,
                 budget: TruncationBudget = TruncationBudget(), relative: bool = True):
        """Truncated Poincare series; the identity-only truncation is ``G(T, Z)`` (vectorised)."""
        if trunc is None or len(trunc) == 1:
            return cls(lambda stack: orbit_sum(T.entries, stack, budget, relative=relative), T.n)

        def ev(stack):
            return np.array([
                truncated_poincare(T, as_point(Z), trunc=trunc, budget=budget, relative=relative).value
                for Z in stack
            ])

        return cls(ev, T.n)

    def periodicity_defect(self, rng, npts: int = 5, last_only: bool = False) -> float:
        """Max relative change under random integral symmetric translations.

        ``last_only`` restricts the translations to the last row and column (the
        variables of the Fourier-Jacobi expansion).
        """
        n = self.n
        worst = 0.0
        for _ in range(npts):
            X = rng.uniform(-0.5, 0.5, (n, n))
            A = rng.uniform(-0.3, 0.3, (n, n))
            Z = (X + X.T) / 2 + 1j * (A @ A.T + np.eye(n) * 1.5)
            S = rng.integers(-2, 3, (n, n))
            if last_only:
                S[:-1, :-1] = 0
            S = np.triu(S) + np.triu(S, 1).T
            v0, v1 = self(np.array([Z, Z + S]))
            worst = max(worst, abs(v1 - v0) / max(abs(v0), 1e-300))
        return worst


def _by_zhat(stack):
    d = stack.shape[1] - 1
    groups: dict[bytes, list[int]] = {}
    for i, Z in enumerate(stack):
        groups.setdefault(np.round(Z[:d, :d], 14).tobytes(), []).append(i)
    return [np.asarray(g) for g in groups.values()]


def _quadrature(F: PeriodicFunctionHandle, a: ThetaChar, P: UpperHalfPoint, yhat, ynn, grid,
                budget: TruncationBudget) -> complex:
    d = P.n
    xs = np.arange(grid) / grid
    nodes = np.array(list(itertools.product(xs, repeat=d + 1)))
    xhat, xnn = nodes[:, :d], nodes[:, d]
    zhat = xhat + 1j * np.asarray(yhat)[None, :]
    stack = np.empty((len(nodes), d + 1, d + 1), dtype=complex)
    stack[:, :d, :d] = P.Z
    stack[:, :d, d] = zhat
    stack[:, d, :d] = zhat
    stack[:, d, d] = xnn + 1j * ynn
    vals = F(stack)
    weights = theta_eval_many(a, P, -zhat, budget) * np.exp(-2j * math.pi * xnn)
    integral = fsum_complex(vals * weights) / len(nodes)
    norm = math.exp(-2 * math.pi * ynn) * theta_eval(a, UpperHalfPoint(2 * P.X, 2 * P.Y), np.zeros(d), budget)
    return integral / norm


def extract_phi(
    F: PeriodicFunctionHandle,
    a: ThetaChar,
    Zhat,
    yhat=None,
    ynn: float = 3.0,
    grid: int = 16,
    budget: TruncationBudget = TruncationBudget(),
    refine_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    max_grid: int = 64,
    check: bool = True,
) -> complex:
    """Theta coefficient ``phi_{1,a}(F)(Zhat)`` of the first Fourier-Jacobi layer.

    Trapezoid rule on the ``n``-torus; with ``check`` the grid is doubled until two
    successive values agree to ``refine_tol`` relative to their size or to ``abs_tol``.
    """
    if a.m != 1:
        raise ValueError("extraction is for index 1")
    if grid % 2:
        raise ValueError("grid must be even")
    P = as_point(Zhat)
    yhat = np.zeros(P.n) if yhat is None else np.asarray(yhat, dtype=float).reshape(P.n)
    val = _quadrature(F, a, P, yhat, ynn, grid, budget)
    if not check:
        return val
    while True:
        grid *= 2
        if grid > max_grid:
            raise RefinementError(f"quadrature did not settle below grid {max_grid}")
        new = _quadrature(F, a, P, yhat, ynn, grid, budget)
        if abs(new - val) <= max(refine_tol * abs(new), abs_tol):
            return new
        val = new


def extract_all_phi(F, Zhat, **kw) -> dict:
    P = as_point(Zhat)
    return {a: extract_phi(F, a, P, **kw) for a in characteristics(P.n, 1)}


# -- coefficient tables and rank -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    rows: tuple[ThetaChar, ...]
    cols: tuple[str, ...]
    values: np.ndarray
    rank_tol: float = 1e-8

    def __post_init__(self):
        if self.values.shape != (len(self.rows), len(self.cols)):
            raise ValueError("table shape does not match its labels")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("table has non-finite entries")

    def normalized(self) -> np.ndarray:
        """Columns scaled to unit norm (values span many orders of magnitude)."""
        norms = np.linalg.norm(self.values, axis=0)
        norms[norms == 0] = 1.0
        return self.values / norms

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.normalized(), compute_uv=False)

    def rank(self) -> int:
        return numerical_rank(self.normalized(), self.rank_tol)

    def row(self, a: ThetaChar) -> np.ndarray:
        return self.values[self.rows.index(a)]


def psi_columns(Zhat, members, budget: TruncationBudget = TruncationBudget(), relative: bool = True,
                min_eig: float = 3.0, scaled: bool = False) -> CoefficientTable:
    """Columns ``phi_{1,a}(G(T, .)) = 2 psi(a, T)`` for each ``(label, T)`` in ``members``.

    With ``scaled`` each column is multiplied by ``exp(2 pi s)``, ``s`` the smallest
    trace exponent of its terms, so entries stay representable for large ``T``.
    """
    P = as_point(Zhat)
    rows = tuple(characteristics(P.n, 1))
    vals = np.zeros((len(rows), len(members)), dtype=complex)
    for j, (_, T) in enumerate(members):
        s = leading_exponent(T, P) if scaled else 0.0
        for i, a in enumerate(rows):
            vals[i, j] = 2 * psi_eval(a, T, P, budget, min_eig=min_eig, relative=relative, shift=s)
    return CoefficientTable(rows, tuple(l for l, _ in members), vals)


def fundamental_domain_guard(Zhat, height_bound: int = 1) -> float:
    """Smallest ``|det(C Zhat + D)|`` over the truncated coset list (should be >= 1)."""
    P = as_point(Zhat)
    reps, _, _ = enumerate_cosets(P.n, height_bound)
    return min(abs(cocycle_det(M, P)) for M in reps)


@dataclass(frozen=True, eq=False)
class RankProbeResult:
    table: CoefficientTable
    rank: int
    q: int
    singular_values: np.ndarray
    status: str
    profiles: dict = field(default_factory=dict)

    @property
    def smallest_singular_value(self) -> float:
        return float(self.singular_values.min())


def rank_probe(
    Zhat,
    family: TFamily,
    r: int | None = None,
    trunc: CosetTruncation | None = None,
    budget: TruncationBudget = TruncationBudget(),
    q_max: int = 3,
    sv_floor: float = 1e-6,
    guard_height: int = 1,
    route: str = "psi",
    extract_kw: dict | None = None,
) -> RankProbeResult:
    """Rank of the theta-coefficient table over the family, best over ``q = 1..q_max``.

    ``route="psi"`` uses the orbit-sum closed form of the identity coset;
    ``route="extract"`` runs the quadrature on the truncated Poincare series.
    """
    P = as_point(Zhat)
    if not 1 <= P.n <= 3:
        raise ValueError("rank probe supports n in {2, 3, 4}")
    if guard_height > 0:
        g = fundamental_domain_guard(P, guard_height)
        if g < 1 - 1e-12:
            raise ValueError(f"Zhat fails the fundamental-domain guard (min |det| = {g:.4f})")
    best = None
    profiles = {}
    for q in range(1, q_max + 1):
        members = family.members(q)
        if route == "psi":
            table = psi_columns(P, members, budget, scaled=True)
        elif route == "extract":
            cols = []
            for _, T in members:
                F = PeriodicFunctionHandle.poincare(T, trunc, budget)
                phi = extract_all_phi(F, P, budget=budget, **(extract_kw or {}))
                cols.append([phi[a] for a in characteristics(P.n, 1)])
            table = CoefficientTable(tuple(characteristics(P.n, 1)), tuple(l for l, _ in members),
                                     np.array(cols).T)
        else:
            raise ValueError(f"unknown route {route!r}")
        sv = table.singular_values()
        profiles[q] = sv
        if best is None or sv.min() > best[1].min():
            best = (q, sv, table)
    q, sv, table = best
    rank = table.rank()
    full = rank == len(table.rows) and sv.min() >= sv_floor
    return RankProbeResult(table, rank, q, sv, "full" if full else "inconclusive", profiles)


def stabilizer_rank_drop(Zhat, Uhat, table: CoefficientTable, tol: float = 1e-12) -> float:
    """Max over columns of ``|row_a - row_b|`` with ``b = Uhat a``, relative to the column size."""
    P = as_point(Zhat)
    U = Uhat if isinstance(Uhat, UnimodularMatrix) else UnimodularMatrix(Uhat)
    Ua = U.array.astype(float)
    if np.abs(Ua.T @ P.Z @ Ua - P.Z).max() > tol * max(1.0, np.abs(P.Z).max()):
        raise ValueError("Uhat does not stabilize Zhat")
    V = table.normalized()
    worst = 0.0
    for i, a in enumerate(table.rows):
        j = table.rows.index(pushforward_char(a, U))
        worst = max(worst, float(np.abs(V[i] - V[j]).max()))
    return worst
