"""Theta functions with characteristics.

    Theta_{m,a}(Zhat, zhat) = sum_{k in Z^d} exp(2 pi i m (k+a)^t Zhat (k+a) + 4 pi i m (k+a)^t zhat)

Sums are truncated to an ellipsoid chosen from a certified Gaussian tail bound.
Writing ``y = Im zhat`` and ``c = Yhat^{-1} y``, every term has modulus
``exp(-2 pi m [(v + c)^t Yhat (v + c) - y^t Yhat^{-1} y])`` with ``v = k + a``,
so the ellipsoid is centred at ``-(a + c)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .lattice import TruncationError, ellipsoid_points, fsum_complex, gaussian_tail, radius_for_tail
from .symmat import SymplecticElement, UnimodularMatrix, UpperHalfPoint, symplectic_action

__all__ = [
    "ThetaChar",
    "TruncationBudget",
    "ThetaValue",
    "TransformationResult",
    "IllConditionedSamples",
    "characteristics",
    "theta_eval",
    "theta_eval_full",
    "theta_eval_many",
    "theta_translation_check",
    "theta_pushforward_check",
    "theta_transformation_matrix",
    "sqrt_det_branch",
    "as_point",
]

MAX_INDEX = 4


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ThetaChar:
    """Index ``m`` and characteristic ``a`` reduced to ``[0, 1)``, denominators dividing 2m."""

    m: int
    a: tuple[Fraction, ...]

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or not 1 <= self.m <= MAX_INDEX:
            raise ValueError(f"index m must be an integer in [1, {MAX_INDEX}], got {self.m}")
        a = tuple(_frac(x) % 1 for x in np.atleast_1d(np.asarray(self.a, dtype=object)))
        for x in a:
            if (2 * self.m * x).denominator != 1:
                raise ValueError(f"characteristic entry {x} not in (1/{2 * self.m})Z")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "a", a)

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def vector(self) -> np.ndarray:
        return np.array([float(x) for x in self.a])

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.a)

    def __str__(self):
        return "(" + ",".join(str(x) for x in self.a) + ")"


def characteristics(d: int, m: int = 1) -> list[ThetaChar]:
    """All characteristics in ``((1/2m)Z / Z)^d`` in lexicographic order."""
    steps = [Fraction(k, 2 * m) for k in range(2 * m)]
    return [ThetaChar(m, a) for a in itertools.product(steps, repeat=d)]


@dataclass(frozen=True)
class TruncationBudget:
    tol: float = 1e-12
    max_radius: int = 60

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_radius < 1:
            raise ValueError("max_radius must be at least 1")


@dataclass(frozen=True)
class ThetaValue:
    value: complex
    tail: float
    radius2: float
    npoints: int


def as_point(Z) -> UpperHalfPoint:
    return Z if isinstance(Z, UpperHalfPoint) else UpperHalfPoint.from_complex(Z)


def _plan(c: ThetaChar, Yhat, y, budget: TruncationBudget):
    """Centre, radius and tail of the certified truncation for one imaginary part ``y``."""
    shift = np.linalg.solve(Yhat, y)
    lam = float(np.linalg.eigvalsh(Yhat).min())
    decay = 2 * math.pi * c.m
    log_pref = decay * float(y @ shift)
    R2 = radius_for_tail(c.dim, lam, budget.tol, decay, log_prefactor=log_pref)
    center = -(c.vector + shift)
    needed = math.sqrt(R2 / lam) + float(np.abs(center).max(initial=0.0))
    if not math.isfinite(needed) or needed > budget.max_radius:
        raise TruncationError(needed, budget.max_radius)
    return center, R2, lam, decay, log_pref


def _terms(c: ThetaChar, Zc, zs, pts):
    """Term matrix, shape (len(zs), len(pts))."""
    v = pts + c.vector
    quad = np.einsum("ni,ij,nj->n", v, Zc, v, optimize=False)
    lin = np.einsum("ni,si->sn", v, zs, optimize=False)
    return np.exp(2j * math.pi * c.m * (quad[None, :] + 2 * lin))


def theta_eval_full(c: ThetaChar, Zhat, zhat, budget: TruncationBudget = TruncationBudget()) -> ThetaValue:
    P = as_point(Zhat)
    z = np.asarray(zhat, dtype=complex).reshape(-1)
    if P.n != c.dim or z.size != c.dim:
        raise ValueError("dimension mismatch between characteristic, Zhat and zhat")
    center, R2, lam, decay, log_pref = _plan(c, P.Y, z.imag, budget)
    pts = ellipsoid_points(P.Y, R2, center=center)
    tail = math.exp(log_pref) * gaussian_tail(c.dim, lam, R2, decay)
    value = fsum_complex(_terms(c, P.Z, z[None, :], pts)[0])
    return ThetaValue(value, tail, R2, len(pts))


def theta_eval(c: ThetaChar, Zhat, zhat, budget: TruncationBudget = TruncationBudget()) -> complex:
    """Certified truncated theta sum; absolute error at most ``budget.tol``."""
    return theta_eval_full(c, Zhat, zhat, budget).value


def theta_eval_many(c: ThetaChar, Zhat, zs, budget: TruncationBudget = TruncationBudget()) -> np.ndarray:
    """Evaluate at many ``zhat`` (rows of ``zs``) sharing one ``Zhat``."""
    P = as_point(Zhat)
    zs = np.atleast_2d(np.asarray(zs, dtype=complex))
    if zs.shape[1] != c.dim:
        raise ValueError("dimension mismatch")
    out = np.empty(zs.shape[0], dtype=complex)
    keys = [tuple(np.round(row.imag, 15)) for row in zs]
    groups: dict[tuple, list[int]] = {}
    for i, key in enumerate(keys):
        groups.setdefault(key, []).append(i)
    for key, idx in groups.items():
        center, R2, *_ = _plan(c, P.Y, np.array(key), budget)
        pts = ellipsoid_points(P.Y, R2, center=center)
        T = _terms(c, P.Z, zs[idx], pts)
        for row, i in zip(T, idx):
            out[i] = fsum_complex(row)
    return out


def theta_translation_check(c: ThetaChar, Zhat, zhat, S, budget: TruncationBudget = TruncationBudget()) -> float:
    """``|Theta_a(Zhat + S, zhat) - exp(2 pi i m a^t S a) Theta_a(Zhat, zhat)|``."""
    P = as_point(Zhat)
    S = np.atleast_2d(np.asarray(S))
    if not np.array_equal(S, S.T) or not np.all(S == np.round(S)):
        raise ValueError("S must be an integer symmetric matrix")
    a = [x for x in c.a]
    aSa = sum(a[i] * int(S[i, j]) * a[j] for i in range(c.dim) for j in range(c.dim))
    phase = np.exp(2j * math.pi * float((c.m * aSa) % 1))
    lhs = theta_eval(c, UpperHalfPoint(P.X + S, P.Y), zhat, budget)
    rhs = phase * theta_eval(c, P, zhat, budget)
    return abs(lhs - rhs)


def pushforward_char(c: ThetaChar, Uhat) -> ThetaChar:
    U = Uhat if isinstance(Uhat, UnimodularMatrix) else UnimodularMatrix(Uhat)
    b = tuple(sum(int(U.entries[i][j]) * c.a[j] for j in range(c.dim)) for i in range(c.dim))
    return ThetaChar(c.m, b)


def theta_pushforward_check(c: ThetaChar, Uhat, Zhat, zhat, budget: TruncationBudget = TruncationBudget()) -> float:
    """``|Theta_a(U^t Zhat U, U^t zhat) - Theta_b(Zhat, zhat)|`` with ``b = U a mod Z``."""
    if c.m != 1:
        raise ValueError("pushforward check is stated for index 1")
    U = Uhat if isinstance(Uhat, UnimodularMatrix) else UnimodularMatrix(Uhat)
    P = as_point(Zhat)
    z = np.asarray(zhat, dtype=complex).reshape(-1)
    Ua = U.array.astype(float)
    lhs = theta_eval(c, P.transformed(Ua), Ua.T @ z, budget)
    rhs = theta_eval(pushforward_char(c, U), P, z, budget)
    return abs(lhs - rhs)


# -- transformation law under reduced symplectic elements ---------------------------------


class IllConditionedSamples(RuntimeError):
    pass


@dataclass(frozen=True)
class TransformationResult:
    matrix: np.ndarray  # U_{ab}, rows a (transformed side), columns b
    sqrt_det: complex
    condition: float
    chars: tuple[ThetaChar, ...]

    def unitarity_defect(self) -> float:
        U = self.matrix
        return float(np.abs(U @ U.conj().T - np.eye(U.shape[0])).max())


def sqrt_det_branch(Mhat: SymplecticElement, Zhat, steps: int = 256) -> complex:
    """``sqrt(det(C Zhat + D))`` continued from the principal branch at ``i * I``.

    The path ``Z_t = (1 - t) i I + t Zhat`` stays in the upper half-space, where
    ``det(C Z_t + D)`` never vanishes.
    """
    P = as_point(Zhat)
    d = P.n
    Z0 = 1j * np.eye(d)
    prev = None
    for t in np.linspace(0.0, 1.0, steps + 1):
        Zt = (1 - t) * Z0 + t * P.Z
        r = np.sqrt(complex(np.linalg.det(Mhat.C @ Zt + Mhat.D)))
        if prev is not None and abs(r - prev) > abs(-r - prev):
            r = -r
        prev = r
    return prev


def _kappa_exponent(Mhat: SymplecticElement, Zc, zs):
    """``zhat^t (C Zhat + D)^{-1} C zhat`` for each row of ``zs``."""
    J = Mhat.C @ Zc + Mhat.D
    K = np.linalg.solve(J, Mhat.C.astype(complex))
    return np.einsum("si,ij,sj->s", zs, K, zs, optimize=False)


def theta_transformation_matrix(
    Mp: SymplecticElement,
    Zhat,
    budget: TruncationBudget = TruncationBudget(),
    seed: int = 0,
    max_tries: int = 8,
    cond_limit: float = 1e8,
) -> TransformationResult:
    """Recover the constant matrix in

        Theta_a(Zp, zp) = sqrt(det(C Zhat + D)) exp(2 pi i zhat^t (C Zhat + D)^{-1} C zhat)
                          * sum_b U_ab Theta_b(Zhat, zhat)

    with ``Zp = Mhat(Zhat)`` and ``zp = (Zhat C^t + D^t)^{-1} zhat``, by sampling
    ``2^d`` values of ``zhat`` and solving the square system.  Index 1 only.
    """
    P = as_point(Zhat)
    d = P.n
    Mhat = Mp if Mp.n == d else Mp.reduced_block()
    if Mhat.n != d:
        raise ValueError("dimension mismatch")
    chars = tuple(characteristics(d, 1))
    Pp = symplectic_action(Mhat, P)
    J = Mhat.C @ P.Z + Mhat.D
    root = sqrt_det_branch(Mhat, P)
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        u = rng.random((len(chars), d))
        v = rng.random((len(chars), d))
        zs = u @ P.Z.T + v  # zhat = Zhat u + v keeps Im zhat = Yhat u bounded
        zps = np.linalg.solve(J.T, zs.T).T
        basis = np.column_stack([theta_eval_many(b, P, zs, budget) for b in chars])
        cond = float(np.linalg.cond(basis))
        if cond > cond_limit:
            continue
        factor = root * np.exp(2j * math.pi * _kappa_exponent(Mhat, P.Z, zs))
        lhs = np.column_stack([theta_eval_many(a, Pp, zps, budget) for a in chars]) / factor[:, None]
        Ut = np.linalg.solve(basis, lhs)
        return TransformationResult(Ut.T, root, cond, chars)
    raise IllConditionedSamples(f"no well-conditioned sample set after {max_tries} tries")
