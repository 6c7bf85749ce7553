"""Unimodular orbit sums.

For a half-even ``T`` in normal form ``[[That, t e_1], [t e_1^t, 1]]`` the
sum ``G(T, Z) = sum_{U in GL(n,Z)} exp(2 pi i tr(T U^t Z U))`` has a first
``z_nn``-layer made of the matrices ``U = [[Uhat, g], [0, +-1]]``.  Completing
the square in ``g`` gives

    g_1(T, Zhat, zhat) = 2 * sum_a psi(a, T)(Zhat) * Theta_{1,a}(Zhat, zhat),

where ``psi(a, T)`` sums ``exp(2 pi i tr(That Uhat^t Zhat Uhat) - 2 pi i t^2 (Uhat^t Zhat Uhat)_11)``
over the ``Uhat`` whose first column is congruent to ``2a`` mod 2.  The factor 2
counts the two signs of the corner entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .lattice import (
    DEFAULT_CAP,
    TruncationError,
    ellipsoid_points,
    fsum_complex,
    gaussian_tail,
    radius_for_tail,
)
from .symmat import (
    HalfEvenMatrix,
    UnimodularMatrix,
    UpperHalfPoint,
    frac_inverse,
    frac_matrix,
)
from .theta import ThetaChar, TruncationBudget, as_point, characteristics, theta_eval

__all__ = [
    "BoundedEnumeration",
    "MinimaAnalysis",
    "TFamily",
    "FamilyConstructionError",
    "enumerate_bounded",
    "minima_analysis",
    "orbit_sum",
    "psi_eval",
    "gl_sum",
    "g1_eval",
    "g1_decomposition",
    "unimodular_subseries",
    "extract_layer",
    "build_t_family",
    "class_of",
    "leading_exponent",
]


def _float(M) -> np.ndarray:
    if isinstance(M, HalfEvenMatrix):
        return M.array
    M = np.asarray(M, dtype=object) if not isinstance(M, np.ndarray) else M
    return np.array([[float(x) for x in row] for row in np.atleast_2d(M).tolist()])


def _trace_form(T, Y):
    """Gram matrix of ``x -> tr(T U^t Y U)`` on column-major ``vec(U)``."""
    return np.kron(_float(T), _float(Y))


def _sigma(T, Gram) -> np.ndarray:
    """``tr(T G)`` for a stack of Gram matrices (T symmetric)."""
    return np.einsum("ij,nij->n", T, Gram, optimize=False)


def _grams(U, Y):
    return np.einsum("nki,kl,nlj->nij", U, Y, U, optimize=False)


def _unimodular(points: np.ndarray, d: int) -> np.ndarray:
    """Keep the vec(U) rows with det(U) = +-1, returned as an (N, d, d) stack."""
    U = points.reshape(-1, d, d).transpose(0, 2, 1)
    if len(U) == 0:
        return U.astype(np.int64)
    det = np.rint(np.linalg.det(U.astype(float))).astype(np.int64)
    return np.ascontiguousarray(U[np.abs(det) == 1])


def _lexsorted(U: np.ndarray) -> np.ndarray:
    if len(U) == 0:
        return U
    flat = U.reshape(len(U), -1)
    return U[np.lexsort(flat.T[::-1])]


@dataclass(frozen=True, eq=False)
class BoundedEnumeration:
    """All ``U`` in GL(d, Z) with ``tr(T U^t Y U) <= bound``, lexicographically sorted."""

    T: np.ndarray
    Y: np.ndarray
    bound: float
    arrays: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.arrays)

    @property
    def matrices(self) -> list[UnimodularMatrix]:
        return [UnimodularMatrix(U) for U in self.arrays]

    def traces(self) -> np.ndarray:
        return _sigma(self.T, _grams(self.arrays.astype(float), self.Y))


def enumerate_bounded(T, Y, bound: float, cap: int = DEFAULT_CAP) -> BoundedEnumeration:
    """Complete list of unimodular ``U`` with ``tr(T U^t Y U) <= bound``.

    ``vec(U)`` runs over the integer points of the ellipsoid of ``T (x) Y``;
    the candidates are then filtered by ``det U = +-1``.
    """
    Tf, Yf = _float(T), _float(Y)
    d = Yf.shape[0]
    if Tf.shape != (d, d):
        raise ValueError("T and Y must have the same size")
    for M in (Tf, Yf):
        if np.linalg.eigvalsh(M).min() <= 0:
            raise ValueError("T and Y must be positive definite")
    pts = ellipsoid_points(_trace_form(Tf, Yf), bound, cap=cap)
    U = _unimodular(pts, d)
    if len(U):
        s = _sigma(Tf, _grams(U.astype(float), Yf))
        U = U[s <= bound * (1 + 1e-12) + 1e-300]
    U = _lexsorted(U)
    U.setflags(write=False)
    return BoundedEnumeration(Tf, Yf, float(bound), U)


def class_of(U: np.ndarray) -> tuple[int, ...]:
    """First column mod 2 (the class index ``2a``)."""
    return tuple(int(x) % 2 for x in np.asarray(U)[:, 0])


def _class_mask(U: np.ndarray, cls) -> np.ndarray:
    if cls is None:
        return np.ones(len(U), dtype=bool)
    return np.all(np.mod(U[:, :, 0], 2) == np.asarray(cls, dtype=np.int64), axis=1)


# -- minima and stabilizers -------------------------------------------------------------


def _exact_sigma(Tq, Yq, U) -> Fraction:
    d = len(Yq)
    U = [[int(x) for x in row] for row in np.asarray(U).tolist()]
    G = [[sum(U[k][i] * Yq[k][l] * U[l][j] for k in range(d) for l in range(d)) for j in range(d)]
         for i in range(d)]
    return sum(Tq[i][j] * G[j][i] for i in range(d) for j in range(d))


def _exact_gram(Yq, U):
    d = len(Yq)
    U = [[int(x) for x in row] for row in np.asarray(U).tolist()]
    return tuple(
        tuple(sum(U[k][i] * Yq[k][l] * U[l][j] for k in range(d) for l in range(d)) for j in range(d))
        for i in range(d)
    )


@dataclass(frozen=True, eq=False)
class MinimaAnalysis:
    minimum: Fraction
    minimizers: np.ndarray
    stabilizer: np.ndarray
    representatives: np.ndarray
    grams: tuple


def minima_analysis(Y, That, cap: int = DEFAULT_CAP) -> MinimaAnalysis:
    """Minimum of ``tr(That U^t Y U)`` over GL(d, Z), the stabilizer of ``Y`` and
    representatives of the minimizing set modulo the stabilizer.

    Float entries of ``Y`` are taken as exact binary rationals.  Two minimizers
    lie in the same stabilizer orbit exactly when their Gram matrices agree, so
    the representatives are the lexicographically first minimizer of each Gram.
    """
    Yq, Tq = frac_matrix(np.asarray(Y, dtype=object) if not isinstance(Y, np.ndarray) else Y), frac_matrix(That)
    Yf, Tf = _float(Yq), _float(Tq)
    d = len(Yq)
    ident = np.eye(d, dtype=np.int64)
    start = float(_exact_sigma(Tq, Yq, ident))
    enum = enumerate_bounded(Tf, Yf, start * (1 + 1e-9), cap=cap)
    sig = [_exact_sigma(Tq, Yq, U) for U in enum.arrays]
    mn = min(sig)
    minimizers = np.array([U for U, s in zip(enum.arrays, sig) if s == mn])
    trY = float(sum(Yq[i][i] for i in range(d)))
    stab_enum = enumerate_bounded(np.eye(d), Yf, trY * (1 + 1e-9), cap=cap)
    Ygram = tuple(tuple(r) for r in Yq)
    stab = np.array([U for U in stab_enum.arrays if _exact_gram(Yq, U) == Ygram])
    reps, grams = [], []
    for U in minimizers:
        g = _exact_gram(Yq, U)
        if g not in grams:
            grams.append(g)
            reps.append(U)
    return MinimaAnalysis(mn, minimizers, stab, np.array(reps), tuple(grams))


# -- orbit sums -----------------------------------------------------------------------------


def _tail_radius(dim, lam, tol, budget: TruncationBudget, log_prefactor=0.0):
    B = radius_for_tail(dim, lam, tol, 2 * math.pi, log_prefactor=log_prefactor)
    needed = math.sqrt(B / lam)
    if needed > budget.max_radius:
        raise TruncationError(needed, budget.max_radius)
    return B


def _as_stack(Z):
    """Return ``(stack, single)`` for a point, a sequence of points or an (N, d, d) array."""
    if isinstance(Z, UpperHalfPoint):
        return Z.Z[None], True
    if isinstance(Z, np.ndarray) and Z.ndim == 3:
        return Z.astype(complex), False
    if np.ndim(Z) == 2 and not isinstance(Z[0], UpperHalfPoint):
        return as_point(Z).Z[None], True
    return np.array([as_point(P).Z for P in Z]), False


def _group_by_imag(stack):
    groups: dict[bytes, list[int]] = {}
    for i, Zi in enumerate(stack):
        groups.setdefault(np.round(Zi.imag, 14).tobytes(), []).append(i)
    return groups.values()


CHUNK = 1 << 22


def _leading_exponent(Teff, Y, cls, cap):
    """Smallest ``tr(Teff U^t Y U)`` over the class (None if the class is empty)."""
    d = Y.shape[0]
    if cls is not None and not any(cls):
        return None
    B = float(np.trace(Teff)) * float(np.linalg.eigvalsh(Y).max()) + 1.0
    for _ in range(30):
        enum = enumerate_bounded(Teff, Y, B, cap=cap)
        U = enum.arrays[_class_mask(enum.arrays, cls)]
        if len(U):
            return float(_sigma(Teff, _grams(U.astype(float), Y)).min())
        B *= 2
    raise RuntimeError("no class member found")


def orbit_sum(
    That,
    Zhat,
    budget: TruncationBudget = TruncationBudget(),
    corner: Fraction = Fraction(0),
    cls=None,
    relative: bool = False,
    cap: int = DEFAULT_CAP,
    det_power: int = 0,
    shift: float = 0.0,
) -> np.ndarray | complex:
    """``sum_U exp(2 pi i tr(That U^t Z U) - 2 pi i corner^2 (U^t Z U)_11)`` over GL(d, Z).

    ``cls`` restricts to first columns congruent to ``cls`` mod 2.  ``Zhat`` may be a
    point, a sequence of points or an (N, d, d) complex stack; points sharing an
    imaginary part share one enumeration.  Terms are weighted by ``det(U)^det_power``.
    With ``relative=True`` the tail bound is ``budget.tol`` times the modulus of
    the largest term.  The result is multiplied by ``exp(2 pi shift)``, which keeps
    sums with large traces representable.
    """
    stack, single = _as_stack(Zhat)
    Teff = _float(frac_matrix(That))
    Teff[0, 0] -= float(Fraction(corner) ** 2)
    d = Teff.shape[0]
    lamT = float(np.linalg.eigvalsh(Teff).min())
    if lamT <= 0:
        raise ValueError("effective form is not positive definite; the sum diverges")
    out = np.zeros(len(stack), dtype=complex)
    for idx in _group_by_imag(stack):
        Y = as_point(stack[idx[0]]).Y
        lam = lamT * float(np.linalg.eigvalsh(Y).min())
        log_pref = 0.0
        if relative:
            s0 = _leading_exponent(Teff, Y, cls, cap)
            if s0 is None:
                continue
            log_pref = 2 * math.pi * s0
        B = _tail_radius(d * d, lam, budget.tol, budget, log_prefactor=log_pref)
        enum = enumerate_bounded(Teff, Y, B, cap=cap)
        U = enum.arrays[_class_mask(enum.arrays, cls)].astype(float)
        if len(U) == 0:
            continue
        sign = np.rint(np.linalg.det(U)) if det_power % 2 else np.ones(len(U))
        # tr(Teff U^t Z U) = sum_kl (U Teff U^t)_kl Z_kl
        P = np.einsum("nik,kl,njl->nij", U, Teff, U, optimize=False).reshape(len(U), -1)
        step = max(1, CHUNK // len(U))
        idx = np.asarray(idx)
        for c0 in range(0, len(idx), step):
            part = idx[c0:c0 + step]
            s = stack[part].reshape(len(part), -1) @ P.T
            terms = sign * np.exp(2j * math.pi * s + 2 * math.pi * shift)
            for i, row in zip(part, terms):
                out[i] = fsum_complex(row)
    return complex(out[0]) if single else out


def leading_exponent(T: HalfEvenMatrix, Zhat) -> float:
    """Smallest ``Im`` trace exponent among the terms of the psi sums of ``T``."""
    Teff = _float(T.hat)
    Teff[0, 0] -= float(T.t1n) ** 2
    return _leading_exponent(Teff, as_point(Zhat).Y, None, DEFAULT_CAP)


def _check_normal_form(T: HalfEvenMatrix, min_eig: float):
    if not T.is_jacobi_normal():
        raise ValueError("T must have T_nn = 1, T_in = 0 for 2 <= i <= n-1 and T_1n in {0, 1/2}")
    if T.hat_min_eigenvalue() < min_eig - 1e-12:
        raise ValueError(f"leading block eigenvalues must be >= {min_eig}")


def psi_eval(
    a: ThetaChar,
    T: HalfEvenMatrix,
    Zhat,
    budget: TruncationBudget = TruncationBudget(),
    min_eig: float = 3.0,
    relative: bool = False,
    shift: float = 0.0,
):
    """Orbit sum ``psi(a, T)`` at one point or a sequence of points (times ``exp(2 pi shift)``)."""
    if a.m != 1:
        raise ValueError("psi is defined for index 1")
    _check_normal_form(T, min_eig)
    if a.dim != T.n - 1:
        raise ValueError("characteristic length must be n - 1")
    t = T.t1n
    if t == 0:
        if not a.is_zero():
            return _zero_like(Zhat)
        return orbit_sum(T.hat, Zhat, budget, relative=relative, shift=shift)
    if a.is_zero():
        return _zero_like(Zhat)
    cls = tuple(int(2 * x) for x in a.a)
    return orbit_sum(T.hat, Zhat, budget, corner=t, cls=cls, relative=relative, shift=shift)


def _zero_like(Zhat):
    stack, single = _as_stack(Zhat)
    return 0j if single else np.zeros(len(stack), dtype=complex)


def gl_sum(That, Zhat, budget: TruncationBudget = TruncationBudget(), relative: bool = False):
    """``sum_{U in GL(d, Z)} exp(2 pi i tr(That U^t Zhat U))`` for any positive definite rational That."""
    return orbit_sum(That, Zhat, budget, relative=relative)


def unimodular_subseries(T, Z, budget: TruncationBudget = TruncationBudget(), relative: bool = False,
                         weight: int = 0):
    """The full sum ``G(T, Z)`` over GL(n, Z), terms weighted by ``det(U)^weight``."""
    return orbit_sum(T.entries if isinstance(T, HalfEvenMatrix) else T, Z, budget, relative=relative,
                     det_power=weight)


def g1_eval(
    T: HalfEvenMatrix,
    Zhat,
    zhat,
    budget: TruncationBudget = TruncationBudget(),
    min_eig: float = 3.0,
    relative: bool = False,
) -> complex:
    """First ``z_nn``-layer of ``G(T, Z)`` summed directly over ``U = [[Uhat, g], [0, e]]``.

    With ``v = g + T_1n * Uhat e_1`` the exponent is
    ``tr(That Uhat^t Zhat Uhat) - T_1n^2 (Uhat^t Zhat Uhat)_11 + v^t Zhat v + 2 e v^t zhat``.
    """
    _check_normal_form(T, min_eig)
    P = as_point(Zhat)
    z = np.asarray(zhat, dtype=complex).reshape(-1)
    d = P.n
    t = float(T.t1n)
    Teff = _float(T.hat)
    Teff[0, 0] -= t * t
    Y = P.Y
    lamY = float(np.linalg.eigvalsh(Y).min())
    lam = float(np.linalg.eigvalsh(Teff).min()) * lamY
    shift = np.linalg.solve(Y, z.imag)
    theta_pref = math.exp(2 * math.pi * float(z.imag @ shift))
    theta_bound = theta_pref * (1.0 + gaussian_tail(d, lamY, 0.0, 2 * math.pi))
    scale = 1.0
    if relative:
        scale = math.exp(-2 * math.pi * _leading_exponent(Teff, Y, None, DEFAULT_CAP))
    tol = budget.tol * scale
    # half of the budget for the Uhat tail (each term times two theta-type sums)
    B = _tail_radius(d * d, lam, tol / (4 * theta_bound), budget)
    U = enumerate_bounded(Teff, Y, B).arrays.astype(float)
    s = _sigma(Teff, _grams(U, P.Z))
    weights = np.exp(-2 * math.pi * s.imag)
    # the other half for the g sums, split over all Uhat and both signs
    tol_g = tol / (4 * max(1.0, float(weights.sum())))
    R2 = radius_for_tail(d, lamY, tol_g, 2 * math.pi, prefactor=theta_pref)
    terms = []
    for Ui, si in zip(U, s):
        base = t * Ui[:, 0]
        outer = np.exp(2j * math.pi * si)
        for e in (1, -1):
            center = -(base + e * shift)
            if math.sqrt(R2 / lamY) + np.abs(center).max() > budget.max_radius:
                raise TruncationError(math.sqrt(R2 / lamY) + np.abs(center).max(), budget.max_radius)
            g = ellipsoid_points(Y, R2, center=center)
            v = g + base
            ex = np.einsum("ni,ij,nj->n", v, P.Z, v, optimize=False) + 2 * e * (v @ z)
            terms.append(outer * np.exp(2j * math.pi * ex))
    if not terms:
        return 0j
    return fsum_complex(np.concatenate(terms))


def g1_decomposition(
    T: HalfEvenMatrix,
    Zhat,
    zhat,
    budget: TruncationBudget = TruncationBudget(),
    min_eig: float = 3.0,
    relative: bool = False,
) -> tuple[complex, complex]:
    """Return ``(g1_eval, 2 * sum_a psi(a, T) Theta_{1,a})`` for comparison."""
    P = as_point(Zhat)
    direct = g1_eval(T, P, zhat, budget, min_eig, relative)
    total = []
    for a in characteristics(P.n, 1):
        p = psi_eval(a, T, P, budget, min_eig, relative)
        if p != 0:
            total.append(2 * p * theta_eval(a, P, zhat, budget))
    return direct, fsum_complex(total) if total else 0j


def extract_layer(G, Zhat, zhat, ynn: float, k: int = 1, grid: int = 16) -> complex:
    """Coefficient of ``exp(2 pi i k z_nn)`` of a 1-periodic function of ``x_nn``.

    ``G`` maps a list of points to values.  Trapezoid rule in ``x_nn`` at fixed ``y_nn``.
    """
    xs = np.arange(grid) / grid
    pts = [UpperHalfPoint.from_blocks(Zhat, zhat, x + 1j * ynn) for x in xs]
    vals = np.asarray(G(pts), dtype=complex)
    coeff = fsum_complex(vals * np.exp(-2j * math.pi * k * xs)) / grid
    return coeff * math.exp(2 * math.pi * k * ynn)


# -- T families -------------------------------------------------------------------------------


class FamilyConstructionError(RuntimeError):
    def __init__(self, msg, witnesses=()):
        super().__init__(msg)
        self.witnesses = witnesses


@dataclass(frozen=True, eq=False)
class TFamily:
    """Base ``That``, conjugators ``W_j`` and the characteristic each conjugate targets."""

    base: tuple
    conjugators: tuple[UnimodularMatrix, ...]
    chars: tuple[ThetaChar, ...]
    U1: np.ndarray
    T_tilde: tuple
    q0: int
    strategy: str
    scale: int = 1

    @property
    def dim(self) -> int:
        return len(self.base)

    def hats(self) -> list[tuple]:
        """``That_j = W_j^{-1} That W_j^{-t}``."""
        out = []
        T = np.array(self.base, dtype=object)
        for W in self.conjugators:
            Wi = np.array(frac_inverse(W.entries), dtype=object)
            out.append(frac_matrix(Wi.dot(T).dot(Wi.T)))
        return out

    def members(self, q: int | None = None) -> list[tuple[str, HalfEvenMatrix]]:
        """The 2^(n-1) full matrices: one with T_1n = 0, the rest with T_1n = 1/2."""
        q = self.scale if q is None else q
        scaled = lambda H: tuple(tuple(q * x for x in row) for row in H)
        out = [("t0", HalfEvenMatrix.jacobi_normal(scaled(self.base), 0))]
        for c, H in zip(self.chars, self.hats()):
            out.append((f"t{c}", HalfEvenMatrix.jacobi_normal(scaled(H), Fraction(1, 2))))
        return out

    def with_scale(self, q: int) -> "TFamily":
        return TFamily(self.base, self.conjugators, self.chars, self.U1, self.T_tilde, self.q0,
                       self.strategy, q)

    def min_shift_holds(self, Y) -> bool:
        """``tr(That_j (U1 W_j)^t Y U1 W_j) == tr(That U1^t Y U1)`` exactly."""
        Yq = frac_matrix(np.asarray(Y, dtype=object) if not isinstance(Y, np.ndarray) else Y)
        ref = _exact_sigma(self.base, Yq, self.U1)
        for W, H in zip(self.conjugators, self.hats()):
            if _exact_sigma(H, Yq, self.U1 @ W.array) != ref:
                return False
        return True


def _complete_unimodular(w: Sequence[int]) -> UnimodularMatrix:
    """Unimodular matrix with first column ``w`` (a nonzero 0/1 vector)."""
    d = len(w)
    p = next(i for i, x in enumerate(w) if x)
    cols = [list(np.eye(d, dtype=int)[:, i]) for i in range(d)]
    if p != 0:
        cols[p] = cols[0]
    cols[0] = list(w)
    return UnimodularMatrix(np.array(cols).T)


def _t_minimizers(Tq, Yq, Yf, cap):
    """Lexicographically first minimizer of ``tr(T U^t Y U)`` and all minimizing Grams."""
    d = len(Yq)
    start = float(_exact_sigma(Tq, Yq, np.eye(d, dtype=np.int64)))
    enum = enumerate_bounded(_float(Tq), Yf, start * (1 + 1e-9), cap=cap)
    sig = [_exact_sigma(Tq, Yq, U) for U in enum.arrays]
    mn = min(sig)
    mins = [U for U, s in zip(enum.arrays, sig) if s == mn]
    grams = {_exact_gram(Yq, U) for U in mins}
    return mins[0], grams


def _generic_perturbation(d: int) -> list[list[int]]:
    # distinct small integers on and above the diagonal
    vals = iter([1, 3, 7, 2, 5, 11, 4, 13, 6, 17])
    P = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            P[i][j] = P[j][i] = next(vals)
    return P


def build_t_family(Y, strategy: str = "generic", max_refinements: int = 20,
                   min_eig: float = 3.0, cap: int = DEFAULT_CAP) -> TFamily:
    """Construct the matrices ``That_j`` whose minimizers realize every nonzero characteristic.

    The rational ``T_tilde`` is chosen so that ``tr(T_tilde U^t Y U)`` has a single
    minimizing Gram matrix (generic: ``I + P/N`` with ``N`` doubling; equal-determinant:
    a rational approximation of ``Y^{-1}``, perturbed the same way if it ties).
    """
    Yf = _float(Y)
    Yq = frac_matrix(np.asarray(Yf, dtype=object))
    d = Yf.shape[0]
    if strategy == "generic":
        base = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
        # the perturbation must not change which Grams minimize the plain trace
        plain = minima_analysis(Yf, base, cap=cap)
        allowed = set(plain.grams)
    elif strategy == "equal-determinant":
        inv = np.linalg.inv(Yf)
        # rounding to a fixed denominator keeps q0 small
        base = [[Fraction(round(8 * float(inv[min(i, j), max(i, j)])), 8) for j in range(d)] for i in range(d)]
        allowed = None
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    P = _generic_perturbation(d)
    witnesses = ()
    Tt = None
    for r in range(max_refinements):
        if r == 0:
            cand = frac_matrix(base)
        else:
            N = 2 ** (r + 2)
            cand = frac_matrix([[base[i][j] + Fraction(P[i][j], N) for j in range(d)] for i in range(d)])
        if np.linalg.eigvalsh(_float(cand)).min() <= 0:
            continue
        U1, grams = _t_minimizers(cand, Yq, Yf, cap)
        if len(grams) == 1 and (allowed is None or grams <= allowed):
            Tt = cand
            break
        witnesses = tuple(sorted(grams))
    if Tt is None:
        raise FamilyConstructionError("no perturbation separated the minimizers", witnesses)
    den = 1
    for row in Tt:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    lam = float(np.linalg.eigvalsh(_float(Tt)).min())
    q0 = den * max(1, math.ceil(min_eig / (den * lam) - 1e-12))
    That = tuple(tuple(q0 * x for x in row) for row in Tt)
    U1inv = np.array(frac_inverse(U1.tolist()), dtype=object)
    chars, conj = [], []
    for a in characteristics(d, 1):
        if a.is_zero():
            continue
        c = np.array([int(2 * x) for x in a.a], dtype=object)
        w = [int(x) % 2 for x in U1inv.dot(c)]
        chars.append(a)
        conj.append(_complete_unimodular(w))
    fam = TFamily(That, tuple(conj), tuple(chars), np.asarray(U1, dtype=np.int64), Tt, q0, strategy)
    if not fam.min_shift_holds(Yf):
        raise FamilyConstructionError("minimum-shift property failed")
    return fam
