"""Truncated Klingen-Poincare series and the growth of det(CZ + D).

The series is regrouped as

    F(T, Z) = sum_{(C, D)} det(CZ + D)^{-r} G_r(T, M(Z)),
    G_r(T, W) = sum_{U in GL(n, Z)} det(U)^r exp(2 pi i tr(T U^t W U)),

where ``(C, D)`` runs over coprime symmetric pairs modulo the left action of
GL(n, Z) (these are the cosets of the subgroup with ``C = 0``) and ``M`` is any
symplectic completion of the pair.  Class representatives are the row Hermite
normal forms of ``[C | D]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .lattice import gaussian_tail
from .symmat import (
    HalfEvenMatrix,
    SymplecticElement,
    UpperHalfPoint,
    cocycle_det,
    int_det,
    symplectic_action,
)
from .theta import TruncationBudget
from .unimod import orbit_sum

__all__ = [
    "CosetTruncation",
    "PoincareValue",
    "DetGrowth",
    "hermite_form",
    "complete_pair",
    "enumerate_cosets",
    "truncated_poincare",
    "gl_sum_bound",
    "detgrowth_probe",
]

BRUTE_FORCE_LIMIT = 5 * 10**6


# -- integer row reduction -----------------------------------------------------------------


def _row_reduce(M):
    """Row Hermite normal form ``H = R M`` of an integer matrix, with the unimodular ``R``."""
    H = [[int(x) for x in row] for row in M]
    m = len(H)
    ncol = len(H[0]) if m else 0
    R = [[int(i == j) for j in range(m)] for i in range(m)]
    piv_row = 0
    for col in range(ncol):
        if piv_row == m:
            break
        # Euclid on the column below piv_row
        while True:
            nz = [i for i in range(piv_row, m) if H[i][col] != 0]
            if not nz:
                break
            k = min(nz, key=lambda i: abs(H[i][col]))
            H[piv_row], H[k] = H[k], H[piv_row]
            R[piv_row], R[k] = R[k], R[piv_row]
            done = True
            for i in range(piv_row + 1, m):
                q = H[i][col] // H[piv_row][col]
                if q:
                    H[i] = [a - q * b for a, b in zip(H[i], H[piv_row])]
                    R[i] = [a - q * b for a, b in zip(R[i], R[piv_row])]
                if H[i][col]:
                    done = False
            if done:
                break
        if H[piv_row][col] == 0:
            continue
        if H[piv_row][col] < 0:
            H[piv_row] = [-a for a in H[piv_row]]
            R[piv_row] = [-a for a in R[piv_row]]
        p = H[piv_row][col]
        for i in range(piv_row):
            q = H[i][col] // p
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[piv_row])]
                R[i] = [a - q * b for a, b in zip(R[i], R[piv_row])]
        piv_row += 1
    return H, R


def hermite_form(C, D) -> tuple:
    """Canonical key of the class of ``(C, D)`` under ``(C, D) -> (V C, V D)``, V in GL(n, Z)."""
    M = np.hstack([np.asarray(C, dtype=np.int64), np.asarray(D, dtype=np.int64)])
    H, _ = _row_reduce(M.tolist())
    return tuple(tuple(r) for r in H)


def complete_pair(C, D) -> SymplecticElement:
    """A symplectic matrix with bottom blocks ``(C, D)`` (coprime symmetric pair)."""
    C = np.asarray(C, dtype=np.int64)
    D = np.asarray(D, dtype=np.int64)
    n = C.shape[0]
    W = np.vstack([D.T, -C.T])
    H, R = _row_reduce(W.tolist())
    if any(H[i][j] != int(i == j) for i in range(n) for j in range(n)) or any(any(r) for r in H[n:]):
        raise ValueError("(C, D) is not a coprime pair")
    A0 = np.array([r[:n] for r in R[:n]], dtype=object)
    B0 = np.array([r[n:] for r in R[:n]], dtype=object)
    K = A0.dot(B0.T) - B0.dot(A0.T)
    S = np.triu(K, 1)
    A = A0 + S.dot(C.astype(object))
    B = B0 + S.dot(D.astype(object))
    return SymplecticElement(np.array(A, dtype=np.int64), np.array(B, dtype=np.int64), C, D)


def _is_coprime(C, D) -> bool:
    n = C.shape[0]
    M = np.hstack([C, D]).astype(object)
    g = 0
    for cols in itertools.combinations(range(2 * n), n):
        sub = M[:, cols]
        g = gcd(g, int_det(sub))
        if g == 1:
            return True
    return False


@dataclass(frozen=True, eq=False)
class CosetTruncation:
    """Coset classes having a representative pair with all entries of ``C, D`` at most ``H``."""

    n: int
    height_bound: int
    weight: int
    representatives: tuple[SymplecticElement, ...]
    heights: tuple[int, ...]
    keys: tuple = field(repr=False, default=())

    def __post_init__(self):
        if self.weight < 2 * self.n + 2:
            raise ValueError(f"weight must be at least 2n+2 = {2 * self.n + 2}")
        if len(set(self.keys)) != len(self.keys):
            raise ValueError("representatives are not pairwise inequivalent")

    @classmethod
    def build(cls, n: int, height_bound: int, weight: int) -> "CosetTruncation":
        reps, heights, keys = enumerate_cosets(n, height_bound)
        return cls(n, height_bound, weight, tuple(reps), tuple(heights), tuple(keys))

    def __len__(self):
        return len(self.representatives)


def enumerate_cosets(n: int, H: int):
    """Brute force over all pairs with entries in ``[-H, H]``; identity class first.

    Returns (representatives, class heights, canonical keys).  ``H = 0`` gives the
    identity class alone.
    """
    ident = SymplecticElement.identity(n)
    id_key = hermite_form(ident.C, ident.D)
    if H <= 0:
        return [ident], [1], [id_key]
    count = (2 * H + 1) ** (2 * n * n)
    if count > BRUTE_FORCE_LIMIT:
        raise ValueError(f"{count} candidate pairs exceed the brute-force limit; lower the height bound")
    vals = np.arange(-H, H + 1)
    mats = np.array(list(itertools.product(vals, repeat=n * n)), dtype=np.int64).reshape(-1, n, n)
    best: dict[tuple, tuple[int, np.ndarray, np.ndarray]] = {}
    for C in mats:
        CDt = np.einsum("ij,nkj->nik", C, mats)
        sym = np.all(CDt == CDt.transpose(0, 2, 1), axis=(1, 2))
        for D in mats[sym]:
            if not _is_coprime(C, D):
                continue
            key = hermite_form(C, D)
            h = int(max(np.abs(C).max(), np.abs(D).max()))
            if key not in best or h < best[key][0]:
                best[key] = (h, C.copy(), D.copy())
    keys = sorted(best, key=lambda k: (k != id_key, best[k][0], k))
    reps = [ident if k == id_key else complete_pair(best[k][1], best[k][2]) for k in keys]
    return reps, [best[k][0] for k in keys], keys


# -- series ------------------------------------------------------------------------------------


@dataclass(frozen=True)
class PoincareValue:
    value: complex
    identity_part: complex
    terms: tuple[complex, ...]
    frontier_max: float
    min_abs_det: float


def gl_sum_bound(T, Y) -> float:
    """Upper bound for ``sum_U |exp(2 pi i tr(T U^t W U))|`` when ``Im W >= Y``."""
    Tf = T.array if isinstance(T, HalfEvenMatrix) else np.asarray(T, dtype=float)
    n = Tf.shape[0]
    lam = float(np.linalg.eigvalsh(Tf).min() * np.linalg.eigvalsh(np.asarray(Y, float)).min())
    return gaussian_tail(n * n, lam, 0.0, 2 * math.pi)


def truncated_poincare(
    T: HalfEvenMatrix,
    Z: UpperHalfPoint,
    r: int | None = None,
    trunc: CosetTruncation | None = None,
    budget: TruncationBudget = TruncationBudget(),
    relative: bool = False,
) -> PoincareValue:
    """Partial sum over the coset list; each term is ``det(CZ + D)^{-r} G_r(T, M(Z))``."""
    if trunc is None:
        trunc = CosetTruncation.build(Z.n, 0, r if r is not None else 2 * Z.n + 2)
    r = trunc.weight if r is None else r
    if r <= 2 * Z.n + 1:
        raise ValueError("weight must exceed 2n + 1")
    if T.n != Z.n or trunc.n != Z.n:
        raise ValueError("dimension mismatch")
    terms = []
    dets = []
    for M in trunc.representatives:
        j = cocycle_det(M, Z)
        W = symplectic_action(M, Z)
        G = orbit_sum(T.entries, W, budget, relative=relative, det_power=r)
        terms.append(complex(j ** (-r) * G))
        dets.append(abs(j))
    frontier = [abs(t) for t, h in zip(terms, trunc.heights) if h == trunc.height_bound]
    nonid = dets[1:]
    return PoincareValue(
        value=complex(math.fsum(t.real for t in terms) + 1j * math.fsum(t.imag for t in terms)),
        identity_part=terms[0],
        terms=tuple(terms),
        frontier_max=max(frontier) if frontier and trunc.height_bound > 0 else 0.0,
        min_abs_det=min(nonid) if nonid else math.inf,
    )


# -- determinant growth ----------------------------------------------------------------------


@dataclass(frozen=True)
class DetGrowth:
    ynn: tuple[float, ...]
    values: tuple[float, ...]
    ratios: tuple[float, ...]

    @property
    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.values, self.values[1:]))

    @property
    def ratio_spread(self) -> float:
        """Relative change of ``|det| / y_nn`` between the last two samples."""
        a, b = self.ratios[-2], self.ratios[-1]
        return abs(b - a) / abs(b) if b else math.inf

    @property
    def constant_spread(self) -> float:
        v = np.asarray(self.values)
        return float((v.max() - v.min()) / max(abs(v).max(), 1e-300))


def detgrowth_probe(M: SymplecticElement, Zbase: UpperHalfPoint, ynn_values) -> DetGrowth:
    """``|det(CZ + D)|`` with ``Im z_nn`` swept over ``ynn_values`` (other entries fixed)."""
    ys = [float(y) for y in ynn_values]
    if any(b <= a for a, b in zip(ys, ys[1:])):
        raise ValueError("ynn values must be increasing")
    vals = [abs(cocycle_det(M, Zbase.with_ynn(y))) for y in ys]
    return DetGrowth(tuple(ys), tuple(vals), tuple(v / y for v, y in zip(vals, ys)))
