"""Siegel upper half-space points, integral matrix types and symplectic action.

Conventions used throughout the package:

* a point ``Z = X + iY`` of the upper half-space is split as
  ``[[Zhat, zhat], [zhat^t, znn]]`` where ``Zhat`` is the leading
  ``(n-1) x (n-1)`` block;
* unimodular matrices act by ``Z -> U^t Z U``;
* symplectic matrices ``M = [[A, B], [C, D]]`` act by
  ``Z -> (AZ + B)(CZ + D)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "UpperHalfPoint",
    "HalfEvenMatrix",
    "UnimodularMatrix",
    "SymplecticElement",
    "NotPositiveDefinite",
    "is_positive_definite",
    "int_det",
    "frac_matrix",
    "frac_det",
    "frac_inverse",
    "symplectic_action",
    "cocycle_det",
    "numerical_rank",
    "random_symplectic_word",
]


class NotPositiveDefinite(ValueError):
    pass


def is_positive_definite(Y, rel_pivot=1e-12):
    """Cholesky test with a pivot threshold relative to the largest diagonal entry."""
    Y = np.array(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        return False
    if not np.allclose(Y, Y.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Y).max(initial=0))):
        return False
    n = Y.shape[0]
    scale = np.max(np.diag(Y), initial=0.0)
    if scale <= 0:
        return False
    L = np.zeros_like(Y)
    for j in range(n):
        pivot = Y[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= rel_pivot * scale:
            return False
        L[j, j] = np.sqrt(pivot)
        for i in range(j + 1, n):
            L[i, j] = (Y[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return True


# -- exact integer / rational helpers -------------------------------------------------


def int_det(M) -> int:
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    A = [[int(x) for x in row] for row in np.asarray(M).tolist()]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def frac_matrix(M) -> tuple[tuple[Fraction, ...], ...]:
    """Convert nested numbers (ints, floats, strings, Fractions) to a Fraction matrix."""
    rows = M.tolist() if isinstance(M, np.ndarray) else M
    out = []
    for row in rows:
        out.append(tuple(x if isinstance(x, Fraction) else Fraction(x) for x in row))
    return tuple(out)


def _frac_echelon(M):
    A = [list(r) for r in M]
    n = len(A)
    det = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if A[r][k] != 0), None)
        if piv is None:
            return A, Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            if f:
                for j in range(k, len(A[i])):
                    A[i][j] -= f * A[k][j]
    return A, det


def frac_det(M) -> Fraction:
    return _frac_echelon(frac_matrix(M))[1]


def frac_inverse(M):
    """Exact inverse of a rational matrix (Gauss-Jordan)."""
    F = frac_matrix(M)
    n = len(F)
    A = [list(F[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = next((r for r in range(k, n) if A[r][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[k], A[piv] = A[piv], A[k]
        p = A[k][k]
        A[k] = [x / p for x in A[k]]
        for i in range(n):
            if i != k and A[i][k] != 0:
                f = A[i][k]
                A[i] = [a - f * b for a, b in zip(A[i], A[k])]
    return tuple(tuple(row[n:]) for row in A)


def _leading_minors_positive(F) -> bool:
    n = len(F)
    return all(frac_det([row[:k] for row in F[:k]]) > 0 for k in range(1, n + 1))


def _readonly(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


# -- upper half-space points -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UpperHalfPoint:
    """A point ``Z = X + iY`` of the Siegel upper half-space of degree ``n``."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if X.shape != Y.shape or X.shape[0] != X.shape[1]:
            raise ValueError(f"X and Y must be square of equal size, got {X.shape}, {Y.shape}")
        tol = 1e-12 * max(1.0, np.abs(X).max(initial=0), np.abs(Y).max(initial=0))
        if not np.allclose(X, X.T, rtol=0, atol=tol) or not np.allclose(Y, Y.T, rtol=0, atol=tol):
            raise ValueError("X and Y must be symmetric")
        if not is_positive_definite(Y):
            raise NotPositiveDefinite("imaginary part is not positive definite")
        object.__setattr__(self, "X", _readonly((X + X.T) / 2))
        object.__setattr__(self, "Y", _readonly((Y + Y.T) / 2))

    @classmethod
    def from_complex(cls, Z) -> "UpperHalfPoint":
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        return cls(Z.real, Z.imag)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def Z(self) -> np.ndarray:
        return self.X + 1j * self.Y

    @property
    def Zhat(self) -> "UpperHalfPoint":
        if self.n < 2:
            raise ValueError("degree-1 points have no leading block")
        return UpperHalfPoint(self.X[:-1, :-1], self.Y[:-1, :-1])

    @property
    def zhat(self) -> np.ndarray:
        return self.Z[:-1, -1].copy()

    @property
    def znn(self) -> complex:
        return complex(self.Z[-1, -1])

    @property
    def xnn(self) -> float:
        return float(self.X[-1, -1])

    @property
    def ynn(self) -> float:
        return float(self.Y[-1, -1])

    @classmethod
    def from_blocks(cls, Zhat, zhat, znn) -> "UpperHalfPoint":
        Zh = Zhat.Z if isinstance(Zhat, UpperHalfPoint) else np.atleast_2d(np.asarray(Zhat, complex))
        zh = np.asarray(zhat, dtype=complex).reshape(-1)
        d = Zh.shape[0]
        Z = np.empty((d + 1, d + 1), dtype=complex)
        Z[:d, :d] = Zh
        Z[:d, d] = zh
        Z[d, :d] = zh
        Z[d, d] = znn
        return cls.from_complex(Z)

    def with_ynn(self, ynn: float) -> "UpperHalfPoint":
        Y = self.Y.copy()
        Y[-1, -1] = ynn
        return UpperHalfPoint(self.X, Y)

    def transformed(self, U) -> "UpperHalfPoint":
        """Return ``U^t Z U``."""
        U = np.asarray(U.array if isinstance(U, UnimodularMatrix) else U, dtype=float)
        return UpperHalfPoint(U.T @ self.X @ U, U.T @ self.Y @ U)

    def __repr__(self):
        return f"UpperHalfPoint(Z={np.array2string(self.Z, precision=6)})"


# -- integral matrix types ----------------------------------------------------------------


@dataclass(frozen=True)
class HalfEvenMatrix:
    """Symmetric positive definite matrix, integer diagonal, half-integral off-diagonal."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        F = frac_matrix(self.entries)
        n = len(F)
        if any(len(r) != n for r in F):
            raise ValueError("matrix must be square")
        for i in range(n):
            if F[i][i].denominator != 1 or F[i][i] <= 0:
                raise ValueError(f"diagonal entry T[{i},{i}] = {F[i][i]} is not a positive integer")
            for j in range(n):
                if F[i][j] != F[j][i]:
                    raise ValueError("matrix is not symmetric")
                if (2 * F[i][j]).denominator != 1:
                    raise ValueError(f"off-diagonal entry T[{i},{j}] = {F[i][j]} not in (1/2)Z")
        if not _leading_minors_positive(F):
            raise NotPositiveDefinite("half-even matrix is not positive definite")
        object.__setattr__(self, "entries", F)

    @classmethod
    def jacobi_normal(cls, That, t1n) -> "HalfEvenMatrix":
        """Build ``[[That, t1n e_1], [t1n e_1^t, 1]]``."""
        H = frac_matrix(That)
        d = len(H)
        rows = [list(r) + [Fraction(t1n) if i == 0 else Fraction(0)] for i, r in enumerate(H)]
        rows.append([Fraction(t1n) if j == 0 else Fraction(0) for j in range(d)] + [Fraction(1)])
        return cls(tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.entries])

    @property
    def hat(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(r[:-1] for r in self.entries[:-1])

    @property
    def t1n(self) -> Fraction:
        return self.entries[0][-1]

    def is_jacobi_normal(self) -> bool:
        n = self.n
        e = self.entries
        return (
            n >= 2
            and e[-1][-1] == 1
            and all(e[i][-1] == 0 for i in range(1, n - 1))
            and e[0][-1] in (Fraction(0), Fraction(1, 2))
        )

    def hat_min_eigenvalue(self) -> float:
        H = np.array([[float(x) for x in r] for r in self.hat])
        return float(np.linalg.eigvalsh(H).min())


@dataclass(frozen=True)
class UnimodularMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        E = tuple(tuple(int(x) for x in row) for row in np.asarray(self.entries).tolist())
        if any(len(r) != len(E) for r in E):
            raise ValueError("matrix must be square")
        if int_det(E) not in (1, -1):
            raise ValueError("matrix is not unimodular")
        object.__setattr__(self, "entries", E)

    @classmethod
    def identity(cls, n: int) -> "UnimodularMatrix":
        return cls(np.eye(n, dtype=int))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    @property
    def det(self) -> int:
        return int_det(self.entries)

    @property
    def first_column(self) -> tuple[int, ...]:
        return tuple(r[0] for r in self.entries)

    def inverse(self) -> "UnimodularMatrix":
        inv = frac_inverse(self.entries)
        return UnimodularMatrix(tuple(tuple(int(x) for x in r) for r in inv))

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(self.array @ other.array)


# -- symplectic group -------------------------------------------------------------------


def _int_block(a, n):
    a = np.asarray(a)
    if a.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} block, got {a.shape}")
    if not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.asarray(a, dtype=float) == np.round(np.asarray(a, dtype=float))):
            raise ValueError("symplectic blocks must be integral")
    return _readonly(np.round(np.asarray(a, dtype=float)).astype(np.int64), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SymplecticElement:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.A).shape[0]
        blocks = [_int_block(getattr(self, k), n) for k in "ABCD"]
        for k, b in zip("ABCD", blocks):
            object.__setattr__(self, k, b)
        A, B, C, D = (b.astype(object) for b in blocks)
        ok = (
            np.array_equal(A.T.dot(C), C.T.dot(A))
            and np.array_equal(B.T.dot(D), D.T.dot(B))
            and np.array_equal(A.T.dot(D) - C.T.dot(B), np.eye(n, dtype=int).astype(object))
        )
        if not ok:
            raise ValueError("blocks do not satisfy the symplectic relations")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    def __matmul__(self, other: "SymplecticElement") -> "SymplecticElement":
        M = self.matrix.astype(object).dot(other.matrix.astype(object))
        n = self.n
        return SymplecticElement(
            np.array(M[:n, :n], dtype=np.int64),
            np.array(M[:n, n:], dtype=np.int64),
            np.array(M[n:, :n], dtype=np.int64),
            np.array(M[n:, n:], dtype=np.int64),
        )

    def inverse(self) -> "SymplecticElement":
        return SymplecticElement(self.D.T, -self.B.T, -self.C.T, self.A.T)

    def __eq__(self, other):
        return isinstance(other, SymplecticElement) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    # generators
    @classmethod
    def identity(cls, n: int) -> "SymplecticElement":
        I, O = np.eye(n, dtype=int), np.zeros((n, n), dtype=int)
        return cls(I, O, O, I)

    @classmethod
    def translation(cls, S) -> "SymplecticElement":
        S = np.atleast_2d(np.asarray(S))
        n = S.shape[0]
        I, O = np.eye(n, dtype=int), np.zeros((n, n), dtype=int)
        return cls(I, S, O, I)

    @classmethod
    def rotation(cls, U) -> "SymplecticElement":
        """``Z -> U Z U^t`` (blocks ``A = U``, ``D = U^{-t}``)."""
        U = U if isinstance(U, UnimodularMatrix) else UnimodularMatrix(np.atleast_2d(U))
        n = U.n
        O = np.zeros((n, n), dtype=int)
        return cls(U.array, O, O, U.inverse().array.T)

    @classmethod
    def inversion(cls, n: int) -> "SymplecticElement":
        I, O = np.eye(n, dtype=int), np.zeros((n, n), dtype=int)
        return cls(O, -I, I, O)

    @classmethod
    def partial_inversion(cls, n: int, k: int) -> "SymplecticElement":
        """The inversion ``(0, -1; 1, 0)`` acting in coordinate ``k`` only."""
        e = np.zeros((n, n), dtype=int)
        e[k, k] = 1
        I = np.eye(n, dtype=int)
        return cls(I - e, -e, e, I - e)

    @classmethod
    def embed_reduced(cls, Mhat: "SymplecticElement") -> "SymplecticElement":
        """Embed an element of degree ``n-1`` in the reduced block form of degree ``n``."""
        d = Mhat.n

        def pad(b, corner):
            out = np.zeros((d + 1, d + 1), dtype=int)
            out[:d, :d] = b
            out[d, d] = corner
            return out

        return cls(pad(Mhat.A, 1), pad(Mhat.B, 0), pad(Mhat.C, 0), pad(Mhat.D, 1))

    def is_klingen(self) -> bool:
        """Membership in the set with vanishing last column of ``C``."""
        return not np.any(self.C[:, -1])

    def reduced_block(self) -> "SymplecticElement":
        """Return ``Mhat`` if this element is in reduced block form, else raise."""
        n = self.n
        probe = SymplecticElement.embed_reduced(
            SymplecticElement(self.A[:-1, :-1], self.B[:-1, :-1], self.C[:-1, :-1], self.D[:-1, :-1])
        ) if n > 1 else None
        if probe is None or probe != self:
            raise ValueError("element is not in reduced block form")
        return SymplecticElement(self.A[:-1, :-1], self.B[:-1, :-1], self.C[:-1, :-1], self.D[:-1, :-1])


def symplectic_action(M: SymplecticElement, Z: UpperHalfPoint) -> UpperHalfPoint:
    if M.n != Z.n:
        raise ValueError("dimension mismatch")
    Zc = Z.Z
    num = M.A @ Zc + M.B
    den = M.C @ Zc + M.D
    try:
        W = np.linalg.solve(den.T, num.T).T
    except np.linalg.LinAlgError as exc:
        raise ValueError("CZ + D is singular; input is not symplectic") from exc
    W = (W + W.T) / 2
    return UpperHalfPoint.from_complex(W)


def cocycle_det(M: SymplecticElement, Z: UpperHalfPoint) -> complex:
    return complex(np.linalg.det(M.C @ Z.Z + M.D))


def numerical_rank(A, tol: float = 1e-8) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        raise ValueError("empty matrix has no rank")
    s = np.linalg.svd(np.atleast_2d(A), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def _generators(n: int, rng, max_entry: int = 1):
    """Draw one generator: translation, partial inversion or elementary rotation."""
    kind = rng.integers(3)
    if kind == 0:
        S = rng.integers(-max_entry, max_entry + 1, size=(n, n))
        S = np.triu(S) + np.triu(S, 1).T
        return SymplecticElement.translation(S)
    if kind == 1:
        return SymplecticElement.partial_inversion(n, int(rng.integers(n)))
    U = np.eye(n, dtype=int)
    if n > 1:
        i, j = rng.choice(n, size=2, replace=False)
        U[i, j] = rng.choice([-1, 1])
    else:
        U[0, 0] = -1
    return SymplecticElement.rotation(U)


def random_symplectic_word(n: int, length: int, rng, predicate=None, max_tries: int = 10000):
    """Product of ``length`` random generators, optionally rejection-sampled on ``predicate``."""
    for _ in range(max_tries):
        M = SymplecticElement.identity(n)
        for _ in range(length):
            M = M @ _generators(n, rng)
        if predicate is None or predicate(M):
            return M
    raise RuntimeError("no symplectic word satisfied the predicate")
