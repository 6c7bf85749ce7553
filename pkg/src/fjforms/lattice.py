"""Integer points in ellipsoids and certified Gaussian tail bounds.

The enumeration is the usual Fincke-Pohst recursion on the upper-triangular
factor of the Gram matrix; the innermost coordinate is vectorised.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "EnumerationOverflow",
    "TruncationError",
    "ellipsoid_points",
    "gaussian_tail",
    "radius_for_tail",
    "fsum_complex",
]

DEFAULT_CAP = 10**7


class EnumerationOverflow(RuntimeError):
    def __init__(self, cap):
        super().__init__(f"enumeration exceeded the cap of {cap} points")
        self.cap = cap


class TruncationError(RuntimeError):
    """Raised when a certified tail would need a radius beyond the budget."""

    def __init__(self, needed_radius, max_radius):
        super().__init__(
            f"certified truncation needs lattice radius {needed_radius:.2f} > max_radius {max_radius}"
        )
        self.needed_radius = needed_radius
        self.max_radius = max_radius


def _upper_factor(G):
    """Return (q, diag) with Q(x) = sum_i diag[i] * (x_i + sum_{j>i} q[i, j] x_j)^2."""
    G = np.asarray(G, dtype=float)
    d = G.shape[0]
    Q = G.copy()
    q = np.zeros((d, d))
    diag = np.zeros(d)
    for i in range(d):
        diag[i] = Q[i, i]
        if diag[i] <= 0:
            raise ValueError("Gram matrix is not positive definite")
        for j in range(i + 1, d):
            q[i, j] = Q[i, j] / diag[i]
        for j in range(i + 1, d):
            for k in range(j, d):
                Q[j, k] -= q[i, j] * q[i, k] * diag[i]
                Q[k, j] = Q[j, k]
    return q, diag


def ellipsoid_points(G, R2, center=None, cap=DEFAULT_CAP):
    """All integer ``k`` with ``(k - center)^t G (k - center) <= R2``, lexicographically sorted.

    A relative slack of 1e-10 on ``R2`` keeps boundary points that rounding
    would otherwise drop; callers that need an exact cut filter afterwards.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    d = G.shape[0]
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float).reshape(d)
    if R2 < 0:
        return np.zeros((0, d), dtype=np.int64)
    R2 = R2 * (1 + 1e-10) + 1e-300
    q, diag = _upper_factor(G)
    out = []
    count = 0
    k = np.zeros(d, dtype=np.int64)

    def rec(i, remaining):
        nonlocal count
        # centre of coordinate i given the already chosen k_{i+1..d-1}
        ci = c[i] - sum(q[i, j] * (k[j] - c[j]) for j in range(i + 1, d))
        half = math.sqrt(max(remaining, 0.0) / diag[i])
        lo, hi = math.ceil(ci - half), math.floor(ci + half)
        if lo > hi:
            return
        if i == 0:
            xs = np.arange(lo, hi + 1, dtype=np.int64)
            block = np.empty((xs.size, d), dtype=np.int64)
            block[:] = k
            block[:, 0] = xs
            count += xs.size
            if count > cap:
                raise EnumerationOverflow(cap)
            out.append(block)
            return
        for x in range(lo, hi + 1):
            k[i] = x
            rec(i - 1, remaining - diag[i] * (x - ci) ** 2)
        k[i] = 0

    rec(d - 1, R2)
    if not out:
        return np.zeros((0, d), dtype=np.int64)
    pts = np.concatenate(out)
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def gaussian_tail(dim, lam, R2, decay):
    """Upper bound for ``sum exp(-decay * Q(v))`` over lattice-coset points with ``Q(v) > R2``.

    ``Q`` is any positive definite form with ``Q(v) >= lam * |v|^2``.  Points are
    grouped in unit shells ``R2 + j < Q <= R2 + j + 1``; a shell holds at most
    ``(2 sqrt((R2 + j + 1) / lam) + 1)^dim`` points of any translate of Z^dim.
    """
    R2 = max(R2, 0.0)
    total = 0.0
    j = 0
    while True:
        count = (2.0 * math.sqrt((R2 + j + 1) / lam) + 1.0) ** dim
        term = count * math.exp(-decay * (R2 + j))
        total += term
        if term < 1e-17 * total or term == 0.0:
            break
        j += 1
    return total


def radius_for_tail(dim, lam, tol, decay, prefactor=1.0, start=0.0, log_prefactor=0.0):
    """Smallest ``R2`` on a 1/8 grid above ``start`` with ``prefactor * tail <= tol``.

    ``log_prefactor`` multiplies the prefactor by ``exp(log_prefactor)`` without overflow.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    log_target = math.log(tol) - math.log(prefactor) - log_prefactor
    # decay * R2 must at least cover -log_target; start there
    R2 = max(start, -log_target / decay - 1.0, 0.0)
    R2 = math.floor(R2 * 8) / 8
    while True:
        tail = gaussian_tail(dim, lam, R2, decay)
        if tail == 0.0 or math.log(tail) <= log_target:
            return R2
        R2 += 0.125


def fsum_complex(terms) -> complex:
    """Correctly rounded sum of complex terms (order independent)."""
    terms = np.asarray(terms, dtype=complex).ravel()
    return complex(math.fsum(terms.real), math.fsum(terms.imag))
