"""Symmetry of the functions Delta_b and the mod-12 bookkeeping behind it.

For ``b`` in ``{0, 1/3, 2/3}``,

    Delta_b(z11, z12, z13) = Th_b(3 z11, 3/2 z12) Th_0(z11, z13 + z12/2)
                           + Th_{b+1/2}(3 z11, 3/2 z12) Th_{1/2}(z11, z13 + z12/2).

Expanding both products gives terms indexed by ``q, m`` in Z, ``j, l`` in {0, 1},
``k`` in {0..5} and a type ``e`` in {0, 1} (second product):

    z12-frequency  12q + 6l + 3j + 3b + k + 2e
    z13-frequency  12m + 2k + e
    z11-exponent   3 (4q - 2m + 2l + j + b + e/2)^2 + (6m + k + e/2)^2

Symmetry means every term has a partner with the two frequencies swapped and the
same ``z11``-exponent.  ``3b`` is kept as an integer throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .n3 import HALF, th1, th3
from .theta import TruncationBudget

__all__ = [
    "B_VALUES",
    "CongruenceClass",
    "CongruenceMatch",
    "NoPartnerError",
    "all_classes",
    "congruence_match",
    "brute_force_match",
    "coefficient_equality_check",
    "term_data",
    "delta_b_eval",
    "delta_variant",
    "delta_b_symmetry",
]

B_VALUES = (Fraction(0), Fraction(1, 3), Fraction(2, 3))


class NoPartnerError(ArithmeticError):
    """Raised if a class has no partner: this would falsify the symmetry argument."""


@dataclass(frozen=True, order=True)
class CongruenceClass:
    """Residue data ``(b, j, l, k)`` of a term of the given type ``e``."""

    b: Fraction
    j: int
    l: int
    k: int
    e: int = 0

    def __post_init__(self):
        if self.b not in B_VALUES:
            raise ValueError("b must be 0, 1/3 or 2/3")
        if self.j not in (0, 1) or self.l not in (0, 1) or self.e not in (0, 1):
            raise ValueError("j, l, e must be 0 or 1")
        if not 0 <= self.k <= 5:
            raise ValueError("k must lie in 0..5")

    @property
    def b3(self) -> int:
        return int(3 * self.b)

    def residue12(self) -> int:
        """The z12-frequency mod 12."""
        return (6 * self.l + 3 * self.j + self.b3 + self.k + 2 * self.e) % 12

    def residue13(self) -> int:
        return (2 * self.k + self.e) % 12


@dataclass(frozen=True)
class CongruenceMatch:
    source: CongruenceClass
    partner: CongruenceClass

    @property
    def branch(self) -> str:
        return "even" if self.partner.e == 0 else "odd"


def all_classes(e: int = 0) -> list[CongruenceClass]:
    """The 3 * 2 * 2 * 6 = 72 classes of type ``e``."""
    return [CongruenceClass(b, j, l, k, e)
            for b in B_VALUES for j in (0, 1) for l in (0, 1) for k in range(6)]


def congruence_match(c: CongruenceClass) -> CongruenceMatch:
    """Partner class solving the two swapped congruences.

    The partner type is the parity of the z12-frequency, ``k~`` is then fixed by
    ``2k~ + e~ = z12-frequency (mod 12)`` and ``6 l~ + 3 j~`` by the second congruence.
    """
    A = c.residue12()
    e2 = A % 2
    k2 = ((A - e2) // 2) % 6
    rhs = (2 * c.k + c.e - c.b3 - k2 - 2 * e2) % 12
    if rhs % 3:
        raise NoPartnerError(f"no (j~, l~) for {c}")
    r = rhs // 3  # 2 l~ + j~ = r (mod 4)
    l2, j2 = divmod(r, 2)
    return CongruenceMatch(c, CongruenceClass(c.b, j2, l2, k2, e2))


def brute_force_match(c: CongruenceClass) -> list[CongruenceMatch]:
    """All partners found by trying every ``(j~, l~, k~, e~)``; independent of the closed form."""
    out = []
    for j2, l2, k2, e2 in itertools.product((0, 1), (0, 1), range(6), (0, 1)):
        p = CongruenceClass(c.b, j2, l2, k2, e2)
        if p.residue13() == c.residue12() and p.residue12() == c.residue13():
            out.append(CongruenceMatch(c, p))
    return out


def term_data(c: CongruenceClass, q: int, m: int) -> tuple[Fraction, Fraction, Fraction]:
    """(z12-frequency, z13-frequency, z11-exponent) of the term ``(q, m)`` of class ``c``."""
    b, e = c.b, Fraction(c.e)
    f12 = 12 * q + 6 * c.l + 3 * c.j + 3 * b + c.k + 2 * e
    f13 = Fraction(12 * m + 2 * c.k) + e
    x = 4 * q - 2 * m + 2 * c.l + c.j + b + e / 2
    y = 6 * m + c.k + e / 2
    return f12, f13, 3 * x * x + y * y


def _partner_indices(c: CongruenceClass, p: CongruenceClass, q: int, m: int):
    f12, f13, _ = term_data(c, q, m)
    m2 = (f12 - 2 * p.k - p.e) / 12
    q2 = (f13 - 6 * p.l - 3 * p.j - 3 * p.b - p.k - 2 * p.e) / 12
    return q2, m2


def coefficient_equality_check(c: CongruenceClass, match: CongruenceMatch | CongruenceClass,
                               qm_range: range = range(-1, 2)) -> bool:
    """Exact check that each term ``(q, m)`` of ``c`` has the swapped partner term with equal z11-exponent.

    ``match`` may be a :class:`CongruenceMatch` or a bare partner class (for
    negative controls).  False if the partner indices are not integers or the
    exponents differ.
    """
    p = match.partner if isinstance(match, CongruenceMatch) else match
    if p.b != c.b:
        return False
    for q, m in itertools.product(qm_range, repeat=2):
        q2, m2 = _partner_indices(c, p, q, m)
        if q2.denominator != 1 or m2.denominator != 1:
            return False
        f12, f13, g = term_data(c, q, m)
        g12, g13, h = term_data(p, int(q2), int(m2))
        if (g12, g13) != (f13, f12) or g != h:
            return False
    return True


# -- numerics --------------------------------------------------------------------------------


def delta_b_eval(b, z11, z12, z13, budget: TruncationBudget = TruncationBudget()) -> complex:
    """``Delta_b(z11, z12, z13)``; ``b`` in ``{0, 1/3, 2/3}``."""
    b = Fraction(b)
    if b not in B_VALUES:
        raise ValueError("b must be 0, 1/3 or 2/3")
    w = z13 + z12 / 2
    return (th3(b, z11, z12, budget) * th1(0, z11, w, budget)
            + th3(b + HALF, z11, z12, budget) * th1(HALF, z11, w, budget))


def delta_variant(kind: int, sign: int, z11, z12, z13, budget: TruncationBudget = TruncationBudget()) -> complex:
    """``Delta_{1,+-}`` (``Delta_0``) or ``Delta_{2,+-}`` (``Delta_{1/3} + Delta_{2/3}``) with ``z13 +- z12/2``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    bs = {1: (Fraction(0),), 2: (Fraction(1, 3), Fraction(2, 3))}[kind]
    w = z13 + sign * z12 / 2
    return sum(th3(b, z11, z12, budget) * th1(0, z11, w, budget)
               + th3(b + HALF, z11, z12, budget) * th1(HALF, z11, w, budget) for b in bs)


def delta_b_symmetry(b, z11, z12, z13, budget: TruncationBudget = TruncationBudget()) -> float:
    """``|Delta_b(z11, z12, z13) - Delta_b(z11, z13, z12)|``."""
    if z12 == z13:
        return 0.0
    return abs(delta_b_eval(b, z11, z12, z13, budget) - delta_b_eval(b, z11, z13, z12, budget))
