import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from fjforms import appendix as ap

THIRD = Fraction(1, 3)


def test_class_validation():
    with pytest.raises(ValueError):
        ap.CongruenceClass(Fraction(1, 2), 0, 0, 0)
    with pytest.raises(ValueError):
        ap.CongruenceClass(THIRD, 0, 0, 6)
    assert len(ap.all_classes()) == 72


def test_all_zero_class():
    c = ap.CongruenceClass(Fraction(0), 0, 0, 0)
    m = ap.congruence_match(c)
    assert (m.partner.j, m.partner.l, m.partner.k, m.branch) == (0, 0, 0, "even")
    assert ap.coefficient_equality_check(c, m)
    assert ap.term_data(c, 0, 0)[2] == 0


def test_golden_class():
    c = ap.CongruenceClass(THIRD, 1, 0, 2)
    (bf,) = ap.brute_force_match(c)
    # frozen from the brute force over all candidate partners
    assert (bf.partner.j, bf.partner.l, bf.partner.k, bf.branch) == (0, 0, 3, "even")
    assert ap.congruence_match(c) == bf


@pytest.mark.parametrize("e", [0, 1])
def test_exhaustive_match(e):
    for c in ap.all_classes(e):
        m = ap.congruence_match(c)
        assert ap.brute_force_match(c) == [m]
        assert ap.coefficient_equality_check(c, m)
        assert ap.congruence_match(m.partner).partner == c


def test_both_branches_occur():
    branches = {ap.congruence_match(c).branch for c in ap.all_classes()}
    assert branches == {"even", "odd"}


def test_negative_control():
    c = ap.CongruenceClass(THIRD, 1, 0, 2)
    p = ap.congruence_match(c).partner
    assert not ap.coefficient_equality_check(c, dataclasses.replace(p, k=(p.k + 1) % 6))
    assert not ap.coefficient_equality_check(c, dataclasses.replace(p, b=Fraction(0)))


@pytest.mark.parametrize("b", ap.B_VALUES)
def test_delta_b_symmetric(b, rng):
    for _ in range(20):
        z11 = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(0.8, 2.0)
        z12, z13 = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.3, 0.3, 2)
        assert ap.delta_b_symmetry(b, z11, z12, z13) <= 1e-10
    assert ap.delta_b_symmetry(b, 1j, 0.2, 0.2) == 0.0


def test_delta_b_not_trivially_symmetric():
    # the single products are not symmetric; only the sum is
    z11, z12, z13 = 0.1 + 1j, 0.3 + 0.1j, -0.2
    one = lambda x, y: ap.th3(0, z11, x) * ap.th1(0, z11, y + x / 2)
    assert abs(one(z12, z13) - one(z13, z12)) > 1e-3


def test_delta_variants():
    z11, z12, z13 = 0.1 + 1.1j, 0.2 + 0.1j, -0.3 + 0.05j
    for kind in (1, 2):
        lhs = ap.delta_variant(kind, 1, z11, -z12, z13)
        assert abs(lhs - ap.delta_variant(kind, -1, z11, z12, z13)) <= 1e-12
        m = ap.delta_variant(kind, -1, z11, z12, z13)
        assert abs(m - ap.delta_variant(kind, -1, z11, z13, z12)) <= 1e-10
    assert ap.delta_variant(1, 1, z11, z12, z13) == pytest.approx(ap.delta_b_eval(0, z11, z12, z13), abs=1e-14)
    s = ap.delta_b_eval(THIRD, z11, z12, z13) + ap.delta_b_eval(2 * THIRD, z11, z12, z13)
    assert ap.delta_variant(2, 1, z11, z12, z13) == pytest.approx(s, abs=1e-14)
