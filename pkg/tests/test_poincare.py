import itertools
from fractions import Fraction

import numpy as np
import pytest

from fjforms.poincare import (
    CosetTruncation,
    complete_pair,
    detgrowth_probe,
    enumerate_cosets,
    gl_sum_bound,
    hermite_form,
    truncated_poincare,
)
from fjforms.symmat import HalfEvenMatrix, SymplecticElement, UpperHalfPoint, random_symplectic_word
from fjforms.theta import TruncationBudget
from fjforms.unimod import unimodular_subseries


def test_coset_counts_n1():
    # classes of coprime (c, d) up to sign with |c|, |d| <= H
    for H, expected in ((1, 4), (2, 8)):
        reps, heights, keys = enumerate_cosets(1, H)
        assert len(reps) == expected
        brute = {(c, d) if (c, d) > (-c, -d) else (-c, -d)
                 for c in range(-H, H + 1) for d in range(-H, H + 1)
                 if np.gcd(c, d) == 1}
        assert len(brute) == expected


def test_coset_count_n2():
    reps, heights, keys = enumerate_cosets(2, 1)
    assert len(reps) == 68
    assert reps[0] == SymplecticElement.identity(2)
    assert len(set(keys)) == 68


@pytest.mark.slow
def test_coset_count_n2_height2():
    assert len(enumerate_cosets(2, 2)[0]) == 1108


def test_height_zero_is_identity():
    reps, heights, _ = enumerate_cosets(3, 0)
    assert len(reps) == 1 and reps[0] == SymplecticElement.identity(3)


def test_hermite_form_is_class_invariant(rng):
    C = np.array([[1, 0], [0, 2]])
    D = np.array([[3, 0], [0, 1]])
    V = np.array([[2, 1], [1, 1]])
    assert hermite_form(C, D) == hermite_form(V @ C, V @ D)


def test_complete_pair():
    M = complete_pair([[1, 0], [0, 2]], [[3, 0], [0, 1]])
    assert np.array_equal(M.C, [[1, 0], [0, 2]])
    with pytest.raises(ValueError):
        complete_pair([[2]], [[4]])


def test_weight_guard():
    with pytest.raises(ValueError):
        CosetTruncation.build(2, 0, 5)


def test_identity_coset_is_unimodular_subseries():
    T = HalfEvenMatrix.jacobi_normal([[3]], Fraction(1, 2))
    Z = UpperHalfPoint.from_complex([[0.1 + 1.2j, 0.2 + 0.1j], [0.2 + 0.1j, 0.3 + 1.5j]])
    b = TruncationBudget(1e-14)
    v = truncated_poincare(T, Z, trunc=CosetTruncation.build(2, 0, 6), budget=b, relative=True)
    G = unimodular_subseries(T, Z, b, relative=True, weight=6)
    assert abs(v.value - G) <= 1e-13 * abs(G)


def test_height_one_truncation():
    T = HalfEvenMatrix.jacobi_normal([[3]], Fraction(1, 2))
    Z = UpperHalfPoint.from_complex([[0.1 + 1.2j, 0.2 + 0.1j], [0.2 + 0.1j, 0.3 + 1.5j]])
    v = truncated_poincare(T, Z, trunc=CosetTruncation.build(2, 1, 6), budget=TruncationBudget(1e-14),
                           relative=True)
    assert len(v.terms) == 68
    assert v.min_abs_det >= 1.0
    assert abs(v.value - sum(v.terms)) <= 1e-12 * max(abs(t) for t in v.terms)
    assert v.frontier_max == max(abs(t) for t in v.terms[1:])


def test_gl_sum_bound_dominates():
    T = np.array([[1.0, 0.5], [0.5, 1.0]])
    Y = np.eye(2)
    from fjforms.unimod import enumerate_bounded

    s = enumerate_bounded(T, Y, 30.0).traces()
    assert np.exp(-2 * np.pi * s).sum() <= gl_sum_bound(T, Y)


def test_detgrowth(rng):
    Z = UpperHalfPoint.from_complex(np.diag([1.2j, 1.3j, 1.0j]) + 0.1)
    for _ in range(5):
        W = random_symplectic_word(3, 6, rng, lambda M: bool(M.C[:, -1].any()))
        g = detgrowth_probe(W, Z, [10, 100, 1000])
        assert g.increasing and g.ratio_spread <= 0.1
        K = random_symplectic_word(3, 6, rng, lambda M: M.is_klingen())
        assert detgrowth_probe(K, Z, [10, 100, 1000]).constant_spread <= 1e-12
    with pytest.raises(ValueError):
        detgrowth_probe(W, Z, [100, 10])
