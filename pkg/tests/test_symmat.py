from fractions import Fraction

import numpy as np
import pytest

from fjforms.symmat import (
    HalfEvenMatrix,
    NotPositiveDefinite,
    SymplecticElement,
    UnimodularMatrix,
    UpperHalfPoint,
    cocycle_det,
    frac_det,
    frac_inverse,
    int_det,
    is_positive_definite,
    numerical_rank,
    random_symplectic_word,
    symplectic_action,
)

H = Fraction(1, 2)


def test_positive_definite():
    assert is_positive_definite(np.eye(3))
    assert not is_positive_definite([[1, 2], [2, 1]])
    assert not is_positive_definite([[1, 0], [1, 1]])


def test_exact_helpers():
    assert int_det([[2, 1], [7, 4]]) == 1
    assert int_det(np.diag([2, 3, 5])) == 30
    assert frac_det([[1, H], [H, 1]]) == Fraction(3, 4)
    inv = frac_inverse([[1, H], [H, 1]])
    assert inv == ((Fraction(4, 3), Fraction(-2, 3)), (Fraction(-2, 3), Fraction(4, 3)))


def test_half_even_validation():
    T = HalfEvenMatrix(((1, H, 0), (H, 1, 0), (0, 0, 1)))
    assert T.n == 3 and T.is_jacobi_normal()
    with pytest.raises(ValueError):
        HalfEvenMatrix(((H, 0), (0, 1)))
    with pytest.raises(ValueError):
        HalfEvenMatrix(((1, Fraction(1, 3)), (Fraction(1, 3), 1)))
    with pytest.raises(NotPositiveDefinite):
        HalfEvenMatrix(((1, 1), (1, 1)))


def test_jacobi_normal_blocks():
    T = HalfEvenMatrix.jacobi_normal([[4, 1], [1, 4]], H)
    assert T.hat == ((4, 1), (1, 4))
    assert T.t1n == H
    assert T.entries[2] == (H, 0, 1)
    assert T.hat_min_eigenvalue() == pytest.approx(3.0)


def test_upper_half_point():
    P = UpperHalfPoint.from_complex([[0.1 + 1j, 0.2], [0.2, 2j]])
    assert P.n == 2
    assert P.znn == 2j
    assert P.Zhat.Z[0, 0] == 0.1 + 1j
    assert P.with_ynn(5.0).ynn == 5.0
    with pytest.raises(NotPositiveDefinite):
        UpperHalfPoint.from_complex([[1j, 2j], [2j, 1j]])
    Q = UpperHalfPoint.from_blocks([[1j]], [0.3], 2j)
    assert np.allclose(Q.Z, [[1j, 0.3], [0.3, 2j]])


def test_unimodular():
    U = UnimodularMatrix([[2, 1], [1, 1]])
    assert U.det == 1
    assert (U @ U.inverse()).entries == ((1, 0), (0, 1))
    with pytest.raises(ValueError):
        UnimodularMatrix([[2, 0], [0, 1]])


def test_symplectic_relations_enforced():
    with pytest.raises(ValueError):
        SymplecticElement(np.eye(2), np.eye(2), np.eye(2), np.eye(2))


def test_generators_and_words(rng):
    J = SymplecticElement.inversion(2).matrix
    for _ in range(10):
        M = random_symplectic_word(3, 5, rng)
        Mm = M.matrix
        assert np.array_equal(Mm.T @ SymplecticElement.inversion(3).matrix @ Mm, SymplecticElement.inversion(3).matrix)
        assert (M @ M.inverse()) == SymplecticElement.identity(3)
    assert J.shape == (4, 4)


def test_action_is_a_group_action(rng):
    Z = UpperHalfPoint.from_complex([[0.1 + 1.2j, 0.1 + 0.1j], [0.1 + 0.1j, -0.2 + 0.9j]])
    for _ in range(5):
        M1 = random_symplectic_word(2, 4, rng)
        M2 = random_symplectic_word(2, 4, rng)
        lhs = symplectic_action(M1 @ M2, Z).Z
        rhs = symplectic_action(M1, symplectic_action(M2, Z)).Z
        assert np.allclose(lhs, rhs, atol=1e-10)
        # cocycle relation for det(CZ + D)
        j12 = cocycle_det(M1 @ M2, Z)
        j = cocycle_det(M1, symplectic_action(M2, Z)) * cocycle_det(M2, Z)
        assert abs(j12 - j) <= 1e-9 * abs(j)


def test_klingen_and_reduced_block():
    Mh = SymplecticElement.inversion(1)
    M = SymplecticElement.embed_reduced(Mh)
    assert M.is_klingen()
    assert M.reduced_block() == Mh
    assert not SymplecticElement.partial_inversion(2, 1).is_klingen()
    with pytest.raises(ValueError):
        SymplecticElement.partial_inversion(2, 1).reduced_block()


def test_numerical_rank():
    assert numerical_rank(np.diag([1.0, 1e-3, 1e-12])) == 2
    assert numerical_rank(np.zeros((2, 2))) == 0
    with pytest.raises(ValueError):
        numerical_rank(np.eye(2), tol=0)
