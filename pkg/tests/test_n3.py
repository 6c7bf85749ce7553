import math

import numpy as np
import pytest

from fjforms import n3
from fjforms.symmat import HalfEvenMatrix
from fjforms.theta import TruncationBudget

KEYS = ["(0,0),1", "(0,0),2", "(1/2,0),1", "(1/2,0),2", "(0,1/2),1", "(0,1/2),2", "(0,1/2),3",
        "(1/2,1/2),1", "(1/2,1/2),2", "(1/2,1/2),3"]


@pytest.fixture(scope="module")
def gtilde():
    return n3.gtilde_counterexample()


@pytest.fixture(scope="module")
def siegel_profile():
    return n3.extract_psi_profile(n3.SiegelLayerSource(), n3.default_z11_grid(3), grid=12,
                                  provenance="fourier-jacobi")


def test_grid():
    g = n3.default_z11_grid()
    assert len(g) == 8 and np.allclose(g.real, 0.3) and g.imag.min() == 1.0 and g.imag.max() == 2.5


def test_index3_identity():
    # Th_b(3 t, 3/2 z) via index 3 equals the direct index-1 sum
    t, z = 0.1 + 0.7j, 0.2 - 0.1j
    for b in (0, 0.5):
        direct = sum(np.exp(2j * math.pi * (k + b) ** 2 * 3 * t + 4j * math.pi * (k + b) * 1.5 * z)
                     for k in range(-20, 21))
        assert abs(n3.th3(b, t, z) - direct) < 1e-13


def test_synthetic_round_trip(rng):
    g = n3.default_z11_grid(3)
    psi = {k: rng.normal(size=3) + 1j * rng.normal(size=3) for k in KEYS}
    prof = n3.extract_psi_profile(n3.synthetic_phi(psi, g, higher=0.5), g)
    for k in KEYS:
        assert np.abs(prof[k] - psi[k]).max() <= 1e-10


def test_y22_floor():
    with pytest.raises(ValueError):
        n3.extract_psi_profile(n3.gtilde_phi(), n3.default_z11_grid(2), y22=2.0)


def test_zero_profile():
    g = n3.default_z11_grid(2)
    prof = n3.extract_psi_profile(lambda a, s: np.zeros(len(s), complex), g, grid=4)
    assert n3.fj_symmetry_residual(prof) == 0.0


def test_gtilde_vanishing_and_prefactor(gtilde):
    assert np.abs(gtilde.psi_half_011).max() <= 1e-10
    assert gtilde.prefactor_error() <= 1e-8
    assert abs(gtilde.prefactor - 12) <= 1e-8


def test_gtilde_exponent_matches_oracle(gtilde):
    # the fitted exponent is 3/2 pi; the brute-force oracle agrees
    assert gtilde.exponent / math.pi == pytest.approx(1.5, abs=1e-9)
    assert gtilde.oracle_exponent == pytest.approx(gtilde.exponent, abs=1e-9)
    assert abs(gtilde.oracle_prefactor - 12) <= 1e-8


def test_gtilde_witness(gtilde):
    assert gtilde.witness() >= 1.0
    assert gtilde.witness() == pytest.approx(12.0, abs=1e-8)


def test_gtilde_only_for_stated_T():
    with pytest.raises(ValueError):
        n3.gtilde_counterexample(T=HalfEvenMatrix(((2, 0, 0), (0, 2, 0), (0, 0, 1))))
    with pytest.raises(ValueError):
        n3.gtilde_counterexample(z11_grid=[0.3 + 0.5j, 0.3 + 1j])


def test_siegel_profile_symmetry(siegel_profile):
    s = siegel_profile.scale()
    assert n3.fj_symmetry_residual(siegel_profile) <= 1e-8 * s
    assert np.abs(siegel_profile["(0,0),2"]).min() > 1e-6 * s


def test_siegel_profile_closure_and_parity(siegel_profile):
    s = siegel_profile.scale()
    assert siegel_profile.closure_residual() <= 1e-9 * s
    assert siegel_profile.parity_residual() <= 1e-9 * s


def test_layer_parity():
    src = n3.SiegelLayerSource()
    z11 = 0.3 + 1.2j
    z12 = np.array([0.17 + 0.05j, -0.3 + 0.1j])
    for a in n3.CHARS:
        plus = n3.psi_layer(src, a, z11, z12, grid=12)
        minus = n3.psi_layer(src, a, z11, -z12, grid=12)
        assert np.abs(plus - minus).max() <= 1e-9 * max(np.abs(plus).max(), 1e-300)


def test_delta_symmetry_when_relation_holds(rng):
    psi = {k: complex(*rng.normal(size=2)) for k in KEYS}
    psi["(1/2,0),1"] = psi["(0,0),2"]
    psi["(0,1/2),3"] = psi["(0,1/2),2"]
    for _ in range(5):
        z11 = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(0.9, 1.8)
        z12, z13, z23 = rng.uniform(-0.5, 0.5, 3) + 1j * rng.uniform(-0.2, 0.2, 3)
        assert n3.delta_full_symmetry(psi, z11, z12, z13, z23) <= 1e-9


def test_delta_same_point_is_zero():
    psi = {k: 1.0 for k in KEYS}
    assert n3.delta_full_symmetry(psi, 1j, 0.1, 0.1, 0.2) == 0.0


def test_delta_breaks_for_gtilde(gtilde):
    psi = {k: v[0] for k, v in gtilde.profile.values.items()}
    z11 = gtilde.z11[0]
    res = n3.delta_full_symmetry(psi, z11, 0.2 + 0.05j, -0.3 + 0.1j, 0.1)
    assert res > 1e-6 * abs(psi["(0,0),2"])


def test_jacobi_form_invariance(rng):
    form = n3.JacobiIndexOneForm(n3.gtilde_phi(), "free-jacobi")
    assert form.invariance_defect(rng, npts=2) <= 1e-10


def test_crossing_weight():
    r1 = n3.crossing_weight(1e-4, 1e6, 1.0, 3.0, 1.0)
    r2 = n3.crossing_weight(1e-2, 1e6, 1.0, 3.0, 1.0)
    assert r1 >= r2 >= 8 and r1 % 2 == 0
    assert 1e6 * 2.0 ** -r1 * math.exp(2 * math.pi * 4) < 1e-4
