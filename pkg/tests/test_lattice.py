import itertools
import math

import numpy as np
import pytest

from fjforms.lattice import (
    EnumerationOverflow,
    TruncationError,
    ellipsoid_points,
    fsum_complex,
    gaussian_tail,
    radius_for_tail,
)


def _brute(G, R2, center, box=8):
    G = np.asarray(G, float)
    pts = []
    for k in itertools.product(range(-box, box + 1), repeat=G.shape[0]):
        v = np.array(k) - center
        if v @ G @ v <= R2 * (1 + 1e-10):
            pts.append(k)
    return sorted(pts)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_ellipsoid_matches_brute_force(d, rng):
    L = rng.normal(size=(d, d))
    G = L @ L.T + 0.5 * np.eye(d)
    center = rng.uniform(-1, 1, d)
    got = [tuple(p) for p in ellipsoid_points(G, 6.0, center)]
    assert got == _brute(G, 6.0, center, box=6)


def test_circle_counts():
    # r2(0) + r2(1) + r2(2) = 1 + 4 + 4
    assert len(ellipsoid_points(np.eye(2), 2.0)) == 9
    assert len(ellipsoid_points(np.eye(2), -1.0)) == 0


def test_cap():
    with pytest.raises(EnumerationOverflow):
        ellipsoid_points(np.eye(3), 100.0, cap=50)


def test_gaussian_tail_bounds_the_truth():
    # 1-dim sum of exp(-2 pi lam k^2) over |k| > sqrt(R2 / lam)
    lam, R2 = 1.0, 4.0
    true = 2 * sum(math.exp(-2 * math.pi * lam * k * k) for k in range(3, 50))
    bound = gaussian_tail(1, lam, R2, 2 * math.pi)
    assert true <= bound


def test_radius_for_tail_monotone():
    r1 = radius_for_tail(2, 1.0, 1e-8, 2 * math.pi)
    r2 = radius_for_tail(2, 1.0, 1e-14, 2 * math.pi)
    assert r2 > r1
    assert gaussian_tail(2, 1.0, r2, 2 * math.pi) <= 1e-14
    # a huge prefactor in log space does not overflow
    r3 = radius_for_tail(2, 1.0, 1e-12, 2 * math.pi, log_prefactor=2000.0)
    assert math.isfinite(r3) and r3 > r2


def test_fsum_complex():
    assert fsum_complex([1e16, 1.0, -1e16]) == 1.0
    assert fsum_complex([]) == 0j


def test_truncation_error_message():
    e = TruncationError(70.0, 60)
    assert e.needed_radius == 70.0 and "60" in str(e)
