"""Backend equivalence: the compiled and pure kernels must agree exactly."""

import random

import pytest

from corrdyn import _kernels_py as kpy

try:
    from corrdyn import _kernels_cy as kcy
except ImportError:  # pragma: no cover - extension not built
    kcy = None

needs_ext = pytest.mark.skipif(kcy is None, reason="compiled kernel not built")


def rand_poly(rng, deg):
    return [complex(rng.uniform(-3, 3), rng.uniform(-3, 3)) for _ in range(deg + 1)]


@needs_ext
def test_horner_bit_identical():
    rng = random.Random(11)
    for _ in range(300):
        coeffs = rand_poly(rng, rng.randint(0, 12))
        x = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        assert kpy.horner(coeffs, x) == kcy.horner(coeffs, x)


@needs_ext
def test_roots_bit_identical():
    rng = random.Random(12)
    for _ in range(500):
        deg = rng.randint(1, 9)
        coeffs = rand_poly(rng, deg)
        if rng.random() < 0.25:
            coeffs[0] = 0j
        r1 = kpy.roots(coeffs)
        r2 = kcy.roots(coeffs)
        assert (r1 is None) == (r2 is None)
        if r1 is not None:
            assert r1 == r2


@needs_ext
def test_batch_bit_identical():
    rng = random.Random(13)
    cols = [
        [-1 + 0j, -0.010101010101010102 + 0j],
        [0.010101010101010102 + 0j, 0j],
        [1 + 0j, 0j],
    ]
    zs = [complex(rng.uniform(-6, 6), rng.uniform(-6, 6)) for _ in range(2000)]
    f1, s1 = kpy.batch_fiber_roots(cols, 2, zs)
    f2, s2 = kcy.batch_fiber_roots(cols, 2, zs)
    assert s1 == s2
    assert f1 == f2


def test_roots_multiplicity_repetition():
    # (w - 1)^3: three nearly equal roots, all returned
    coeffs = [-1 + 0j, 3 + 0j, -3 + 0j, 1 + 0j]
    got = kpy.roots(coeffs)
    assert got is not None and len(got) == 3
    assert all(abs(r - 1) < 1e-4 for r in got)


def test_roots_zero_stripping():
    got = kpy.roots([0j, 0j, 2 + 0j])
    assert got == [0j, 0j]


def test_residual_floor_positive():
    coeffs = [1 + 0j, 2 + 0j, 3 + 0j]
    assert kpy.residual_floor(coeffs, 1 + 1j) > 0.0
