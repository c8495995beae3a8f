import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chordcdf import quadrature
from chordcdf.exceptions import ConvergenceError


def test_inverse_sqrt_endpoint_singularity():
    res = quadrature.tanh_sinh(lambda x: x ** -0.5, 0.0, 1.0)
    assert res.converged
    assert abs(res.value - 2.0) < 1e-10


def test_offsets_resolve_both_endpoints():
    # 1 / sqrt((x - a)(b - x)) integrates to pi on any interval
    res = quadrature.tanh_sinh(lambda x, da, db: 1.0 / np.sqrt(da * db), 3.0, 3.0 + 1e-3,
                               offsets=True)
    assert abs(res.value - math.pi) < 1e-10


def test_reversed_limits_flip_sign():
    fwd = quadrature.tanh_sinh(np.exp, 0.0, 1.0)
    back = quadrature.tanh_sinh(np.exp, 1.0, 0.0)
    assert back.value == -fwd.value
    assert abs(fwd.value - (math.e - 1.0)) < 1e-12


def test_vector_integrand_extra_rows():
    res = quadrature.tanh_sinh(lambda x: np.vstack([x, x * x]), 0.0, 1.0)
    assert abs(res.value - 0.5) < 1e-12
    assert abs(res.extra[0] - 1.0 / 3.0) < 1e-12


def test_adaptive_handles_kink():
    res = quadrature.adaptive_tanh_sinh(lambda x: np.abs(x - 0.3), 0.0, 1.0, abs_tol=1e-11)
    assert abs(res.value - (0.3 ** 2 + 0.7 ** 2) / 2) < 1e-9


@given(st.integers(0, 12), st.floats(-3, 3), st.floats(0.1, 4))
def test_polynomials_exact(deg, a, width):
    b = a + width
    exact = (b ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
    for rule in (quadrature.tanh_sinh, quadrature.gauss_legendre):
        res = rule(lambda x: x ** deg, a, b)
        assert abs(res.value - exact) <= 1e-9 * max(1.0, abs(exact))


def test_gauss_legendre_smooth():
    res = quadrature.gauss_legendre(np.cos, 0.0, math.pi / 2)
    assert res.converged and abs(res.value - 1.0) < 1e-13


def test_integrate_pieces_sums():
    res = quadrature.integrate_pieces(quadrature.gauss_legendre, np.ones_like, [0.0, 2.0, 1.0, 1.0])
    assert abs(res.value - 2.0) < 1e-14


def test_require_converged_raises_with_estimate():
    bad = quadrature.QuadResult(0.5, 0.1, 10, False)
    with pytest.raises(ConvergenceError) as info:
        quadrature.require_converged(bad, "probe")
    assert info.value.estimate == 0.5 and info.value.error == 0.1
