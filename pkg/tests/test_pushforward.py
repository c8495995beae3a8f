import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chordcdf import pushforward as pf
from chordcdf.densities import Gaussian, UniformDisc
from chordcdf.exceptions import DegenerateNominalError, DomainError


@given(st.floats(0.2, 3), st.floats(-math.pi, math.pi), st.floats(0.05, 3), st.floats(0.01, 0.99))
def test_intersections_solve_both_circles(r, phase, s, frac):
    nominal = r * complex(math.cos(phase), math.sin(phase))
    lo, hi = (r - s) ** 2, (r + s) ** 2
    z = lo + frac * (hi - lo)
    w = 1 + s * s
    if pf.classify(z, w, nominal) != pf.TWO:
        return
    pair = pf.intersections(z, w, nominal)
    for p in (pair.p1, pair.p2):
        assert abs(abs(p - nominal) ** 2 - z) <= 1e-10 * max(1.0, z)
        assert abs(abs(p) ** 2 + 1 - w) <= 1e-10 * w
    assert pair.c2 >= 0.0


def test_classify_cases():
    n = 1.0
    assert pf.classify(1.0, 2.0, n) == pf.TWO
    assert pf.classify(0.0, 2.0, n) == pf.TANGENT
    assert pf.classify(4.0, 2.0, n) == pf.TANGENT
    assert pf.classify(5.0, 2.0, n) == pf.EMPTY
    with pytest.raises(DomainError):
        pf.intersections(5.0, 2.0, n)


def test_density_zero_outside_band_and_flags_tangency():
    dens, flag = pf.joint_density_zw([0.0, 1.0, 9.0], [2.0, 2.0, 2.0], 1.0,
                                     UniformDisc(0, 3), with_flag=True)
    assert dens[0] == 0.0 and flag[0]
    assert dens[1] > 0.0 and not flag[1]
    assert dens[2] == 0.0


def test_nominal_at_origin_rejected():
    with pytest.raises(DegenerateNominalError):
        pf.joint_density_zw(1.0, 2.0, 0.0, UniformDisc(0, 1))


def test_density_matches_jacobian_formula():
    model = Gaussian(0.3 + 0.2j, [[0.5, 0.1], [0.1, 0.4]])
    nominal = 0.8 - 0.4j
    z, w = 0.7, 1.5
    pair = pf.intersections(z, w, nominal)
    r = abs(nominal)
    expected = (model.pdf(pair.p1) + model.pdf(pair.p2)) / (4 * r * r * pair.c2)
    assert pf.joint_density_zw(z, w, nominal, model) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("rule", [pf.DOUBLE_EXPONENTIAL, pf.ENDPOINT_SUBSTITUTION])
@pytest.mark.parametrize("model,nominal", [
    (UniformDisc(0.2 + 0.1j, 1.0), 0.6 + 0.3j),
    (UniformDisc(0.0, 2.0), 0.5j),
    (Gaussian(1 + 1j, [[1.0, 0.0], [0.0, 0.25]]), 1 + 1j),
])
def test_normalization(model, nominal, rule):
    res = pf.rectangle_probability((0.0, math.inf), (1.0, math.inf), nominal, model, rule=rule)
    assert abs(res.value - 1.0) < 1e-6


def test_inner_rules_agree():
    model = UniformDisc(0.2 + 0.1j, 1.0)
    a = pf.z_marginal(1.3, 0.1, 0.9, 0.6 + 0.3j, model, rule=pf.DOUBLE_EXPONENTIAL)
    b = pf.z_marginal(1.3, 0.1, 0.9, 0.6 + 0.3j, model, rule=pf.ENDPOINT_SUBSTITUTION)
    assert abs(a.value - b.value) < 1e-9


def test_rectangle_matches_direct_count():
    model = UniformDisc(0.0, 1.0)
    nominal = 0.5
    res = pf.rectangle_probability((0.1, 0.6), (1.2, 1.7), nominal, model)
    z = model.sample(5, 2_000_000)
    zz, ww = np.abs(z - nominal) ** 2, np.abs(z) ** 2 + 1
    frac = np.mean((zz > 0.1) & (zz < 0.6) & (ww > 1.2) & (ww < 1.7))
    sigma = math.sqrt(frac * (1 - frac) / z.size)
    assert abs(res.value - frac) < 4 * sigma
