import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chordcdf import lti, margins
from chordcdf.exceptions import SingularInterconnectionError
from chordcdf.margins import FreqPoint

finite = st.floats(-50, 50, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def _power_iteration(m, iters=500):
    v = np.array([1.0, 0.3 + 0.2j])
    gram = m.conj().T @ m
    for _ in range(iters):
        v = gram @ v
        v /= np.linalg.norm(v)
    return float(np.sqrt(np.real(v.conj() @ gram @ v)))


def test_gang_of_four_examples():
    np.testing.assert_array_equal(margins.gang_of_four(FreqPoint(0, 0, 0)), [[0, 0], [0, 1]])
    np.testing.assert_array_equal(margins.gang_of_four(FreqPoint(0, 1, 0)), [[0, 1], [0, 1]])


def test_singular_interconnection():
    with pytest.raises(SingularInterconnectionError):
        margins.gang_of_four(FreqPoint(1.0, 1.0, 1.0))
    assert margins.rho(FreqPoint(1.0, 1.0, 1.0), strict=False) == 0.0


@given(cplx, cplx)
def test_gang_of_four_rank_one(p, c):
    fp = FreqPoint(1.0, p, c)
    if abs(fp.return_difference) <= 1e-6:
        return
    s = np.linalg.svd(margins.gang_of_four(fp), compute_uv=False)
    assert s[1] <= 1e-10 * s[0]


def test_sigma_max_examples():
    assert margins.sigma_max_2x2(np.eye(2)) == 1.0
    assert margins.sigma_max_2x2(np.diag([3.0, 4.0])) == 4.0


def test_sigma_max_vs_power_iteration(rng):
    for _ in range(200):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        ref = _power_iteration(m)
        assert abs(margins.sigma_max_2x2(m) - ref) <= 1e-12 * ref
        assert abs(margins.sigma_max_2x2(m) - np.linalg.norm(m, 2)) <= 1e-12 * ref


def test_rho_examples():
    assert margins.rho(FreqPoint(0, 0, 0)) == 1.0


@given(cplx, cplx)
def test_rho_closed_form_matches_svd(p, c):
    fp = FreqPoint(2.0, p, c)
    if abs(fp.return_difference) <= 1e-6:
        return
    svd = 1.0 / np.linalg.svd(margins.gang_of_four(fp), compute_uv=False)[0]
    assert abs(margins.rho_closed_form(p, c) - svd) <= 1e-10
    assert abs(margins.rho(fp) - svd) <= 1e-10


def test_rho_in_unit_interval(rng):
    p = (rng.normal(size=100_000) + 1j * rng.normal(size=100_000)) * rng.lognormal(0, 2, 100_000)
    c = (rng.normal(size=100_000) + 1j * rng.normal(size=100_000)) * rng.lognormal(0, 2, 100_000)
    r = margins.rho_closed_form(p, c)
    assert np.all((r >= 0) & (r <= 1 + 1e-12))


def test_gap_zero_at_nominal():
    assert margins.degradation_gap(FreqPoint(1.0, 0.3 + 0.2j, -1.5), 0.3 + 0.2j) == 0.0


def test_degradation_inequality_randomized(rng):
    n = 10_000
    scale = rng.lognormal(0, 1.5, (3, n))
    P, Pn, C = (rng.normal(size=(3, n)) + 1j * rng.normal(size=(3, n))) * scale
    gaps = []
    for p, pn, c in zip(P, Pn, C):
        fp = FreqPoint(1.0, p, c)
        if min(abs(1 - c * p), abs(1 - c * pn)) <= 1e-12:
            continue
        gaps.append(margins.degradation_gap(fp, pn))
    assert min(gaps) >= -1e-9


def test_degradation_inequality_adversarial(rng):
    for _ in range(2000):
        pn = complex(*rng.normal(size=2)) * 3
        c = 1 / pn * (1 + 1e-6 * complex(*rng.normal(size=2)))
        p = pn + 1e-3 * complex(*rng.normal(size=2))
        assert margins.degradation_gap(FreqPoint(1.0, p, c), pn) >= -1e-9


def test_b_margin_trivial_cases():
    zero = lti.RationalTF([0.0], [1.0])
    grid = np.logspace(-2, 4, 50)
    assert margins.b_margin_grid(zero, zero, grid) == 1.0
    unstable = lti.RationalTF([1.0], [-1.0, 1.0])
    assert margins.b_margin_grid(unstable, zero, grid) == 0.0


def test_b_margin_three_pole_refinement():
    plant = lti.three_pole(2.0, 0.1)
    ctrl = lti.RationalTF([-1.0], [1.0])  # unity negative feedback
    coarse = np.logspace(-2, 4, 2000)
    fine = np.logspace(-2, 4, 20000)
    b1 = margins.b_margin_grid(plant, ctrl, coarse)
    b2 = margins.b_margin_grid(plant, ctrl, fine)
    assert 0 < b2 <= b1
    assert b1 - b2 < 1e-4
    assert margins.b_margin_grid(plant, ctrl, np.union1d(coarse, [17.3205])) <= b1


def test_positive_unity_feedback_is_unstable():
    # C = +1 closes 1 - P with P(0) = 2: a real pole in the right half plane
    assert not margins.is_internally_stable(lti.three_pole(2.0, 0.1), lti.RationalTF([1.0], [1.0]))
