import math

import numpy as np
import pytest
from scipy import integrate

from chordcdf import densities
from chordcdf.densities import Gaussian, TruncatedGaussian, UniformDisc
from chordcdf.exceptions import DomainError

MODELS = [
    Gaussian(1 + 1j, [[1.0, 0.0], [0.0, 0.25]]),
    Gaussian(-0.5 + 0.2j, [[0.3, 0.1], [0.1, 0.2]]),
    UniformDisc(0.4 - 0.3j, 0.7),
    TruncatedGaussian(0.2 + 0.5j, [[0.2, -0.05], [-0.05, 0.1]], trunc_sigma=1.5),
]


def _mass(model, half=9.0):
    center, radius = model.support_disc(1e-14)
    r = min(radius, half)
    val, _ = integrate.dblquad(
        lambda y, x: float(model.pdf(complex(x, y))),
        center.real - r, center.real + r,
        lambda x: center.imag - math.sqrt(max(r * r - (x - center.real) ** 2, 0.0)),
        lambda x: center.imag + math.sqrt(max(r * r - (x - center.real) ** 2, 0.0)),
        epsabs=1e-10,
    )
    return val


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
def test_pdf_integrates_to_one(model):
    assert abs(_mass(model) - 1.0) < 1e-5


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
def test_samples_deterministic_and_splittable(model):
    a = model.sample(7, 100_000)
    np.testing.assert_array_equal(a, model.sample(7, 100_000))
    np.testing.assert_array_equal(a[70_000:], model.sample(7, 30_000, start=70_000))
    assert not np.array_equal(a[:100], model.sample(8, 100))


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
def test_samples_inside_support(model):
    z = model.sample(3, 50_000)
    b = model.support_bound()
    # Gaussian support discs carry all but 1e-12 of the mass
    assert np.all((np.abs(z) >= b.rho_min - 1e-12) & (np.abs(z) <= b.rho_max + 1e-12))


def test_gaussian_sample_moments():
    g = MODELS[0]
    z = g.sample(11, 400_000)
    pts = np.stack([z.real, z.imag])
    assert np.allclose(pts.mean(axis=1), [1.0, 1.0], atol=6e-3)
    assert np.allclose(np.cov(pts), [[1.0, 0.0], [0.0, 0.25]], atol=1e-2)


def test_uniform_disc_pdf_and_bound():
    u = UniformDisc(0.0, 2.0)
    assert u.pdf(0.5j) == pytest.approx(1 / (4 * math.pi))
    assert u.pdf(2.5) == 0.0
    b = u.support_bound()
    assert (b.rho_min, b.rho_max) == (0.0, 2.0)
    b = UniformDisc(3.0, 1.0).support_bound()
    assert (b.rho_min, b.rho_max) == (2.0, 4.0)


def _clip_to_support(model, origin, e, t0, t1):
    if model.boundary_circle is None:
        return t0, t1
    center, radius = model.boundary_circle
    v = origin - center
    b = (v * e.conjugate()).real
    disc = b * b - (abs(v) ** 2 - radius ** 2)
    if disc <= 0:
        return t0, t0
    root = math.sqrt(disc)
    return max(t0, -b - root), min(t1, -b + root)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
@pytest.mark.parametrize("origin,angle,t0,t1", [(0.3 + 0.1j, 0.4, 0.0, 1.2), (1j, 2.5, 0.2, 3.0)])
def test_ray_mass_matches_quadrature(model, origin, angle, t0, t1):
    # ray_mass expects an interval already clipped to the support disc
    e = complex(math.cos(angle), math.sin(angle))
    a, b = _clip_to_support(model, origin, e, t0, t1)
    ref, _ = integrate.quad(lambda t: float(model.pdf(origin + t * e)) * t, t0, t1,
                            epsabs=1e-13, limit=200, points=[a, b] if b > a else None)
    got = model.ray_mass(origin, angle, a, b) if b > a else 0.0
    assert abs(got - ref) < 1e-9


def test_invalid_parameters():
    with pytest.raises(DomainError):
        Gaussian(0, [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(DomainError):
        UniformDisc(0, -1.0)
    with pytest.raises(DomainError):
        TruncatedGaussian(0, np.eye(2), trunc_sigma=0.01)


def test_from_config_round_trip():
    g = densities.from_config({"type": "gaussian", "mean": [1, 1], "cov": [[1, 0], [0, 0.25]]})
    assert g.mean == 1 + 1j
    u = densities.from_config({"type": "uniform-disc", "center": [0, 0], "radius": 2})
    assert u.radius == 2.0
    with pytest.raises(DomainError):
        densities.from_config({"type": "cauchy"})
