"""Probability models for an uncertain complex frequency-response value.

Three variants share one interface:

* :class:`Gaussian` -- bivariate normal on (Re, Im); unbounded support.
* :class:`UniformDisc` -- uniform on a closed disc.
* :class:`TruncatedGaussian` -- a Gaussian restricted to the disc of radius
  ``trunc_sigma * sigma_max`` about its mean and renormalised.

Every model can report a disc that carries (all, or all but
``mass_tolerance`` of) its mass, and can integrate ``pdf * rho`` along a ray
in closed form. The quadrature paths rely on both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, erfc

from .exceptions import DomainError
from .rng import counter_draws

__all__ = [
    "SupportBound",
    "DensityModel",
    "Gaussian",
    "UniformDisc",
    "TruncatedGaussian",
    "pdf",
    "sample",
    "support_bound",
    "from_config",
]

_MIN_TRUNC_SIGMA = 0.1


@dataclass(frozen=True)
class SupportBound:
    """Bounds ``rho_min <= |P| <= rho_max`` over the (effective) support."""

    rho_min: float
    rho_max: float

    def __post_init__(self):
        if not (0.0 <= self.rho_min <= self.rho_max < math.inf):
            raise DomainError(f"invalid modulus bounds ({self.rho_min}, {self.rho_max})")


def _disc_modulus_bounds(center, radius):
    m = abs(center)
    return SupportBound(max(0.0, m - radius), m + radius)


def _check_cov(cov):
    cov = np.array(cov, dtype=float)
    if cov.shape != (2, 2) or not np.all(np.isfinite(cov)):
        raise DomainError("cov must be a finite 2x2 matrix")
    if abs(cov[0, 1] - cov[1, 0]) > 1e-12 * max(1.0, np.abs(cov).max()):
        raise DomainError("cov must be symmetric")
    cov = 0.5 * (cov + cov.T)
    if np.linalg.eigvalsh(cov)[0] <= 0.0:
        raise DomainError("cov must be positive definite")
    cov.setflags(write=False)
    return cov


def _erf_diff(x0, x1):
    """``erf(x1) - erf(x0)`` without cancellation in the tails."""
    x0, x1 = np.broadcast_arrays(np.asarray(x0, float), np.asarray(x1, float))
    out = erf(x1) - erf(x0)
    pos = x0 >= 0.0
    neg = x1 <= 0.0
    out = np.where(pos, erfc(x0) - erfc(x1), out)
    out = np.where(neg, erfc(-x1) - erfc(-x0), out)
    return out


class DensityModel:
    """Common interface. Subclasses implement the underscored hooks."""

    #: (center, radius) of a circle across which the pdf jumps, or None
    boundary_circle = None

    def pdf(self, p):
        """Density at plane point(s) ``p``; zero outside the support."""
        raise NotImplementedError

    def sample(self, seed, n, start=0):
        """Draws ``start .. start+n-1`` of the counter-based stream for ``seed``."""
        if n < 1:
            raise DomainError("sample size must be >= 1")
        return counter_draws(seed, start, start + n, self._fill_block)

    def support_disc(self, mass_tolerance=1e-12):
        """(center, radius) of a disc holding all but ``mass_tolerance`` of the mass."""
        raise NotImplementedError

    def support_bound(self, mass_tolerance=1e-12):
        return _disc_modulus_bounds(*self.support_disc(mass_tolerance))

    def ray_mass(self, origin, angle, t0, t1):
        """``integral_{t0}^{t1} pdf(origin + t e^{i angle}) t dt``, vectorised.

        The interval is assumed to lie inside the support disc; the caller
        does the clipping.
        """
        raise NotImplementedError

    def _fill_block(self, gen, size):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Gaussian(DensityModel):
    """Bivariate normal with ``mean`` (complex) and 2x2 covariance of (Re, Im)."""

    mean: complex
    cov: np.ndarray
    _prec: np.ndarray = field(init=False, repr=False, compare=False)
    _norm: float = field(init=False, repr=False, compare=False)
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cov = _check_cov(self.cov)
        object.__setattr__(self, "mean", complex(self.mean))
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_prec", np.linalg.inv(cov))
        object.__setattr__(self, "_norm", 1.0 / (2.0 * math.pi * math.sqrt(np.linalg.det(cov))))
        object.__setattr__(self, "_chol", np.linalg.cholesky(cov))

    @property
    def sigma_max(self):
        return math.sqrt(np.linalg.eigvalsh(self.cov)[-1])

    def _mahalanobis2(self, p):
        dx = np.real(p) - self.mean.real
        dy = np.imag(p) - self.mean.imag
        P = self._prec
        return P[0, 0] * dx * dx + 2.0 * P[0, 1] * dx * dy + P[1, 1] * dy * dy

    def pdf(self, p):
        p = np.asarray(p, dtype=complex)
        return self._norm * np.exp(-0.5 * self._mahalanobis2(p))

    def _fill_block(self, gen, size):
        z = gen.standard_normal((size, 2)) @ self._chol.T
        return self.mean + (z[:, 0] + 1j * z[:, 1])

    def mahalanobis_radius(self, mass_tolerance):
        """``k`` with ``P(mahalanobis distance > k) = mass_tolerance`` (chi-square, 2 dof)."""
        if not 0.0 < mass_tolerance < 1e-3:
            raise DomainError("mass_tolerance must lie in (0, 1e-3) for an unbounded density")
        return math.sqrt(-2.0 * math.log(mass_tolerance))

    def support_disc(self, mass_tolerance=1e-12):
        # the disc of radius k*sigma_max contains the k-ellipse, so the
        # excluded mass is at most exp(-k^2 / 2) = mass_tolerance
        return self.mean, self.mahalanobis_radius(mass_tolerance) * self.sigma_max

    def _ray_gaussian(self, origin, angle, t0, t1):
        angle = np.asarray(angle, dtype=float)
        ux, uy = np.cos(angle), np.sin(angle)
        vx = origin.real - self.mean.real
        vy = origin.imag - self.mean.imag
        P = self._prec
        a = P[0, 0] * ux * ux + 2.0 * P[0, 1] * ux * uy + P[1, 1] * uy * uy
        b = (P[0, 0] * vx + P[0, 1] * vy) * ux + (P[0, 1] * vx + P[1, 1] * vy) * uy
        c = P[0, 0] * vx * vx + 2.0 * P[0, 1] * vx * vy + P[1, 1] * vy * vy
        t0 = np.asarray(t0, dtype=float)
        t1 = np.asarray(t1, dtype=float)
        m = -b / a
        q0 = np.maximum(c - b * b / a, 0.0)

        def quad_form(t):
            with np.errstate(invalid="ignore"):
                q = a * t * t + 2.0 * b * t + c
            return np.where(np.isinf(t), np.inf, q)

        term_exp = (np.exp(-0.5 * quad_form(t0)) - np.exp(-0.5 * quad_form(t1))) / a
        s = np.sqrt(0.5 * a)
        term_erf = m * np.exp(-0.5 * q0) * math.sqrt(math.pi / 2.0) / np.sqrt(a) * _erf_diff(
            (t0 - m) * s, (t1 - m) * s
        )
        out = self._norm * (term_exp + term_erf)
        return np.where(t1 > t0, np.maximum(out, 0.0), 0.0)

    def ray_mass(self, origin, angle, t0, t1):
        return self._ray_gaussian(complex(origin), angle, t0, t1)


@dataclass(frozen=True)
class UniformDisc(DensityModel):
    """Uniform density on the closed disc ``|P - center| <= radius``."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise DomainError("uniform disc radius must be positive and finite")
        if not (math.isfinite(self.center.real) and math.isfinite(self.center.imag)):
            raise DomainError("uniform disc center must be finite")

    @property
    def boundary_circle(self):
        return self.center, self.radius

    def pdf(self, p):
        p = np.asarray(p, dtype=complex)
        inside = np.abs(p - self.center) <= self.radius
        return np.where(inside, 1.0 / (math.pi * self.radius ** 2), 0.0)

    def _fill_block(self, gen, size):
        u = gen.random((size, 2))
        rho = self.radius * np.sqrt(u[:, 0])
        return self.center + rho * np.exp(2j * math.pi * u[:, 1])

    def support_disc(self, mass_tolerance=1e-12):
        return self.center, self.radius

    def ray_mass(self, origin, angle, t0, t1):
        t0 = np.asarray(t0, dtype=float)
        t1 = np.asarray(t1, dtype=float)
        out = 0.5 * (t1 * t1 - t0 * t0) / (math.pi * self.radius ** 2)
        return np.where(t1 > t0, out, 0.0) * np.ones_like(np.asarray(angle, float))


@dataclass(frozen=True, eq=False)
class TruncatedGaussian(DensityModel):
    """Gaussian conditioned on ``|P - mean| <= trunc_sigma * sigma_max``."""

    mean: complex
    cov: np.ndarray
    trunc_sigma: float = 8.0
    _base: Gaussian = field(init=False, repr=False, compare=False)
    _mass: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.trunc_sigma >= _MIN_TRUNC_SIGMA:
            raise DomainError(
                f"trunc_sigma must be >= {_MIN_TRUNC_SIGMA} (rejection sampling would stall)"
            )
        base = Gaussian(self.mean, self.cov)
        object.__setattr__(self, "mean", base.mean)
        object.__setattr__(self, "cov", base.cov)
        object.__setattr__(self, "_base", base)
        object.__setattr__(self, "_mass", self._disc_mass(base, self.radius))

    @staticmethod
    def _disc_mass(base, radius):
        # polar coordinates about the mean: the radial integral is closed form
        # and the angular integrand is smooth and periodic, so the trapezoid
        # rule converges geometrically
        previous = None
        n = 64
        while True:
            theta = 2.0 * math.pi * np.arange(n) / n
            mass = float(np.mean(base.ray_mass(base.mean, theta, 0.0, radius))) * 2.0 * math.pi
            if previous is not None and abs(mass - previous) <= 1e-15:
                return mass
            previous = mass
            n *= 2

    @property
    def radius(self):
        return self.trunc_sigma * self._base.sigma_max

    @property
    def mass(self):
        """Probability the untruncated Gaussian assigns to the truncation disc."""
        return self._mass

    @property
    def boundary_circle(self):
        return self.mean, self.radius

    def pdf(self, p):
        p = np.asarray(p, dtype=complex)
        inside = np.abs(p - self.mean) <= self.radius
        return np.where(inside, self._base.pdf(p) / self._mass, 0.0)

    def _fill_block(self, gen, size):
        out = np.empty(size, dtype=complex)
        filled = 0
        batch = max(16, int(1.1 * size / max(self._mass, 1e-3)))
        while filled < size:
            cand = self._base._fill_block(gen, batch)
            cand = cand[np.abs(cand - self.mean) <= self.radius]
            take = min(cand.size, size - filled)
            out[filled:filled + take] = cand[:take]
            filled += take
        return out

    def support_disc(self, mass_tolerance=1e-12):
        return self.mean, self.radius

    def ray_mass(self, origin, angle, t0, t1):
        return self._base.ray_mass(origin, angle, t0, t1) / self._mass


def pdf(model, p):
    return model.pdf(p)


def sample(model, seed, n, start=0):
    return model.sample(seed, n, start=start)


def support_bound(model, mass_tolerance=1e-12):
    return model.support_bound(mass_tolerance)


def _complex(value, key):
    try:
        re, im = value
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise DomainError(f"{key} must be a [re, im] pair") from None


def from_config(spec):
    """Build a model from the JSON form used in experiment configs.

    ``{"type": "gaussian", "mean": [1, 1], "cov": [[1, 0], [0, 0.25]]}``,
    ``{"type": "uniform-disc", "center": [0, 0], "radius": 2}`` or
    ``{"type": "truncated-gaussian", ..., "trunc_sigma": 8}``.
    """
    kind = spec.get("type")
    if kind == "gaussian":
        return Gaussian(_complex(spec["mean"], "mean"), spec["cov"])
    if kind == "uniform-disc":
        return UniformDisc(_complex(spec["center"], "center"), float(spec["radius"]))
    if kind == "truncated-gaussian":
        return TruncatedGaussian(
            _complex(spec["mean"], "mean"), spec["cov"], float(spec.get("trunc_sigma", 8.0))
        )
    raise DomainError(f"unknown density type {kind!r}")
