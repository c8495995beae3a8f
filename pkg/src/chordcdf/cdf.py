"""CDF of the chordal distance ``K = chordal_distance(P, nominal)``.

Two independent routes are implemented.

:func:`cdf_theorem1`
    Writes ``K <= d`` as ``z <= d^2 (1 + r^2) w`` for the pushforward
    variables ``(z, w)`` and integrates their joint density: outer in ``w``
    over the modulus range of the support, inner in ``z`` from the lower band
    edge ``(r - s)^2`` to ``min(d^2 (1 + r^2) w, (r + s)^2)``. Requires a
    nominal point away from the origin.

:func:`cdf_ball`
    Integrates the density over the exact planar image of the chordal ball
    (a disc, a half-plane, or the outside of a disc) intersected with the
    support disc, in polar coordinates about the ball centre. The radial
    integral is closed form (see ``DensityModel.ray_mass``), leaving a
    one-dimensional angular integral. Works for any nominal point, and is the
    default entry point.

Both integrals are split at every angle/radius where the integrand has a
kink or an edge singularity, so each piece is smooth apart from endpoint
behaviour that the tanh-sinh rule absorbs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import montecarlo, quadrature
from .densities import DensityModel, SupportBound
from .exceptions import ConvergenceError, DegenerateNominalError, DomainError
from .pushforward import (
    DOUBLE_EXPONENTIAL,
    ENDPOINT_SUBSTITUTION,
    integrate_over_w,
    z_marginal,
)
from .riemann import (
    EXTERIOR,
    HALF_PLANE,
    INTERIOR,
    PlaneDisc,
    boundary_meets_circle,
    chordal_ball_plane,
)

__all__ = [
    "QuadratureSpec",
    "CdfQuery",
    "CdfCurve",
    "cdf_theorem1",
    "cdf_ball",
    "cdf_curve",
    "METHODS",
]

THEOREM1 = "theorem1"
BALL = "ball"
MONTE_CARLO = "monte-carlo"
METHODS = (THEOREM1, BALL, MONTE_CARLO)

_MIN_NOMINAL = 1e-6
_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and rule choices for the CDF integrators.

    ``outer_truncation`` overrides the modulus range otherwise derived from
    the model's support with ``mass_tolerance``.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 4
    inner_rule: str = DOUBLE_EXPONENTIAL
    mass_tolerance: float = 1e-12
    outer_truncation: SupportBound | None = None
    max_level: int = 7

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise DomainError("quadrature tolerances must be positive")
        if self.inner_rule not in (DOUBLE_EXPONENTIAL, ENDPOINT_SUBSTITUTION):
            raise DomainError(f"unknown inner rule {self.inner_rule!r}")


@dataclass(frozen=True)
class CdfQuery:
    model: DensityModel
    nominal: complex
    d: float

    def __post_init__(self):
        object.__setattr__(self, "nominal", complex(self.nominal))
        if not (0.0 <= self.d <= 1.0):
            raise DomainError(f"threshold d must lie in [0, 1], got {self.d}")
        if not (math.isfinite(self.nominal.real) and math.isfinite(self.nominal.imag)):
            raise DomainError("nominal must be finite")


@dataclass
class CdfCurve:
    """Sampled CDF of ``K`` on an ascending grid of thresholds."""

    thresholds: np.ndarray
    values: np.ndarray
    method: str
    errors: np.ndarray
    tolerances: dict = field(default_factory=dict)

    def to_csv_rows(self):
        for d, F, e in zip(self.thresholds, self.values, self.errors):
            yield (float(d), float(F), self.method, float(e))


def _query(model_or_query, nominal, d):
    if isinstance(model_or_query, CdfQuery):
        return model_or_query
    return CdfQuery(model_or_query, nominal, d)


def _finish(res, what, full_output):
    quadrature.require_converged(res, what)
    value = min(max(res.value, 0.0), 1.0 + 1e-9)
    if full_output:
        return quadrature.QuadResult(value, res.error, res.n_eval, res.converged)
    return value


def _modulus_range(model, spec):
    if spec.outer_truncation is not None:
        return spec.outer_truncation
    return model.support_bound(spec.mass_tolerance)


def _tangent_radii(r, k):
    """Radii ``s`` where ``k (1 + s^2) = (r +- s)^2`` (inner limit meets a band edge)."""
    out = []
    for sign in (1.0, -1.0):
        # (k - 1) s^2 - 2 sign r s + (k - r^2) = 0
        a, b, c = k - 1.0, -2.0 * sign * r, k - r * r
        if abs(a) < 1e-14:
            if b != 0.0:
                out.append(-c / b)
            continue
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            continue
        root = math.sqrt(disc)
        out.extend([(-b + root) / (2.0 * a), (-b - root) / (2.0 * a)])
    return [s for s in out if s >= 0.0 and math.isfinite(s)]


def _circle_radii(center, radius):
    m = abs(center)
    return [m + radius, abs(m - radius)]


def cdf_theorem1(model, nominal=None, d=None, spec=QuadratureSpec(), *, full_output=False):
    """``P(K <= d)`` from the joint density of ``(z, w)``.

    Parameters
    ----------
    model : DensityModel or CdfQuery
    nominal : complex
        Nominal point; ``|nominal| >= 1e-6``.
    d : float
        Threshold in ``[0, 1]``.
    spec : QuadratureSpec
    full_output : bool
        Return a :class:`~chordcdf.quadrature.QuadResult` instead of a float.

    Raises
    ------
    DegenerateNominalError
        Nominal too close to the origin; use :func:`cdf_ball`.
    ConvergenceError
        Tolerance not met; carries the best estimate and its error.
    """
    q = _query(model, nominal, d)
    model, nominal, d = q.model, q.nominal, q.d
    r = abs(nominal)
    if r < _MIN_NOMINAL:
        raise DegenerateNominalError("|nominal| < 1e-6: route this query to cdf_ball")
    if d == 0.0:
        return _finish(quadrature.ZERO, "cdf_theorem1", full_output)

    k = d * d * (1.0 + r * r)
    bound = _modulus_range(model, spec)
    w_lo, w_hi = 1.0 + bound.rho_min ** 2, 1.0 + bound.rho_max ** 2
    support = model.support_disc(spec.mass_tolerance)
    circles = [support]
    if model.boundary_circle is not None:
        circles.append(model.boundary_circle)

    s_breaks = []
    for c in circles:
        s_breaks.extend(_circle_radii(*c))
    if d < 1.0:
        s_breaks.extend(_tangent_radii(r, k))
        ball = chordal_ball_plane(nominal, d)
        for c in circles:
            s_breaks.extend(abs(p) for p in boundary_meets_circle(ball, *c))
    if len(circles) == 2:
        s_breaks.extend(abs(p) for p in boundary_meets_circle(
            _as_disc(*circles[0]), *circles[1]))

    inner_tol = 0.01 * spec.abs_tol

    def g(ws):
        vals = np.empty(len(ws))
        errs = np.empty(len(ws))
        for i, w in enumerate(ws):
            s = math.sqrt(w - 1.0)
            res = z_marginal(w, (r - s) ** 2, k * w, nominal, model, rule=spec.inner_rule,
                             abs_tol=inner_tol, rel_tol=spec.rel_tol)
            vals[i] = res.value
            errs[i] = res.error if res.converged else max(res.error, abs(res.value))
        return vals, errs

    res = integrate_over_w(g, w_lo, w_hi, s_breaks, abs_tol=spec.abs_tol, rel_tol=spec.rel_tol,
                           max_level=spec.max_level, max_subdivisions=spec.max_subdivisions)
    return _finish(res, f"cdf_theorem1(d={d})", full_output)


def _as_disc(center, radius):
    return PlaneDisc(INTERIOR, center=complex(center), radius=radius)


def _ray_support_interval(origin, theta, center, radius):
    """Parameter interval ``[t0, t1]`` (``t >= 0``) of the ray inside the support disc."""
    v = origin - center
    ux, uy = np.cos(theta), np.sin(theta)
    vu = v.real * ux + v.imag * uy
    disc = vu * vu - (abs(v) ** 2 - radius * radius)
    root = np.sqrt(np.maximum(disc, 0.0))
    t0 = np.maximum(-vu - root, 0.0)
    t1 = np.maximum(-vu + root, 0.0)
    empty = disc <= 0.0
    return np.where(empty, 0.0, t0), np.where(empty, 0.0, t1)


def _angles_to(origin, points):
    return [math.atan2((p - origin).imag, (p - origin).real) for p in points]


def cdf_ball(model, nominal=None, d=None, spec=QuadratureSpec(), *, full_output=False):
    """``P(K < d)`` by integrating the density over the planar image of the chordal ball.

    Same signature as :func:`cdf_theorem1`; valid for every nominal point.
    """
    q = _query(model, nominal, d)
    model, nominal, d = q.model, q.nominal, q.d
    if d == 0.0:
        return _finish(quadrature.ZERO, "cdf_ball", full_output)
    center_s, radius_s = model.support_disc(spec.mass_tolerance)
    center_s = complex(center_s)

    lo_ang = hi_ang = 0.0
    if d >= 1.0:
        # every point is within chordal distance 1: integrate the whole support
        ball = None
        origin = center_s
    else:
        ball = chordal_ball_plane(nominal, d)
        origin = ball.center
        if ball.kind == HALF_PLANE:
            phi = math.atan2(ball.normal.imag, ball.normal.real)
            lo_ang, hi_ang = phi - 0.5 * math.pi, phi + 0.5 * math.pi

    def g(theta):
        t0, t1 = _ray_support_interval(origin, theta, center_s, radius_s)
        if ball is not None and ball.kind == INTERIOR:
            t1 = np.minimum(t1, ball.radius)
        elif ball is not None and ball.kind == EXTERIOR:
            t0 = np.maximum(t0, ball.radius)
        return model.ray_mass(origin, theta, t0, np.maximum(t1, t0))

    # kinks: tangents from the origin to the support circle, and the corners
    # where the ball boundary crosses the support circle
    angles = []
    offset = abs(center_s - origin)
    if offset > radius_s:
        base = math.atan2((center_s - origin).imag, (center_s - origin).real)
        half = math.asin(radius_s / offset)
        angles.extend([base - half, base + half])
    if ball is not None:
        angles.extend(_angles_to(origin, boundary_meets_circle(ball, center_s, radius_s)))

    if ball is not None and ball.kind == HALF_PLANE:
        breaks = [lo_ang, hi_ang] + [
            a for a in (lo_ang + (x - lo_ang) % (2.0 * math.pi) for x in angles)
            if lo_ang < a < hi_ang
        ]
    elif angles:
        # periodic integrand: start the cycle on a kink so none falls inside a piece
        start = angles[0]
        breaks = [start + (a - start) % (2.0 * math.pi) for a in angles] + [start + 2.0 * math.pi]
    else:
        breaks = [0.0, 2.0 * math.pi]
    res = quadrature.ZERO
    pts = sorted(set(breaks))
    for a, b in zip(pts[:-1], pts[1:]):
        res = res + quadrature.adaptive_tanh_sinh(
            g, a, b, abs_tol=spec.abs_tol, rel_tol=spec.rel_tol,
            max_level=spec.max_level, max_subdivisions=spec.max_subdivisions,
        )
    return _finish(res, f"cdf_ball(d={d})", full_output)


def _evaluate(fn, model, nominal, d, spec):
    try:
        return fn(model, nominal, float(d), spec, full_output=True)
    except ConvergenceError as exc:
        raise ConvergenceError(f"threshold d={d}: {exc}", exc.estimate, exc.error) from exc


def cdf_curve(model, nominal, grid, method=BALL, spec=QuadratureSpec(), *, n_jobs=1,
              n_samples=10 ** 6, seed=0):
    """Evaluate the CDF of ``K`` on an ascending threshold grid.

    ``method`` is ``"theorem1"``, ``"ball"`` or ``"monte-carlo"`` (empirical
    CDF of ``n_samples`` draws keyed by ``seed``; its error column is the
    99% DKW band). Thresholds are independent, so ``n_jobs > 1`` fans them
    out over threads; the result does not depend on ``n_jobs``.

    Raises
    ------
    ConvergenceError
        Annotated with the offending threshold, or when the curve decreases
        by more than 1e-9 (a symptom of an unconverged integral).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) < 0.0) or np.any((grid < 0.0) | (grid > 1.0)):
        raise DomainError("threshold grid must be ascending within [0, 1]")
    tolerances = {"abs_tol": spec.abs_tol, "rel_tol": spec.rel_tol,
                  "mass_tolerance": spec.mass_tolerance, "inner_rule": spec.inner_rule}

    if method == MONTE_CARLO:
        emp = montecarlo.sample_kappa(model, nominal, n_samples, seed)
        band = montecarlo.dkw_band(n_samples, 0.01)
        return CdfCurve(grid, emp(grid), method, np.full(grid.shape, band),
                        {"n_samples": n_samples, "seed": seed, "alpha": 0.01})
    if method == THEOREM1:
        fn = cdf_theorem1
    elif method == BALL:
        fn = cdf_ball
    else:
        raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(lambda d: _evaluate(fn, model, nominal, d, spec), grid))
    else:
        results = [_evaluate(fn, model, nominal, d, spec) for d in grid]

    values = np.array([r.value for r in results])
    errors = np.array([r.error for r in results])
    drops = np.diff(values)
    if np.any(drops < -_MONOTONE_SLACK):
        i = int(np.argmin(drops))
        raise ConvergenceError(
            f"CDF decreases between d={grid[i]} and d={grid[i + 1]} "
            f"({values[i]} -> {values[i + 1]}); quadrature did not converge",
            estimate=float(values[i + 1]), error=float(-drops[i]),
        )
    return CdfCurve(grid, values, method, errors, tolerances)
