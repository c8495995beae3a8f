"""Geometry of the Riemann sphere of unit diameter, tangent to the plane at 0.

Plane points are Python/numpy complex numbers. Sphere points are float
arrays whose last axis holds ``(x, y, z)``; the north pole ``(0, 0, 1)`` is
the image of infinity and is never produced by :func:`lift`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, NorthPoleError

__all__ = [
    "PlaneDisc",
    "lift",
    "project",
    "chordal_distance",
    "chordal_ball_plane",
    "lemma2_ball",
    "lemma2_diagnostics",
    "SOUTH_POLE",
    "NORTH_POLE",
]

SOUTH_POLE = np.array([0.0, 0.0, 0.0])
NORTH_POLE = np.array([0.0, 0.0, 1.0])

_POLE_EPS = 1e-15
_POLE_RHO2 = 1e-300
_HALF_PLANE_EPS = 1e-12

INTERIOR = "interior-disc"
EXTERIOR = "exterior-of-disc"
HALF_PLANE = "half-plane"


@dataclass(frozen=True)
class PlaneDisc:
    """A disc, the complement of a disc, or an open half-plane in the complex plane.

    For the two disc kinds ``center``/``radius`` describe the circle. For
    ``kind == "half-plane"`` the set is ``{p : Re((p - center) * conj(normal)) > 0}``,
    i.e. ``center`` is a point on the boundary line and ``normal`` a unit
    vector pointing into the set.
    """

    kind: str
    center: complex
    radius: float = 0.0
    normal: complex = 0j

    def __post_init__(self):
        if self.kind in (INTERIOR, EXTERIOR):
            if not (math.isfinite(self.radius) and self.radius >= 0.0):
                raise DomainError(f"disc radius must be finite and >= 0, got {self.radius}")
        elif self.kind == HALF_PLANE:
            if abs(abs(self.normal) - 1.0) > 1e-12:
                raise DomainError("half-plane normal must have unit modulus")
        else:
            raise DomainError(f"unknown PlaneDisc kind {self.kind!r}")

    def contains(self, p):
        """Open-set membership, vectorised over ``p``."""
        p = np.asarray(p, dtype=complex)
        if self.kind == INTERIOR:
            return np.abs(p - self.center) < self.radius
        if self.kind == EXTERIOR:
            return np.abs(p - self.center) > self.radius
        return ((p - self.center) * np.conj(self.normal)).real > 0.0

    @property
    def diameter(self):
        return 2.0 * self.radius


def _as_finite_complex(c, name="c"):
    c = np.asarray(c, dtype=complex)
    if not np.all(np.isfinite(c)):
        raise DomainError(f"{name} must be finite")
    return c


def lift(c):
    """Inverse stereographic projection: plane point(s) to sphere point(s).

    Returns an array of shape ``np.shape(c) + (3,)``.

    >>> lift(1 + 1j)
    array([0.33333333, 0.33333333, 0.66666667])
    """
    c = _as_finite_complex(c)
    m2 = c.real ** 2 + c.imag ** 2
    scale = 1.0 / (1.0 + m2)
    return np.stack([c.real * scale, c.imag * scale, m2 * scale], axis=-1)


def project(R):
    """Stereographic projection from the sphere (minus the north pole) to the plane.

    Below the equator ``(x + iy) / (1 - z)`` is used directly. Above it the
    on-sphere identity ``x**2 + y**2 = z (1 - z)`` gives the equivalent
    ``(x + iy) z / (x**2 + y**2)``, which avoids the cancellation in ``1 - z``.
    """
    R = np.asarray(R, dtype=float)
    if R.shape[-1] != 3:
        raise DomainError("sphere points need a trailing axis of length 3")
    x, y, z = R[..., 0], R[..., 1], R[..., 2]
    if not np.all(np.isfinite(R)):
        raise DomainError("sphere point must be finite")
    rho2 = x * x + y * y
    # the upper-hemisphere formula stays exact as z -> 1, so only the pole
    # itself (no horizontal offset left) is singular
    if np.any((z > 0.5) & (rho2 < _POLE_RHO2)):
        raise NorthPoleError("projection is singular at the north pole")
    upper = (z > 0.5) & (rho2 > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(upper, z / np.where(upper, rho2, 1.0), 1.0 / (1.0 - z))
    out = (x + 1j * y) * scale
    return out[()] if out.ndim == 0 else out


def chordal_distance(p, q):
    """Chordal distance between the lifts of plane points ``p`` and ``q``.

    ``|p - q| / (sqrt(1 + |p|^2) sqrt(1 + |q|^2))``, in ``[0, 1]``.
    """
    p = _as_finite_complex(p, "p")
    q = _as_finite_complex(q, "q")
    out = np.abs(p - q) / (np.hypot(1.0, np.abs(p)) * np.hypot(1.0, np.abs(q)))
    out = np.minimum(out, 1.0)
    return out[()] if out.ndim == 0 else out


def chordal_ball_plane(nominal, d):
    """The plane set ``{P : chordal_distance(P, nominal) < d}``.

    Squaring the defining inequality gives
    ``(1 - k)|P|^2 - 2 Re(P conj(nominal)) + |nominal|^2 - k < 0`` with
    ``k = d^2 (1 + |nominal|^2)``: a disc when ``k < 1``, a half-plane when
    ``k == 1`` and the outside of a disc when ``k > 1`` (the spherical cap
    then contains the north pole).
    """
    nominal = complex(_as_finite_complex(nominal, "nominal"))
    if not 0.0 < d < 1.0:
        raise DomainError(f"ball radius d must lie in (0, 1), got {d}")
    c2 = 1.0 + abs(nominal) ** 2
    k = d * d * c2
    if abs(1.0 - k) <= _HALF_PLANE_EPS:
        r = abs(nominal)
        normal = nominal / r
        offset = (r * r - 1.0) / (2.0 * r)
        return PlaneDisc(HALF_PLANE, center=offset * normal, normal=normal)
    center = nominal / (1.0 - k)
    radius = d * c2 * math.sqrt(1.0 - d * d) / abs(1.0 - k)
    return PlaneDisc(INTERIOR if k < 1.0 else EXTERIOR, center=center, radius=radius)


def _meridian_geometry(rbar):
    rbar = np.asarray(rbar, dtype=float)
    if rbar.shape != (3,) or not np.all(np.isfinite(rbar)):
        raise DomainError("rbar must be a finite sphere point (x, y, z)")
    x, y, z = rbar
    if abs(x * x + y * y + z * z - z) > 1e-9:
        raise DomainError("rbar is not on the unit-diameter sphere")
    # polar angle measured from the north pole about the sphere centre (0, 0, 1/2)
    theta_c = math.acos(min(1.0, max(-1.0, 2.0 * z - 1.0)))
    azimuth = math.atan2(y, x) if (x != 0.0 or y != 0.0) else 0.0
    return theta_c, azimuth


def _meridian_point(alpha, azimuth):
    """Projection of the sphere point at polar angle ``alpha`` on the meridian ``azimuth``.

    Angles beyond ``pi`` continue over the south pole onto the opposite
    half-meridian, which the signed cotangent handles.
    """
    return (math.cos(0.5 * alpha) / math.sin(0.5 * alpha)) * complex(math.cos(azimuth), math.sin(azimuth))


def lemma2_ball(rbar, d):
    """Planar image of the spherical ball of chordal radius ``d`` about ``rbar``.

    Constructed on the meridian through ``rbar``: the ball meets it at the
    polar angles ``theta`` and ``theta + dtheta`` whose projections are the
    two ends of a diameter of the image disc. A chordal radius ``d``
    subtends ``dtheta / 2 = 2 arcsin(d)`` at the sphere centre, so the chord
    joining the two meridian points has length ``sin(dtheta / 2)``.

    Parameters
    ----------
    rbar : array_like, shape (3,)
        Ball centre on the sphere.
    d : float
        Chordal radius in ``[0, 1)``.

    Returns
    -------
    PlaneDisc
        Interior disc; ``diameter`` is the Euclidean diameter of the image.

    Raises
    ------
    NorthPoleError
        If the closed ball reaches the north pole.
    """
    if not 0.0 <= d < 1.0:
        raise DomainError(f"d must lie in [0, 1), got {d}")
    theta_c, azimuth = _meridian_geometry(rbar)
    half_span = 2.0 * math.asin(d)
    theta_1 = theta_c - half_span
    theta_2 = theta_c + half_span
    if theta_1 <= _POLE_EPS or theta_2 >= 2.0 * math.pi - _POLE_EPS:
        raise NorthPoleError("the ball contains the north pole; its image is not a bounded disc")
    p1 = _meridian_point(theta_1, azimuth)
    p2 = _meridian_point(theta_2, azimuth)
    return PlaneDisc(INTERIOR, center=0.5 * (p1 + p2), radius=0.5 * abs(p1 - p2))


def lemma2_diagnostics(rbar, d):
    """Compare literal readings of the meridian construction with the exact ball.

    The meridian construction admits two readings that differ from
    :func:`chordal_ball_plane`: ``d`` taken as the chord between the two
    meridian points (a chordal *diameter*), and a centre formed from the
    moduli of the two points rather than their signed positions. This
    returns both alongside the exact disc so the discrepancies can be
    reported rather than silently absorbed.

    Returns
    -------
    dict
        ``exact_center``, ``exact_diameter`` (from :func:`chordal_ball_plane`),
        ``radius_center``/``radius_diameter`` (:func:`lemma2_ball`),
        ``chord_diameter`` (reading ``d`` as the meridian chord),
        ``modulus_center`` (centre from moduli) and the absolute deviations.
    """
    theta_c, azimuth = _meridian_geometry(rbar)
    exact = chordal_ball_plane(complex(project(rbar)), d)
    ours = lemma2_ball(rbar, d)

    # d as the chord between the meridian points: sin(dtheta / 2) = d
    dtheta = 2.0 * math.asin(d)
    t1, t2 = theta_c - 0.5 * dtheta, theta_c + 0.5 * dtheta
    if t1 > 0.0 and t2 < 2.0 * math.pi:
        q1, q2 = _meridian_point(t1, azimuth), _meridian_point(t2, azimuth)
        chord_diameter = abs(q1 - q2)
    else:
        chord_diameter = math.inf
    p1 = _meridian_point(theta_c - 2.0 * math.asin(d), azimuth)
    p2 = _meridian_point(theta_c + 2.0 * math.asin(d), azimuth)
    modulus_center = 0.5 * (abs(p1) + abs(p2)) * complex(math.cos(azimuth), math.sin(azimuth))

    exact_diameter = exact.diameter if exact.kind == INTERIOR else math.inf
    return {
        "exact_kind": exact.kind,
        "exact_center": exact.center,
        "exact_diameter": exact_diameter,
        "radius_center": ours.center,
        "radius_diameter": ours.diameter,
        "radius_center_error": abs(ours.center - exact.center),
        "radius_diameter_error": abs(ours.diameter - exact_diameter),
        "chord_diameter": chord_diameter,
        "chord_diameter_error": abs(chord_diameter - exact_diameter),
        "modulus_center": modulus_center,
        "modulus_center_error": abs(modulus_center - exact.center),
    }


def circle_intersections(c1, r1, c2, r2):
    """Intersection points of two circles (empty list if they miss or coincide)."""
    c1, c2 = complex(c1), complex(c2)
    dist = abs(c2 - c1)
    if dist == 0.0 or dist > r1 + r2 or dist < abs(r1 - r2):
        return []
    along = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist)
    h = math.sqrt(max(r1 * r1 - along * along, 0.0))
    e = (c2 - c1) / dist
    base = c1 + along * e
    return [base + 1j * h * e, base - 1j * h * e]


def line_circle_intersections(point, direction, center, radius):
    """Intersections of the line ``point + t * direction`` (unit direction) with a circle."""
    point, direction, center = complex(point), complex(direction), complex(center)
    v = point - center
    b = (v * direction.conjugate()).real
    disc = b * b - (abs(v) ** 2 - radius * radius)
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    return [point + (-b + root) * direction, point + (-b - root) * direction]


def boundary_meets_circle(region, center, radius):
    """Points where the boundary of ``region`` (a :class:`PlaneDisc`) meets a circle."""
    if region.kind == HALF_PLANE:
        return line_circle_intersections(region.center, 1j * region.normal, center, radius)
    return circle_intersections(region.center, region.radius, center, radius)
