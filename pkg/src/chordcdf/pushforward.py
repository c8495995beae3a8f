"""Joint density of squared distance and shifted squared modulus.

For ``P = x + iy`` with density ``f`` and a fixed nominal point ``n = a + ib``
the map ``(x, y) -> (z, w) = (|P - n|^2, |P|^2 + 1)`` is two-to-one: the
preimages of ``(z, w)`` are the intersections of the circle of radius
``sqrt(z)`` about ``n`` with the circle of radius ``s = sqrt(w - 1)`` about
the origin. With ``r = |n|`` and the Jacobian ``|J| = 4 r^2 c2``,

    f_zw(z, w) = (f(p1) + f(p2)) / (4 r^2 c2(z, w)).

The circles meet twice exactly when ``(r - s)^2 < z < (r + s)^2``. In that
band ``4 r^4 c2^2 = ((r + s)^2 - z)(z - (r - s)^2)``, the factorised form
used here: it is exact at the band edges, where ``f_zw`` has an integrable
inverse-square-root singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .exceptions import DegenerateNominalError, DomainError
from .riemann import circle_intersections

__all__ = [
    "IntersectionPair",
    "classify",
    "intersections",
    "joint_density_zw",
    "z_marginal",
    "integrate_over_w",
    "rectangle_probability",
    "TWO",
    "TANGENT",
    "EMPTY",
]

TWO = "two"
TANGENT = "tangent"
EMPTY = "empty"

_R_MIN = 1e-12
_TANGENT_TOL = 1e-12

DOUBLE_EXPONENTIAL = "double-exponential"
ENDPOINT_SUBSTITUTION = "endpoint-substitution"


@dataclass(frozen=True)
class IntersectionPair:
    p1: complex
    p2: complex
    c1: float
    c2: float


def _radius(nominal):
    r = abs(complex(nominal))
    if r < _R_MIN:
        raise DegenerateNominalError(
            "nominal point is at the origin; the (z, w) map is singular there -- use cdf_ball"
        )
    return r


def _check_zw(z, w):
    if not (z >= 0.0 and w >= 1.0) or not (math.isfinite(z) and math.isfinite(w)):
        raise DomainError(f"need z >= 0 and w >= 1, got z={z}, w={w}")


def classify(z, w, nominal):
    """``"two"``, ``"tangent"`` or ``"empty"``: how many preimages ``(z, w)`` has.

    Both the inner bound ``|r - s| < sqrt(z)`` and the outer bound
    ``sqrt(z) < r + s`` are required for two intersections.
    """
    _check_zw(z, w)
    r = _radius(nominal)
    s = math.sqrt(w - 1.0)
    sz = math.sqrt(z)
    lo, hi = abs(r - s), r + s
    if abs(sz - lo) <= _TANGENT_TOL or abs(sz - hi) <= _TANGENT_TOL:
        return TANGENT
    if lo < sz < hi:
        return TWO
    return EMPTY


def _band(r, s):
    return (r - s) ** 2, (r + s) ** 2


def _points(z, s, nominal, r, prod):
    """Preimage points from ``c1`` and ``c2``; vectorised over ``z``/``prod``."""
    c1 = 0.5 - (z - s * s) / (2.0 * r * r)
    c2 = np.sqrt(np.maximum(prod, 0.0)) / (2.0 * r * r)
    # (-b, a) is i * nominal as a complex number
    p1 = (c1 + 1j * c2) * nominal
    p2 = (c1 - 1j * c2) * nominal
    return p1, p2, c1, c2


def intersections(z, w, nominal):
    """The two preimages of ``(z, w)``.

    Raises
    ------
    DomainError
        If ``(z, w)`` does not have two preimages.
    """
    nominal = complex(nominal)
    if classify(z, w, nominal) != TWO:
        raise DomainError("(z, w) does not have two preimages")
    r = abs(nominal)
    s = math.sqrt(w - 1.0)
    lo, hi = _band(r, s)
    p1, p2, c1, c2 = _points(z, s, nominal, r, (hi - z) * (z - lo))
    return IntersectionPair(complex(p1), complex(p2), float(c1), float(c2))


def joint_density_zw(z, w, nominal, model, with_flag=False):
    """Density of ``(z, w)`` under ``model``; vectorised over ``z`` and ``w``.

    Zero where there are no preimages. The tangency set has measure zero and
    its density is left unspecified by the change of variables; it is
    reported as 0. With ``with_flag=True`` a boolean array marking that set is
    returned as well.
    """
    nominal = complex(nominal)
    r = _radius(nominal)
    z, w = np.broadcast_arrays(np.asarray(z, float), np.asarray(w, float))
    if np.any(z < 0.0) or np.any(w < 1.0):
        raise DomainError("need z >= 0 and w >= 1")
    s = np.sqrt(w - 1.0)
    lo, hi = _band(r, s)
    sz = np.sqrt(z)
    tangent = (np.abs(sz - np.abs(r - s)) <= _TANGENT_TOL) | (np.abs(sz - (r + s)) <= _TANGENT_TOL)
    valid = (z > lo) & (z < hi) & ~tangent
    prod = np.where(valid, (hi - z) * (z - lo), 1.0)
    p1, p2, _, _ = _points(z, s, nominal, r, prod)
    dens = (model.pdf(p1) + model.pdf(p2)) / (2.0 * np.sqrt(prod))
    out = np.where(valid, dens, 0.0)
    out = out[()] if out.ndim == 0 else out
    if with_flag:
        return out, (tangent[()] if tangent.ndim == 0 else tangent)
    return out


def _boundary_z_breaks(s, nominal, model):
    """Values of ``z`` at which a preimage crosses the density's jump circle."""
    circle = model.boundary_circle
    if circle is None or s == 0.0:
        return []
    center, radius = circle
    return [abs(p - nominal) ** 2 for p in circle_intersections(0j, s, center, radius)]


def z_marginal(w, z_lo, z_hi, nominal, model, *, rule=DOUBLE_EXPONENTIAL,
               abs_tol=1e-12, rel_tol=1e-10, max_level=7):
    """``integral_{z_lo}^{z_hi} f_zw(z, w) dz`` for a sub-interval of the two-preimage band.

    ``rule`` selects how the band-edge singularity is handled:

    ``"double-exponential"``
        tanh-sinh in ``z`` with exact endpoint offsets.
    ``"endpoint-substitution"``
        ``z = (r - s)^2 + 4 r s sin^2(sigma)``, which turns ``f_zw dz`` into
        ``(f(p1) + f(p2)) dsigma`` with ``p = s exp(i(arg n +- 2 sigma))``;
        the smooth result is integrated by Gauss-Legendre.

    Either way the interval is split where a preimage crosses the
    density's jump circle, if it has one.
    """
    nominal = complex(nominal)
    r = _radius(nominal)
    s = math.sqrt(max(w - 1.0, 0.0))
    if s == 0.0:
        return quadrature.ZERO
    lo, hi = _band(r, s)
    z_lo = max(z_lo, lo)
    z_hi = min(z_hi, hi)
    if z_hi <= z_lo:
        return quadrature.ZERO
    breaks = [z_lo, z_hi] + [b for b in _boundary_z_breaks(s, nominal, model) if z_lo < b < z_hi]

    if rule == DOUBLE_EXPONENTIAL:
        return _z_marginal_de(breaks, lo, hi, s, nominal, r, model, abs_tol, rel_tol, max_level)
    if rule == ENDPOINT_SUBSTITUTION:
        return _z_marginal_sub(breaks, lo, hi, s, nominal, r, model, abs_tol, rel_tol)
    raise DomainError(f"unknown inner rule {rule!r}")


def _z_marginal_de(breaks, lo, hi, s, nominal, r, model, abs_tol, rel_tol, max_level):
    out = quadrature.ZERO
    pts = sorted(set(breaks))
    for a, b in zip(pts[:-1], pts[1:]):
        gap_lo = a - lo  # >= 0, exactly 0 when the piece starts on the band edge
        gap_hi = hi - b

        def integrand(z, da, db, gap_lo=gap_lo, gap_hi=gap_hi):
            prod = (gap_hi + db) * (gap_lo + da)
            p1, p2, _, _ = _points(z, s, nominal, r, prod)
            return (model.pdf(p1) + model.pdf(p2)) / (2.0 * np.sqrt(prod))

        out = out + quadrature.tanh_sinh(integrand, a, b, abs_tol=abs_tol, rel_tol=rel_tol,
                                         max_level=max_level, offsets=True)
    return out


def _z_marginal_sub(breaks, lo, hi, s, nominal, r, model, abs_tol, rel_tol):
    direction = nominal / r
    span = hi - lo

    def sigma_of(z):
        return math.asin(math.sqrt(min(max((z - lo) / span, 0.0), 1.0)))

    def integrand(sigma):
        rot = np.exp(2j * sigma)
        return model.pdf(s * direction * rot) + model.pdf(s * direction / rot)

    sig = sorted(set(sigma_of(b) for b in breaks))
    out = quadrature.ZERO
    for a, b in zip(sig[:-1], sig[1:]):
        out = out + quadrature.gauss_legendre(integrand, a, b, abs_tol=abs_tol, rel_tol=rel_tol)
    return out


def _modulus_breaks(nominal, model, z_curves, support):
    """Radii ``s`` where the integrand in ``w`` can have a kink or edge singularity.

    ``z_curves`` are circles ``(center, radius)`` on which the inner limit
    sits; the density's jump circle and the support disc are added.
    """
    circles = list(z_curves)
    if model.boundary_circle is not None:
        circles.append(model.boundary_circle)
    circles.append(support)
    out = []
    for center, radius in circles:
        m = abs(center)
        out.extend([m + radius, abs(m - radius)])
    for i, (c1, r1) in enumerate(circles):
        for c2, r2 in circles[i + 1:]:
            out.extend(abs(p) for p in circle_intersections(c1, r1, c2, r2))
    return out


def integrate_over_w(g, w_lo, w_hi, s_breaks, *, abs_tol=1e-10, rel_tol=1e-8,
                     max_level=7, max_subdivisions=4):
    """Outer integral of ``g`` over ``w`` with breakpoints given as radii ``s = sqrt(w - 1)``.

    ``g`` is called with an array of ``w`` values and must return a pair
    ``(values, inner_errors)``. The inner errors are integrated alongside the
    values, and that integral is added to the outer rule's own error.
    """
    if w_hi <= w_lo:
        return quadrature.ZERO
    pts = sorted(set([w_lo, w_hi] + [1.0 + s * s for s in s_breaks if w_lo < 1.0 + s * s < w_hi]))

    def both(w):
        return np.vstack(g(w))

    res = quadrature.ZERO
    for a, b in zip(pts[:-1], pts[1:]):
        res = res + quadrature.adaptive_tanh_sinh(
            both, a, b, abs_tol=abs_tol, rel_tol=rel_tol,
            max_level=max_level, max_subdivisions=max_subdivisions,
        )
    inner = float(res.extra[0]) if res.extra else 0.0
    return quadrature.QuadResult(res.value, res.error + inner, res.n_eval, res.converged)


def _inner_array(ws, z_lo_fn, z_hi_fn, nominal, model, rule, abs_tol, rel_tol):
    vals = np.empty(len(ws))
    errs = np.empty(len(ws))
    ok = True
    for i, w in enumerate(ws):
        res = z_marginal(w, z_lo_fn(w), z_hi_fn(w), nominal, model, rule=rule,
                         abs_tol=abs_tol, rel_tol=rel_tol)
        vals[i] = res.value
        errs[i] = res.error if res.converged else max(res.error, abs(res.value))
        ok = ok and res.converged
    return vals, errs


def rectangle_probability(z_range, w_range, nominal, model, *, rule=DOUBLE_EXPONENTIAL,
                          abs_tol=1e-10, rel_tol=1e-8, mass_tolerance=1e-12):
    """``P(z in z_range, w in w_range)`` by integrating :func:`joint_density_zw`.

    Returns a :class:`~chordcdf.quadrature.QuadResult`.
    """
    nominal = complex(nominal)
    _radius(nominal)
    z0, z1 = map(float, z_range)
    w0, w1 = map(float, w_range)
    support = model.support_disc(mass_tolerance)
    bound = model.support_bound(mass_tolerance)
    w_lo = max(w0, 1.0 + bound.rho_min ** 2)
    w_hi = min(w1, 1.0 + bound.rho_max ** 2)
    r = abs(nominal)
    curves = [(nominal, math.sqrt(z)) for z in (z0, z1) if z > 0.0]
    s_breaks = _modulus_breaks(nominal, model, curves, support)
    for z in (z0, z1):
        sz = math.sqrt(z)
        s_breaks.extend([r + sz, r - sz, sz - r])
    s_breaks = [s for s in s_breaks if s >= 0.0]

    def g(ws):
        return _inner_array(ws, lambda w: z0, lambda w: z1, nominal, model, rule,
                            0.01 * abs_tol, rel_tol)

    return integrate_over_w(g, w_lo, w_hi, s_breaks, abs_tol=abs_tol, rel_tol=rel_tol)
