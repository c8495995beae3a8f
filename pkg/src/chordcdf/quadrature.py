"""One-dimensional quadrature rules used by the CDF integrators.

Two rules are provided:

``tanh_sinh``
    Double-exponential (Takahashi-Mori) rule with level refinement. Nodes
    cluster doubly-exponentially at the endpoints, so integrable endpoint
    singularities such as ``(x - a)**-0.5`` are absorbed without special
    treatment. In ``offsets`` mode the integrand also receives the exact
    distances to both endpoints, which avoids the catastrophic cancellation
    of computing ``x - a`` for nodes that sit ``1e-30`` away from ``a``.

``gauss_legendre``
    Order-doubling Gauss-Legendre for smooth integrands.

``adaptive_tanh_sinh`` wraps ``tanh_sinh`` with interval bisection for
integrands that hide an interior kink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit

from .exceptions import ConvergenceError

__all__ = [
    "QuadResult",
    "tanh_sinh",
    "adaptive_tanh_sinh",
    "gauss_legendre",
    "integrate_pieces",
]

# |t| cut-off of the trapezoidal sum in the transformed variable. At t = 4 the
# nodes are ~1e-37 (relative) from the endpoints and the weights are negligible.
_T_MAX = 4.0
_MIN_LEVEL = 2


@dataclass(frozen=True)
class QuadResult:
    """Value, error estimate, number of integrand evaluations and convergence flag.

    ``extra`` holds integrals of any additional rows a vector-valued
    integrand returned; only the first row drives convergence.
    """

    value: float
    error: float
    n_eval: int
    converged: bool
    extra: tuple = ()

    def __add__(self, other):
        if self.extra and other.extra:
            extra = tuple(a + b for a, b in zip(self.extra, other.extra))
        else:
            extra = self.extra or other.extra
        return QuadResult(
            self.value + other.value,
            self.error + other.error,
            self.n_eval + other.n_eval,
            self.converged and other.converged,
            extra,
        )


ZERO = QuadResult(0.0, 0.0, 0, True)


@lru_cache(maxsize=None)
def _de_level(level):
    """Nodes added at ``level``: (left fraction, right fraction, unscaled weight)."""
    h = 2.0 ** -level
    if level == 0:
        t = np.arange(-_T_MAX, _T_MAX + 0.5, 1.0)
    else:
        k = np.arange(1, int(_T_MAX / h) + 1, 2)
        t = np.concatenate([-k[::-1] * h, k * h])
    u = 0.5 * math.pi * np.sinh(t)
    frac_a = expit(2.0 * u)  # (1 + tanh u) / 2, no cancellation near either end
    frac_b = expit(-2.0 * u)  # (1 - tanh u) / 2
    # (1/2) dx/dt = (pi/4) cosh t / cosh^2 u = pi cosh t * frac_a * frac_b
    weight = math.pi * np.cosh(t) * frac_a * frac_b
    for arr in (frac_a, frac_b, weight):
        arr.setflags(write=False)
    return frac_a, frac_b, weight


def _de_points(a, b, level):
    frac_a, frac_b, weight = _de_level(level)
    span = b - a
    dist_a = span * frac_a
    dist_b = span * frac_b
    x = np.where(frac_a <= 0.5, a + dist_a, b - dist_b)
    return x, dist_a, dist_b, weight


def tanh_sinh(f, a, b, *, abs_tol=1e-12, rel_tol=1e-10, max_level=8, offsets=False):
    """Integrate ``f`` over ``[a, b]`` with the tanh-sinh rule.

    Parameters
    ----------
    f : callable
        Vectorised integrand. Called as ``f(x)``, or ``f(x, x - a, b - x)``
        when ``offsets`` is true (the offsets are computed without
        cancellation).
        ``f`` may return shape ``(m, n)`` for ``n`` nodes; rows after the
        first are integrated alongside and returned in ``extra``.
    a, b : float
        Finite limits. ``a > b`` flips the sign.
    abs_tol, rel_tol : float
        Stop once two successive levels differ by less than
        ``max(abs_tol, rel_tol * |I|)``.
    max_level : int
        Finest level; the step is ``2**-max_level``.
    offsets : bool
        Pass endpoint distances to ``f``.

    Returns
    -------
    QuadResult
        ``error`` is the difference of the last two levels, which is a
        conservative bound once the rule is in its convergent regime.
    """
    if a == b:
        return ZERO
    if a > b:
        res = tanh_sinh(f, b, a, abs_tol=abs_tol, rel_tol=rel_tol,
                        max_level=max_level, offsets=offsets)
        return QuadResult(-res.value, res.error, res.n_eval, res.converged,
                          tuple(-e for e in res.extra))

    total = 0.0
    n_eval = 0
    previous = None
    estimate = 0.0
    error = math.inf
    for level in range(max_level + 1):
        x, dist_a, dist_b, weight = _de_points(a, b, level)
        if offsets:
            values = np.asarray(f(x, dist_a, dist_b), dtype=float)
        else:
            # nodes that round onto an endpoint would hit a singularity
            inside = (x > a) & (x < b)
            if inside.all():
                values = np.asarray(f(x), dtype=float)
            else:
                sub = np.asarray(f(x[inside]), dtype=float) if inside.any() else None
                shape = (x.size,) if sub is None or sub.ndim == 1 else (sub.shape[0], x.size)
                values = np.zeros(shape)
                if sub is not None:
                    values[..., inside] = sub
        n_eval += x.size
        total = total + values @ weight
        scaled = (b - a) * np.atleast_1d(total) * 2.0 ** -level
        estimate = float(scaled[0])
        if previous is not None:
            error = abs(estimate - previous)
            if level >= _MIN_LEVEL and error <= max(abs_tol, rel_tol * abs(estimate)):
                return QuadResult(estimate, error, n_eval, True, tuple(scaled[1:]))
        previous = estimate
    return QuadResult(estimate, error, n_eval, False, tuple(scaled[1:]))


def adaptive_tanh_sinh(f, a, b, *, abs_tol=1e-12, rel_tol=1e-10, max_level=7,
                       max_subdivisions=6, offsets=False):
    """Tanh-sinh with recursive bisection where a single rule fails to converge.

    Bisection midpoints become interior endpoints of the sub-rules, where the
    double-exponential clustering resolves a kink the parent rule could not.
    ``abs_tol`` is split evenly between the two halves at each bisection.
    """
    res = tanh_sinh(f, a, b, abs_tol=abs_tol, rel_tol=rel_tol,
                    max_level=max_level, offsets=offsets)
    if res.converged or max_subdivisions <= 0:
        return res
    mid = 0.5 * (a + b)
    if offsets:
        # children see offsets relative to their own endpoints
        left = adaptive_tanh_sinh(f, a, mid, abs_tol=0.5 * abs_tol, rel_tol=rel_tol,
                                  max_level=max_level,
                                  max_subdivisions=max_subdivisions - 1, offsets=True)
        right = adaptive_tanh_sinh(f, mid, b, abs_tol=0.5 * abs_tol, rel_tol=rel_tol,
                                   max_level=max_level,
                                   max_subdivisions=max_subdivisions - 1, offsets=True)
    else:
        left = adaptive_tanh_sinh(f, a, mid, abs_tol=0.5 * abs_tol, rel_tol=rel_tol,
                                  max_level=max_level,
                                  max_subdivisions=max_subdivisions - 1)
        right = adaptive_tanh_sinh(f, mid, b, abs_tol=0.5 * abs_tol, rel_tol=rel_tol,
                                   max_level=max_level,
                                   max_subdivisions=max_subdivisions - 1)
    out = left + right
    return QuadResult(out.value, out.error, out.n_eval + res.n_eval, out.converged, out.extra)


@lru_cache(maxsize=None)
def _gl_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(f, a, b, *, abs_tol=1e-12, rel_tol=1e-10, n0=16, max_n=1024):
    """Gauss-Legendre with order doubling until successive orders agree."""
    if a == b:
        return ZERO
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    n = n0
    previous = None
    n_eval = 0
    estimate = 0.0
    error = math.inf
    while n <= max_n:
        x, w = _gl_nodes(n)
        estimate = half * float(np.dot(w, f(mid + half * x)))
        n_eval += n
        if previous is not None:
            error = abs(estimate - previous)
            if error <= max(abs_tol, rel_tol * abs(estimate)):
                return QuadResult(estimate, error, n_eval, True)
        previous = estimate
        n *= 2
    return QuadResult(estimate, error, n_eval, False)


def integrate_pieces(rule, f, breakpoints, **kwargs):
    """Sum ``rule`` over consecutive intervals of the sorted, deduplicated ``breakpoints``."""
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    out = ZERO
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi > lo:
            out = out + rule(f, float(lo), float(hi), **kwargs)
    return out


def require_converged(res, what):
    """Raise :class:`ConvergenceError` unless ``res`` converged."""
    if not res.converged:
        raise ConvergenceError(
            f"{what}: tolerance not reached (estimate {res.value!r}, error {res.error:.3g})",
            estimate=res.value,
            error=res.error,
        )
    return res
