"""Pointwise robustness quantities of a SISO feedback loop.

For plant and controller values ``P = P(j omega)`` and ``C = C(j omega)`` the
gang of four is ``H = [P; 1] (1 - C P)^-1 [-C, 1]``. It has rank one, so its
largest singular value is ``|[P; 1]| |[-C, 1]| / |1 - C P|`` and

    rho(P, C) = 1 / sigma_max(H) = |1 - C P| / sqrt((1 + |P|^2) (1 + |C|^2)).

This is the chordal distance between ``P`` and ``1 / C``, so the pointwise
degradation bound ``rho(P, C) >= rho(Pn, C) - kappa(P, Pn)`` is the triangle
inequality of the chordal metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lti
from .exceptions import DomainError, SingularInterconnectionError
from .riemann import chordal_distance

__all__ = [
    "FreqPoint",
    "gang_of_four",
    "sigma_max_2x2",
    "rho",
    "rho_closed_form",
    "degradation_gap",
    "closed_loop_poles",
    "is_internally_stable",
    "b_margin_grid",
]

_SINGULAR_TOL = 1e-12
_STABILITY_MARGIN = -1e-9


@dataclass(frozen=True)
class FreqPoint:
    omega: float
    plant: complex
    controller: complex

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega >= 0.0):
            raise DomainError("omega must be finite and >= 0")
        object.__setattr__(self, "plant", complex(self.plant))
        object.__setattr__(self, "controller", complex(self.controller))

    @property
    def return_difference(self):
        return 1.0 - self.controller * self.plant


def _check_well_posed(fp):
    if abs(fp.return_difference) <= _SINGULAR_TOL:
        raise SingularInterconnectionError(
            f"|1 - C P| <= {_SINGULAR_TOL:g} at omega={fp.omega}: interconnection is singular"
        )


def gang_of_four(fp):
    """The 2x2 complex matrix ``[P; 1] (1 - C P)^-1 [-C, 1]``.

    Raises
    ------
    SingularInterconnectionError
        If ``|1 - C P| <= 1e-12``.
    """
    _check_well_posed(fp)
    left = np.array([fp.plant, 1.0], dtype=complex)
    right = np.array([-fp.controller, 1.0], dtype=complex)
    return np.outer(left, right) / fp.return_difference


def sigma_max_2x2(m):
    """Largest singular value of a 2x2 complex matrix.

    The eigenvalues of ``m^H m`` are ``(t +- sqrt(t^2 - 4 det)) / 2`` with
    ``t = ||m||_F^2`` and ``det = |det m|^2``. The discriminant is formed as
    ``(a - b)^2 + 4 |c|^2`` from the Gram entries, which is never negative
    and does not cancel.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise DomainError("expected a 2x2 matrix")
    col0, col1 = m[:, 0], m[:, 1]
    a = float(np.vdot(col0, col0).real)
    b = float(np.vdot(col1, col1).real)
    c = complex(np.vdot(col0, col1))
    disc = math.hypot(a - b, 2.0 * abs(c))
    return math.sqrt(0.5 * (a + b + disc))


def rho_closed_form(plant, controller):
    """``|1 - C P| / sqrt((1 + |P|^2)(1 + |C|^2))``; vectorised."""
    plant = np.asarray(plant, dtype=complex)
    controller = np.asarray(controller, dtype=complex)
    out = np.abs(1.0 - controller * plant) / np.sqrt(
        (1.0 + np.abs(plant) ** 2) * (1.0 + np.abs(controller) ** 2)
    )
    return out[()] if out.ndim == 0 else out


def rho(fp, *, strict=True):
    """Pointwise margin ``1 / sigma_max(H)``.

    With ``strict=False`` a singular interconnection is reported as 0
    instead of raising, which continues ``b = 0`` for unstable loops to the
    pointwise quantity.
    """
    try:
        h = gang_of_four(fp)
    except SingularInterconnectionError:
        if strict:
            raise
        return 0.0
    return min(1.0 / sigma_max_2x2(h), 1.0)


def degradation_gap(fp_perturbed, nominal_plant):
    """``rho(P, C) - (rho(Pn, C) - kappa(P, Pn))``; nonnegative up to rounding."""
    nominal = FreqPoint(fp_perturbed.omega, nominal_plant, fp_perturbed.controller)
    kappa = float(chordal_distance(fp_perturbed.plant, complex(nominal_plant)))
    return rho(fp_perturbed) - (rho(nominal) - kappa)


def closed_loop_poles(plant, controller):
    """Roots of ``den_P den_C - num_P num_C``."""
    P = np.polynomial.Polynomial
    char = P(plant.den) * P(controller.den) - P(plant.num) * P(controller.num)
    coef = np.trim_zeros(char.coef, "b")
    if coef.size == 0:
        raise SingularInterconnectionError("closed-loop characteristic polynomial vanishes")
    if not np.all(np.isfinite(coef)):
        raise ArithmeticError("closed-loop characteristic polynomial is not finite")
    roots = P(coef).roots()
    if not np.all(np.isfinite(roots)):
        raise ArithmeticError("root finding failed for the closed-loop polynomial")
    return roots


def is_internally_stable(plant, controller):
    """True when every closed-loop pole has real part below ``-1e-9``."""
    roots = closed_loop_poles(plant, controller)
    return bool(np.all(roots.real < _STABILITY_MARGIN))


def b_margin_grid(plant, controller, grid):
    """Grid approximation of the generalized stability margin.

    ``min`` of :func:`rho` over ``grid`` when the closed loop is internally
    stable, else 0. The grid minimum overestimates the true margin; refining
    the grid can only lower it.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("frequency grid must be a nonempty 1-d array")
    if np.any(np.diff(grid) <= 0.0) or np.any(grid < 0.0):
        raise DomainError("frequency grid must be ascending and nonnegative")
    if not is_internally_stable(plant, controller):
        return 0.0
    pv = lti.eval_freq(plant, grid)
    cv = lti.eval_freq(controller, grid)
    return float(min(np.min(rho_closed_form(pv, cv)), 1.0))
