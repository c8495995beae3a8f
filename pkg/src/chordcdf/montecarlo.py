"""Sampling oracle for the chordal distance: empirical CDFs and DKW bands."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .riemann import chordal_distance

__all__ = ["EmpiricalCdf", "ComparisonReport", "sample_kappa", "dkw_band", "compare"]


@dataclass(frozen=True)
class EmpiricalCdf:
    """Sorted draws of ``K``; calling it evaluates ``#{K <= d} / n``."""

    values: np.ndarray
    n: int
    seed: int

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        out = np.searchsorted(self.values, d, side="right") / self.n
        return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ComparisonReport:
    thresholds: np.ndarray
    deviations: np.ndarray
    allowed: np.ndarray
    passed_each: np.ndarray

    @property
    def passed(self):
        return bool(np.all(self.passed_each))

    @property
    def max_deviation(self):
        return float(np.max(self.deviations, initial=0.0))

    def lines(self):
        for d, dev, tol, ok in zip(self.thresholds, self.deviations, self.allowed, self.passed_each):
            yield f"d={d:.4f} |dF|={dev:.3e} allowed={tol:.3e} {'PASS' if ok else 'FAIL'}"


def sample_kappa(model, nominal, n, seed):
    """Empirical distribution of ``K`` from ``n`` counter-based draws of ``model``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    draws = model.sample(seed, n)
    kappa = np.sort(chordal_distance(draws, complex(nominal)))
    kappa.setflags(write=False)
    return EmpiricalCdf(kappa, int(n), int(seed))


def dkw_band(n, alpha):
    """Half-width ``sqrt(ln(2 / alpha) / (2 n))`` of the DKW confidence band."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def compare(curve, emp, alpha=0.01, slack=0.0):
    """Check a quadrature curve against an empirical CDF.

    A threshold passes when ``|F_quad - F_emp| <= dkw_band + abs_err_bound + slack``.
    """
    thresholds = np.asarray(curve.thresholds, dtype=float)
    if thresholds.size == 0:
        warnings.warn("empty threshold grid: comparison passes trivially", stacklevel=2)
        empty = np.array([])
        return ComparisonReport(empty, empty, empty, np.array([], dtype=bool))
    if np.any((thresholds < 0.0) | (thresholds > 1.0)):
        raise DomainError("thresholds must lie in [0, 1]")
    dev = np.abs(np.asarray(curve.values) - emp(thresholds))
    allowed = dkw_band(emp.n, alpha) + np.asarray(curve.errors, dtype=float) + slack
    return ComparisonReport(thresholds, dev, allowed, dev <= allowed)
