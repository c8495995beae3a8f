"""SISO rational transfer functions: frequency response, ZOH discretization, simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.signal import lfilter

from . import rng
from .exceptions import DomainError, PoleOnAxisError

__all__ = [
    "RationalTF",
    "DiscreteSim",
    "three_pole",
    "eval_freq",
    "zoh_discretize",
    "simulate",
    "prbs",
]

_POLE_TOL = 1e-300


def _coeffs(values, name):
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name} must be a nonempty coefficient list")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} coefficients must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class RationalTF:
    """``num(s) / den(s)`` with real coefficients in ascending powers of ``s``.

    Trailing zero coefficients are stripped, so ``den[-1]`` is the leading
    coefficient.
    """

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = np.trim_zeros(_coeffs(self.num, "num"), "b")
        den = np.trim_zeros(_coeffs(self.den, "den"), "b")
        if den.size == 0:
            raise DomainError("denominator is identically zero")
        if num.size == 0:
            num = np.zeros(1)
        if num.size > den.size:
            raise DomainError("transfer function must be proper (deg num <= deg den)")
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def order(self):
        return self.den.size - 1

    def __call__(self, omega):
        return eval_freq(self, omega)


@dataclass(frozen=True, eq=False)
class DiscreteSim:
    """``x[k+1] = A x[k] + B u[k]``, ``y[k] = C x[k] + D u[k]`` with sample time ``Ts``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float
    Ts: float

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape != (n,) or self.C.shape != (n,):
            raise DomainError("inconsistent state-space dimensions")
        if not self.Ts > 0.0:
            raise DomainError("sample time must be positive")

    @property
    def n_states(self):
        return self.A.shape[0]

    def transfer_coefficients(self):
        """``(b, a)`` of the discrete transfer function in powers of ``z**-1``."""
        n = self.n_states
        if n == 0:
            return np.array([self.D]), np.array([1.0])
        a = np.poly(self.A)
        # numerator = C adj(zI - A) B + D det(zI - A)
        b = np.poly(self.A - np.outer(self.B, self.C)) - a + self.D * a
        return np.real(b), np.real(a)


def three_pole(b, tau):
    """``b / (1 + tau s)**3``."""
    if not tau > 0.0:
        raise DomainError("tau must be positive")
    return RationalTF([b], [1.0, 3.0 * tau, 3.0 * tau ** 2, tau ** 3])


def eval_freq(tf, omega):
    """Frequency response ``num(j omega) / den(j omega)``; vectorised over ``omega``.

    Raises
    ------
    PoleOnAxisError
        If ``|den(j omega)| < 1e-300`` at some requested frequency.
    """
    s = 1j * np.asarray(omega, dtype=float)
    num = np.polynomial.polynomial.polyval(s, tf.num)
    den = np.polynomial.polynomial.polyval(s, tf.den)
    if np.any(np.abs(den) < _POLE_TOL):
        raise PoleOnAxisError("transfer function has a pole on the imaginary axis")
    out = num / den
    return complex(out) if np.ndim(out) == 0 else out


def zoh_discretize(tf, Ts):
    """Exact zero-order-hold discretization of ``tf`` with sample time ``Ts``.

    The controllable canonical realization ``(A, B, C, D)`` is discretized
    with one matrix exponential of the augmented matrix ``[[A, B], [0, 0]] Ts``.
    """
    if not (Ts > 0.0 and math.isfinite(Ts)):
        raise DomainError("sample time must be positive and finite")
    den = tf.den / tf.den[-1]
    num = np.zeros(den.size)
    num[: tf.num.size] = tf.num / tf.den[-1]
    n = den.size - 1
    D = float(num[n])
    if n == 0:
        return DiscreteSim(np.zeros((0, 0)), np.zeros(0), np.zeros(0), D, float(Ts))
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[:n]
    B = np.zeros(n)
    B[-1] = 1.0
    C = num[:n] - D * den[:n]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = A * Ts
    aug[:n, n] = B * Ts
    phi = expm(aug)
    return DiscreteSim(phi[:n, :n], phi[:n, n].copy(), C, D, float(Ts))


def simulate(sim, u):
    """Output of ``sim`` from zero initial state driven by ``u``."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise DomainError("input must be one-dimensional")
    if not np.all(np.isfinite(u)):
        raise DomainError("input must be finite")
    if sim.n_states == 0:
        return sim.D * u
    b, a = sim.transfer_coefficients()
    return lfilter(b, a, u)


def prbs(seed, length, amplitude=1.0):
    """Random binary sequence: i.i.d. equiprobable signs times ``amplitude``."""
    if length < 1:
        raise DomainError("length must be >= 1")
    bits = rng.counter_draws(seed, 0, int(length), lambda g, n: g.integers(0, 2, size=n, dtype=np.int8))
    return np.where(bits == 1, float(amplitude), -float(amplitude))
