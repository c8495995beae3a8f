"""Distribution of the chordal distance between uncertain frequency-response points.

The chordal distance between two points of the Nyquist plane is the
Euclidean distance of their stereographic lifts onto the Riemann sphere. For
an uncertain plant value ``P`` with a known density and a fixed nominal point
this package computes the CDF of that distance by two independent quadrature
paths, checks them against Monte-Carlo sampling, and provides the transfer
function and system-identification tooling used to study it.
"""

from .cdf import CdfCurve, QuadratureSpec, cdf_ball, cdf_curve, cdf_theorem1
from .densities import Gaussian, TruncatedGaussian, UniformDisc
from .exceptions import (
    ConvergenceError,
    DegenerateNominalError,
    DomainError,
    NorthPoleError,
    PoleOnAxisError,
    SingularInterconnectionError,
)
from .lti import RationalTF, eval_freq, three_pole
from .margins import b_margin_grid, degradation_gap, rho
from .montecarlo import compare, dkw_band, sample_kappa
from .riemann import chordal_ball_plane, chordal_distance, lemma2_ball, lift, project
from .sysid import ThreePoleIdentifier, fit_three_pole, run_trials

__version__ = "0.1.0"

__all__ = [
    "CdfCurve", "QuadratureSpec", "cdf_ball", "cdf_curve", "cdf_theorem1",
    "Gaussian", "TruncatedGaussian", "UniformDisc",
    "ConvergenceError", "DegenerateNominalError", "DomainError", "NorthPoleError",
    "PoleOnAxisError", "SingularInterconnectionError",
    "RationalTF", "eval_freq", "three_pole",
    "b_margin_grid", "degradation_gap", "rho",
    "compare", "dkw_band", "sample_kappa",
    "chordal_ball_plane", "chordal_distance", "lemma2_ball", "lift", "project",
    "ThreePoleIdentifier", "fit_three_pole", "run_trials",
]
