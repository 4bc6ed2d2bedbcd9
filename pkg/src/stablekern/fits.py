"""Least-squares rate fitting shared by the kernel and invariant-measure
certifications: log-distance against log(2 - alpha)."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["RateFit", "rate_fit"]


@dataclass(frozen=True)
class RateFit:
    """Slope/intercept/R^2 of a log-log rate fit, with the fitted points.

    `points` holds the surviving (log(2 - alpha), log D) pairs.
    """

    slope: float
    intercept: float
    r_squared: float
    points: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0:
            raise DomainError("r_squared must lie in [0, 1]")


def rate_fit(alphas, distances):
    """Fit log D = slope * log(2 - alpha) + intercept by least squares.

    Requires at least 4 strictly increasing alpha values in (0, 2).
    Nonpositive distances are excluded with a warning; if fewer than 4
    points survive the fit is refused.
    """
    alphas = np.asarray(alphas, dtype=float)
    distances = np.asarray(distances, dtype=float)
    if alphas.shape != distances.shape or alphas.ndim != 1:
        raise DomainError("alphas and distances must be matching 1-D arrays")
    if alphas.size < 4:
        raise DomainError("rate fitting needs at least 4 points")
    if np.any(np.diff(alphas) <= 0.0):
        raise DomainError("alpha values must be strictly increasing")
    if np.any(alphas <= 0.0) or np.any(alphas >= 2.0):
        raise DomainError("alpha values must lie in (0, 2)")

    keep = distances > 0.0
    if not np.all(keep):
        warnings.warn(
            f"excluded {int(np.sum(~keep))} nonpositive distances from the rate fit",
            RuntimeWarning,
            stacklevel=2,
        )
    if int(np.sum(keep)) < 4:
        raise DomainError("fewer than 4 positive distances survive for the fit")

    lx = np.log(2.0 - alphas[keep])
    ly = np.log(distances[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(min(max(r2, 0.0), 1.0)),
        points=tuple(zip(lx.tolist(), ly.tolist())),
    )
