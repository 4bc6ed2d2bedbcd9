"""Two-regime bound profiles and their calculus.

The basic envelope is ``min(t^{-(d+k)/gamma1}, t / |x|^{d+k+gamma2})``: a flat
on-diagonal plateau crossing over to a heavy power tail.  Kernel estimates,
their derivatives, and every convolution bound in the parametrix series are
phrased through these profiles, so the module also ships the product
("three-profile") ratio and weighted-mass helpers the test harness sweeps.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .special import sphere_area

__all__ = [
    "BoundProfile",
    "check_3p",
    "crossover_radius",
    "rho",
    "rho_mass",
    "rho_mass_exponent",
]


@dataclass(frozen=True)
class BoundProfile:
    """Envelope min(t^{-(d+k)/gamma1}, t/|x|^{d+k+gamma2}) in R^d.

    k is the derivative order being bounded (0 for the kernel itself);
    gamma1 controls the on-diagonal blow-up, gamma2 the spatial tail.
    """

    d: int
    k: float = 0.0
    gamma1: float = 2.0
    gamma2: float = 2.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError("dimension must be a positive integer")
        if self.k < 0.0:
            raise DomainError("derivative order k must be nonnegative")
        for g in (self.gamma1, self.gamma2):
            if not 0.0 < g <= 2.0:
                raise DomainError("profile exponents must lie in (0, 2]")


def _radii(profile, x):
    """Euclidean |x| for scalar, flat-array (d=1) or (..., d) inputs."""
    x = np.asarray(x, dtype=float)
    if profile.d == 1:
        return np.abs(x)
    if x.ndim == 0 or x.shape[-1] != profile.d:
        raise DomainError(f"points must have trailing dimension {profile.d}")
    return np.sqrt(np.sum(x * x, axis=-1))


def rho(profile, t, x):
    """Evaluate the profile at time t and point(s) x."""
    if t <= 0.0:
        raise DomainError("profile evaluation requires t > 0")
    r = _radii(profile, x)
    d, k = profile.d, profile.k
    plateau = t ** (-(d + k) / profile.gamma1)
    with np.errstate(divide="ignore", over="ignore"):
        tail = t / r ** (d + k + profile.gamma2)
    out = np.minimum(plateau, tail)
    return float(out) if out.ndim == 0 else out


def crossover_radius(profile, t):
    """|x| where the plateau and tail branches of the profile meet."""
    if t <= 0.0:
        raise DomainError("crossover requires t > 0")
    d, k = profile.d, profile.k
    expo = (d + k + profile.gamma1) / (profile.gamma1 * (d + k + profile.gamma2))
    return t**expo


def check_3p(t, s, x, y, gammas, d=1, k=0.0):
    """Ratio tested by the product-of-profiles ("3P") inequality.

    With gammas = (g1, g2, g3, g4), returns

        rho_{g1,g2}(t, x-y) rho_{g3,g4}(s, y)
        / [ (rho_{g1,g2}(t, x-y) + rho_{g3,g4}(s, y))
            * sum_{i in {1,3}, j in {2,4}} rho_{gi,gj}(t+s, x) ].

    The inequality asserts this is bounded by a constant depending only on
    (d, k, min gamma); the harness sweeps random draws and records the max.
    """
    g1, g2, g3, g4 = gammas
    left = rho(BoundProfile(d, k, g1, g2), t, np.asarray(x) - np.asarray(y))
    right = rho(BoundProfile(d, k, g3, g4), s, y)
    denom_sum = sum(
        rho(BoundProfile(d, k, gi, gj), t + s, x) for gi in (g1, g3) for gj in (g2, g4)
    )
    return left * right / ((left + right) * denom_sum)


def rho_mass_exponent(profile, theta):
    """Power of t governing the weighted mass int |x|^theta rho(t, x) dx."""
    g1, g2 = profile.gamma1, profile.gamma2
    d = profile.d
    return 1.0 - (g2 - theta) * (d + g1) / (g1 * (d + g2))


def rho_mass(profile, theta, t):
    """Weighted spatial mass int_{R^d} |x|^theta rho(t, x) dx by quadrature.

    Requires 0 <= theta < k + gamma2 for tail integrability (the classical
    statement takes k=0 and theta < gamma2).  Scales as t to the power
    rho_mass_exponent(profile, theta) when k=0.
    """
    if theta < 0.0:
        raise DomainError("theta must be nonnegative")
    if theta >= profile.k + profile.gamma2:
        raise DomainError("weighted mass diverges unless theta < k + gamma2")
    if t <= 0.0:
        raise DomainError("rho_mass requires t > 0")
    d = profile.d
    r_star = crossover_radius(profile, t)

    def point(r):
        return np.array([r] + [0.0] * (d - 1)) if d > 1 else r

    def integrand(r):
        return r ** (theta + d - 1) * rho(profile, t, point(r))

    inner, _ = integrate.quad(integrand, 0.0, r_star, epsabs=0.0, epsrel=1e-12, limit=200)

    # tail piece under r = 1/u: the remaining weight u^{k+gamma2-theta-1} is an
    # integrable endpoint singularity handed to the weighted rule, and the
    # companion factor is smooth (it equals t wherever the tail branch rules)
    power = d + profile.k + profile.gamma2
    plateau = t ** (-(d + profile.k) / profile.gamma1)

    def companion(u):
        u = float(u)
        if u <= 1e-200:
            return t
        with np.errstate(over="ignore"):
            plateau_term = plateau * u**-power
        return t if not np.isfinite(plateau_term) else min(plateau_term, t)

    outer, _ = integrate.quad(
        companion,
        0.0,
        1.0 / r_star,
        weight="alg",
        wvar=(profile.k + profile.gamma2 - theta - 1.0, 0.0),
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return sphere_area(d) * (inner + outer)
