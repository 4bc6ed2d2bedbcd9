"""Special-function layer: Gamma/Beta, jump-measure constants, and the
fractional Laplacian of test functions.

The jump measure of the isotropic stable process is
``nu(dz) = C(d, alpha) |z|^{-d-alpha} dz`` with the constant chosen so that
the generator has Fourier symbol ``-|xi|^alpha``.  Everything here is a pure
function of its arguments.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sp

from .errors import DomainError, NumericsError

__all__ = [
    "LevyMeasureSpec",
    "beta_fn",
    "frac_laplacian",
    "gamma_fn",
    "levy_constant",
    "levy_tail_integral",
    "sphere_area",
    "tail_bound_constant",
]


def gamma_fn(s):
    """Gamma function on the positive half line.

    Arguments must be strictly positive; the reflection branch is out of
    scope here on purpose (negative arguments flip sign in ways none of the
    kernel formulas need).
    """
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError("gamma_fn requires strictly positive arguments")
    out = sp.gamma(s)
    return float(out) if out.ndim == 0 else out


def beta_fn(s1, s2):
    """Euler Beta function B(s1, s2) for positive arguments."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if np.any(s1 <= 0.0) or np.any(s2 <= 0.0):
        raise DomainError("beta_fn requires strictly positive arguments")
    out = sp.beta(s1, s2)
    return float(out) if out.ndim == 0 else out


def sphere_area(d):
    """Surface measure of the unit sphere in R^d: 2 pi^{d/2} / Gamma(d/2)."""
    if int(d) != d or d < 1:
        raise DomainError("dimension must be a positive integer")
    d = int(d)
    return 2.0 * np.pi ** (0.5 * d) / sp.gamma(0.5 * d)


@dataclass(frozen=True)
class LevyMeasureSpec:
    """Isotropic stable jump measure nu(dz) = C(d, alpha)|z|^{-d-alpha}dz."""

    d: int
    alpha: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError("dimension must be a positive integer")
        if not 0.0 < self.alpha < 2.0:
            raise DomainError("the jump-measure constant requires alpha in (0, 2)")


def levy_constant(spec):
    """Normalizing constant C(d, alpha) of the stable jump measure.

    C(d, alpha) = alpha Gamma((d+alpha)/2) / (2^{1-alpha} pi^{d/2}
    Gamma((2-alpha)/2)); it vanishes linearly at both alpha -> 0 and
    alpha -> 2 (through the alpha factor and the Gamma pole respectively).
    """
    d, alpha = spec.d, spec.alpha
    num = alpha * sp.gamma(0.5 * (d + alpha))
    den = 2.0 ** (1.0 - alpha) * np.pi ** (0.5 * d) * sp.gamma(0.5 * (2.0 - alpha))
    return num / den


def levy_tail_integral(spec, delta, theta, region):
    """Closed-form moment of the jump measure over {|z|<=delta} or {|z|>delta}.

    region='inside' integrates |z|^theta nu(dz) over |z| <= delta (needs
    theta > alpha); region='outside' over |z| > delta (needs theta < alpha).
    Both equal omega_{d-1} C(d,alpha) / |theta - alpha| * delta^{theta-alpha}.
    """
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    alpha = spec.alpha
    if region == "inside":
        if theta <= alpha:
            raise DomainError("inside-moment diverges unless theta > alpha")
        gap = theta - alpha
    elif region == "outside":
        if theta >= alpha:
            raise DomainError("outside-moment diverges unless theta < alpha")
        gap = alpha - theta
    else:
        raise DomainError(f"region must be 'inside' or 'outside', got {region!r}")
    return sphere_area(spec.d) * levy_constant(spec) / gap * delta ** (theta - alpha)


def tail_bound_constant(d, alpha):
    """Explicit constant in the heavy-tail kernel bound p <= c * t/|x|^{d+alpha}.

    c = d 4^alpha Gamma((d+alpha)/2) / (2 (1-2^{-d}) pi^{d/2} (1-e^{-1})).
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError("tail bound constant requires alpha in (0, 2)")
    num = d * 4.0**alpha * sp.gamma(0.5 * (d + alpha))
    den = 2.0 * (1.0 - 2.0 ** (-d)) * np.pi ** (0.5 * d) * (1.0 - np.exp(-1.0))
    return num / den


# ---------------------------------------------------------------------------
# fractional Laplacian of scalar test functions (d=1)

_BLOCK = 2.0 * np.pi
_MAX_BLOCKS = 4096


def _laplacian_1d(f, x):
    """Classical second derivative by Richardson-extrapolated central
    differences (the alpha=2 dispatch)."""
    h = 0.05
    d_vals = []
    for _ in range(3):
        d_vals.append((f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h))
        h *= 0.5
    d1 = (4.0 * d_vals[1] - d_vals[0]) / 3.0
    d2 = (4.0 * d_vals[2] - d_vals[1]) / 3.0
    return (16.0 * d2 - d1) / 15.0


def _fourth_derivative(f, x):
    """Fourth derivative by Richardson-extrapolated 5-point differences."""
    h = 0.2
    d_vals = []
    for _ in range(2):
        d_vals.append(
            (f(x - 2 * h) - 4 * f(x - h) + 6 * f(x) - 4 * f(x + h) + f(x + 2 * h)) / h**4
        )
        h *= 0.5
    return (4.0 * d_vals[1] - d_vals[0]) / 3.0


def frac_laplacian(f, alpha, x, tol=1e-8):
    """Fractional Laplacian of a smooth scalar function at a point (d=1).

    Evaluates C(1,alpha) * int_0^inf (f(x+z) + f(x-z) - 2 f(x)) z^{-1-alpha} dz,
    the symmetrized jump form whose Fourier symbol is -|xi|^alpha.  alpha=2
    dispatches to the classical second derivative.  The integral is split at
    z=1.  On [0, z_c] the second difference cancels beyond float precision, so
    that head is integrated from its Taylor expansion (f'' and f'''' estimated
    by Richardson differences); [z_c, 1] is plain adaptive quadrature.  The
    outer part subtracts the -2 f(x) tail in closed form and sums the rest in
    2-pi blocks, continuing the partial sum with a two-term power-law tail
    fitted to the recent block means (exact for functions that level off,
    fast for oscillating or decaying ones).
    """
    if not 0.0 < alpha <= 2.0:
        raise DomainError("frac_laplacian requires alpha in (0, 2]")
    if alpha == 2.0:
        return _laplacian_1d(f, x)

    const = levy_constant(LevyMeasureSpec(1, alpha))
    budget = tol / const
    fx = f(x)

    z_c = 0.02
    head = _laplacian_1d(f, x) * z_c ** (2.0 - alpha) / (2.0 - alpha)
    head += _fourth_derivative(f, x) / 12.0 * z_c ** (4.0 - alpha) / (4.0 - alpha)

    def second_diff_weighted(z):
        z = float(z)
        return (f(x + z) + f(x - z) - 2.0 * fx) * z ** (-1.0 - alpha)

    body, body_err = integrate.quad(
        second_diff_weighted, z_c, 1.0, epsabs=0.25 * budget, epsrel=0.0, limit=200
    )
    if not np.isfinite(body) or body_err > budget:
        raise NumericsError("inner jump integral did not stabilise", body_err * const)

    # outer: -2 f(x) * int_1^inf z^{-1-alpha} dz  +  int_1^inf (f(x+z)+f(x-z)) w(z) dz
    closed_tail = -2.0 * fx / alpha

    def shifted_pair(z):
        return (f(x + z) + f(x - z)) * float(z) ** (-1.0 - alpha)

    partial = 0.0
    mids, means, ests = [], [], []
    lo = 1.0
    for _ in range(_MAX_BLOCKS):
        hi = lo + _BLOCK
        block, _ = integrate.quad(shifted_pair, lo, hi, epsabs=1e-3 * budget, limit=60)
        weight_mass = (lo**-alpha - hi**-alpha) / alpha
        partial += block
        mids.append(0.5 * (lo + hi))
        means.append(block / weight_mass)
        # model the remaining block means as m_inf + c/z and integrate the model
        if len(means) >= 2:
            z1, z0 = mids[-1], mids[-2]
            m_inf = (z1 * means[-1] - z0 * means[-2]) / (z1 - z0)
            c_lin = z1 * (means[-1] - m_inf)
            tail = m_inf * hi**-alpha / alpha + c_lin * hi ** (-1.0 - alpha) / (1.0 + alpha)
        else:
            tail = means[-1] * hi**-alpha / alpha
        ests.append(partial + tail)
        lo = hi
        if len(ests) >= 8:
            spread = max(ests[-5:]) - min(ests[-5:])
            if spread <= 0.25 * budget:
                break
        if max(abs(m) for m in means[-4:]) * lo**-alpha / alpha < 0.05 * budget:
            break
    else:
        spread = max(ests[-5:]) - min(ests[-5:])
        raise NumericsError("outer jump integral did not stabilise", spread * const)

    return const * (head + body + closed_tail + ests[-1])
