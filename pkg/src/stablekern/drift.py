"""Drift catalog with machine-checkable Hölder/dissipativity certificates,
the compactly-supported mollifier, and the regularized deterministic flow.

Every catalog drift has the shape b(x) = -x + a g(x) with g bounded and
either periodic or saturating; the linear part passes through the symmetric
unit-mass mollifier exactly, so the mollified field is -x + a (g * rho) with
the convolution tabulated once on a single period (or the transition window)
and splined.  Flows integrate that field with a high-order adaptive ODE
solver in either time direction.
"""

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline

from .errors import ConfigError, DomainError, NumericsError

__all__ = [
    "DriftSpec",
    "MollifierSpec",
    "certify_dissipativity",
    "certify_holder",
    "comparability_ratio",
    "drift_catalog",
    "flow",
    "flow_inverse_check",
    "mollified_drift",
    "mollify",
]


@functools.cache
def _bump_mass():
    # integral of exp(-1/(1-u^2)) over (-1, 1); every derivative vanishes at
    # the endpoints, so the trapezoid rule converges faster than any power
    # of the step (all Euler-Maclaurin corrections are zero)
    u = np.linspace(-1.0, 1.0, 32769)[1:-1]
    vals = np.exp(-1.0 / (1.0 - u * u))
    coarse = np.sum(vals[1::2]) * (u[2] - u[0])
    fine = np.sum(vals) * (u[1] - u[0])
    if abs(fine - coarse) > 1e-13:
        raise NumericsError("mollifier normalization did not converge", abs(fine - coarse))
    return fine


def _unit_bump(u):
    """Smooth bump on |u| < 1 with unit mass."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui)) / _bump_mass()
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MollifierSpec:
    """Compactly supported smooth mollifier rho_eps(x) = rho(x/eps)/eps."""

    epsilon: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise DomainError("mollifier width must be positive")

    def density(self, x):
        return _unit_bump(np.asarray(x, dtype=float) / self.epsilon) / self.epsilon

    def mass(self):
        """Numerical mass (unit within 1e-10 by construction)."""
        val, _ = quad(self.density, -self.epsilon, self.epsilon, epsabs=1e-13)
        return val


@dataclass(frozen=True)
class DriftSpec:
    """Drift evaluator with its declared regularity and dissipativity data.

    The declared data are promises checked by the certify_* sweeps:
    |b(x)-b(y)| <= kappa0 (|x-y|^beta v |x-y|), and when `dissipative`
    carries (c0, c1, r), x.b(x) <= -c0 |x|^{2+r} + c1.

    `linear_coeff`/`amplitude`/`perturbation` expose the catalog structure
    b(x) = linear_coeff * x + amplitude * perturbation(x) that the
    mollified-flow layer exploits (the linear part passes through the
    symmetric mollifier exactly); perturbation_kind declares how the
    convolution tail behaves.
    """

    name: str
    beta: float
    kappa0: float
    dissipative: tuple | None
    evaluator: object = field(compare=False, repr=False)
    linear_coeff: float = -1.0
    amplitude: float = 0.0
    perturbation: object = field(default=None, compare=False, repr=False)
    perturbation_kind: str = "none"  # none | periodic | saturating
    period: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise DomainError("Hölder exponent must lie in (0, 1]")
        if self.kappa0 <= 0.0:
            raise DomainError("kappa0 must be positive")
        if self.dissipative is not None:
            c0, c1, r = self.dissipative
            if c0 <= 0.0 or c1 <= 0.0 or r < 0.0:
                raise DomainError("dissipativity data must be (c0>0, c1>0, r>=0)")
        if self.perturbation_kind not in ("none", "periodic", "saturating"):
            raise DomainError(f"unknown perturbation kind {self.perturbation_kind!r}")
        if self.perturbation_kind == "periodic" and self.period <= 0.0:
            raise DomainError("periodic perturbations need a positive period")
        if not callable(self.evaluator):
            raise DomainError("evaluator must be callable")

    def __call__(self, x):
        return self.evaluator(x)


def drift_catalog(name, a=0.5, beta=0.5):
    """Named drifts with certified condition data.

    - 'zero':      b(x) = 0
    - 'ou':        b(x) = -x
    - 'perturbed': b(x) = -x + a |sin x|^beta          (0 <= a < 1)
    - 'bump':      b(x) = -x + a sign(x) min(|x|^beta, 1)
    """
    if name == "zero":
        return DriftSpec(
            name="zero",
            beta=1.0,
            kappa0=1.0,
            dissipative=None,
            evaluator=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            linear_coeff=0.0,
        )
    if name == "ou":
        return DriftSpec(
            name="ou",
            beta=1.0,
            kappa0=1.0,
            dissipative=(1.0, 0.1, 0.0),
            evaluator=lambda x: -np.asarray(x, dtype=float),
        )
    if not 0.0 <= a < 1.0:
        raise ConfigError("perturbation amplitude must lie in [0, 1)")
    if not 0.0 < beta <= 1.0:
        raise ConfigError("Hölder exponent must lie in (0, 1]")
    if name == "perturbed":
        g = lambda x: np.abs(np.sin(np.asarray(x, dtype=float))) ** beta
        return DriftSpec(
            name=f"perturbed(a={a},beta={beta})",
            beta=beta,
            kappa0=1.0 + a,
            dissipative=(0.5, 0.5 * a * a + 0.01, 0.0),
            evaluator=lambda x: -np.asarray(x, dtype=float) + a * g(x),
            amplitude=a,
            perturbation=g,
            perturbation_kind="periodic",
            period=np.pi,
        )
    if name == "bump":
        def g(x):
            x = np.asarray(x, dtype=float)
            return np.sign(x) * np.minimum(np.abs(x) ** beta, 1.0)

        return DriftSpec(
            name=f"bump(a={a},beta={beta})",
            beta=beta,
            kappa0=1.0 + a * 2.0 ** (1.0 - beta),
            dissipative=(0.5, a + 0.01, 0.0),
            evaluator=lambda x: -np.asarray(x, dtype=float) + a * g(x),
            amplitude=a,
            perturbation=g,
            perturbation_kind="saturating",
        )
    raise ConfigError(f"unknown drift {name!r}; catalog: ou, perturbed, bump")


def _kink_breakpoints(drift, x, eps):
    """u-points in (-eps, eps) where u -> drift(x - u) loses smoothness."""
    kind = drift.perturbation_kind
    if kind == "periodic":
        p = drift.period
        ks = np.arange(np.ceil((x - eps) / p), np.floor((x + eps) / p) + 1)
        pts = x - ks * p
    elif kind == "saturating":
        pts = np.array([x - 1.0, x, x + 1.0])
    else:
        return []
    pts = pts[(pts > -eps) & (pts < eps)]
    return np.sort(pts).tolist()


def mollify(drift, moll, x):
    """Pointwise mollified drift (b * rho_eps)(x) by adaptive quadrature.

    Accurate to 1e-8 for the catalog drifts (validated against independent
    graded quadrature in the test suite; the integrator's own error report
    is conservative near the Hölder kinks, so only an estimate above 1e-6
    raises).
    """
    x = np.asarray(x, dtype=float)
    eps = moll.epsilon

    def value(xi):
        val, err = quad(
            lambda u: float(drift(xi - u)) * moll.density(u),
            -eps,
            eps,
            epsabs=1e-10,
            limit=200,
            points=_kink_breakpoints(drift, xi, eps),
        )
        if err > 1e-6:
            raise NumericsError("mollification quadrature did not converge", err)
        return val

    if x.ndim == 0:
        return value(float(x))
    return np.array([value(float(xi)) for xi in x.reshape(-1)]).reshape(x.shape)


class _MollifiedField:
    """Callable b_eps(x) = -x + a (g * rho_eps)(x) with the convolution
    tabulated and splined once per (drift, mollifier) pair."""

    def __init__(self, drift, moll):
        self.drift = drift
        self.moll = moll
        kind = drift.perturbation_kind
        if kind == "none" or drift.amplitude == 0.0:
            self._mode = "linear"
            return
        eps = moll.epsilon
        if kind == "periodic":
            self._mode = "periodic"
            self._period = drift.period
            nodes = np.linspace(0.0, drift.period, 1025)
            vals = self._convolve(nodes)
            vals[-1] = vals[0]  # periodic closure (equal up to quadrature tol)
            self._spline = CubicSpline(nodes, vals, bc_type="periodic")
        else:  # saturating: g constant at +-1 beyond |x| = 1, so the
            # convolution is exactly +-1 beyond |x| = 1 + eps
            self._mode = "saturating"
            self._edge = 1.0 + eps
            nodes = np.linspace(-self._edge, self._edge, 2049)
            vals = self._convolve(nodes)
            vals[0], vals[-1] = -1.0, 1.0
            self._spline = CubicSpline(nodes, vals)

    def _convolve(self, nodes):
        eps = self.moll.epsilon
        g = self.drift.perturbation
        out = np.empty(nodes.size)
        for i, v in enumerate(nodes):
            val, err = quad(
                lambda u: float(g(v - u)) * self.moll.density(u),
                -eps,
                eps,
                epsabs=1e-11,
                limit=200,
                points=_kink_breakpoints(self.drift, v, eps),
            )
            if err > 1e-6:
                raise NumericsError("perturbation convolution did not converge", err)
            out[i] = val
        return out

    def smooth_part(self, x):
        """(g * rho_eps)(x); zero for purely linear drifts."""
        x = np.asarray(x, dtype=float)
        if self._mode == "linear":
            return np.zeros(x.shape) if x.ndim else 0.0
        if self._mode == "periodic":
            out = self._spline(np.mod(x, self._period))
            return float(out) if x.ndim == 0 else out
        flat = np.atleast_1d(x)
        out = np.sign(flat)  # exact value beyond the transition window
        inside = np.abs(flat) <= self._edge
        out[inside] = self._spline(flat[inside])
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.drift.linear_coeff * x + self.drift.amplitude * self.smooth_part(x)


@functools.lru_cache(maxsize=64)
def mollified_drift(drift, moll=MollifierSpec()):
    """Cached fast evaluator of the mollified drift field for a catalog drift."""
    return _MollifiedField(drift, moll)


def flow(drift_mollified, s, t, x):
    """Flow point theta_{s,t}(x) of d theta/du = b_eps(theta), theta(s) = x.

    Runs forward (t > s) or backward (t < s); x may be a scalar or an array
    of starting points integrated together.
    """
    if s < 0.0 or t < 0.0:
        raise DomainError("flow times must be nonnegative")
    x = np.asarray(x, dtype=float)
    if s == t:
        return float(x) if x.ndim == 0 else x.copy()
    y0 = np.atleast_1d(x).reshape(-1)
    sol = solve_ivp(
        lambda u, y: np.asarray(drift_mollified(y), dtype=float),
        (s, t),
        y0,
        method="DOP853",
        rtol=1e-11,
        atol=1e-12,
    )
    if not sol.success:
        raise NumericsError(f"flow integration failed: {sol.message}")
    out = sol.y[:, -1]
    return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)


def flow_inverse_check(drift, s, t, x, moll=MollifierSpec()):
    """Round-trip defect |theta_{t,s}(theta_{s,t}(x)) - x| (diffeomorphism check)."""
    b1 = mollified_drift(drift, moll)
    forward = flow(b1, s, t, x)
    back = flow(b1, t, s, forward)
    return np.abs(back - np.asarray(x, dtype=float))


def comparability_ratio(drift, s, t, x, y, moll=MollifierSpec()):
    """The two flow-comparability ratios
    (|theta_{s,t}(x) - y| / |x - theta_{t,s}(y)|,
     |theta_{s,t}(x) - theta_{s,t}(y)| / |x - y|).

    Degenerate denominators yield NaN entries (excluded samples).
    """
    b1 = mollified_drift(drift, moll)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    th_x = flow(b1, s, t, x)
    th_y_back = flow(b1, t, s, y)
    th_y = flow(b1, s, t, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.abs(th_x - y) / np.abs(x - th_y_back)
        r2 = np.abs(th_x - th_y) / np.abs(x - y)
    if x.ndim == 0:
        return float(r1), float(r2)
    return r1, r2


def certify_holder(drift, rng, n=10000, box=20.0):
    """Worst ratio |b(x)-b(y)| / (kappa0 (|x-y|^beta v |x-y|)) over random pairs.

    A value <= 1 certifies the declared Hölder data on the sampled box.
    """
    g = rng.generator if hasattr(rng, "generator") else rng
    x = g.uniform(-box, box, n)
    y = g.uniform(-box, box, n)
    keep = x != y
    x, y = x[keep], y[keep]
    gap = np.abs(x - y)
    bound = drift.kappa0 * np.maximum(gap**drift.beta, gap)
    return float(np.max(np.abs(drift(x) - drift(y)) / bound))


def certify_dissipativity(drift, rng, n=10000, box=20.0):
    """Worst slack x.b(x) + c0 |x|^{2+r} - c1 over random points (<= 0 certifies)."""
    if drift.dissipative is None:
        raise ConfigError("drift carries no dissipativity data")
    c0, c1, r = drift.dissipative
    g = rng.generator if hasattr(rng, "generator") else rng
    x = g.uniform(-box, box, n)
    return float(np.max(x * drift(x) + c0 * np.abs(x) ** (2.0 + r) - c1))
