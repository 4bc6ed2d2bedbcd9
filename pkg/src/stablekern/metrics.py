"""Distances between laws on the line, exact Ornstein-Uhlenbeck oracles for
the stable-driven dynamics, invariant-measure estimation, and rate fitting.

Convention: the variation distance used everywhere is the L1 distance of
densities, sup_{|h|<=1} |mu(h) - nu(h)| — twice the usual total-variation
normalization.  The weighted variant integrates against 1 + |x|^p.
"""

import numpy as np
from scipy.optimize import linprog

from .density import StableKernelSpec, density
from .errors import ConfigError, DomainError, NumericsError
from .fits import RateFit, rate_fit
from .grids import GridDensity, tabulate
from .sampling import density_from_samples, sample_stable_1d, silverman_bandwidth

__all__ = [
    "RateFit",
    "estimate_invariant",
    "moment_sweep",
    "ou_char_lower_bound",
    "ou_exact_stationary",
    "ou_exact_transition",
    "quantile_transport_cost",
    "rate_fit",
    "transport_cost",
    "var_distance",
    "weighted_var_distance",
]


def _check_common_grid(f, g):
    if f.grid.shape != g.grid.shape or not np.allclose(f.grid, g.grid, rtol=0.0, atol=1e-12):
        raise ConfigError("grid densities must share an identical grid")


def var_distance(f, g):
    """Variation distance of two tabulated laws: trapezoid of |f - g|."""
    _check_common_grid(f, g)
    return float(np.trapezoid(np.abs(f.values - g.values), f.grid))


def weighted_var_distance(f, g, p):
    """Weighted variation distance with weight 1 + |x|^p, p in (0, 2)."""
    if not 0.0 < p < 2.0:
        raise DomainError("weight exponent must lie in (0, 2)")
    _check_common_grid(f, g)
    w = 1.0 + np.abs(f.grid) ** p
    return float(np.trapezoid(w * np.abs(f.values - g.values), f.grid))


# ---------------------------------------------------------------------------
# transport costs

def _atoms(obj):
    """Atom locations and probability weights for samples or a GridDensity."""
    if isinstance(obj, GridDensity):
        w = obj.values.copy()
        w[0] *= 0.5
        w[-1] *= 0.5
        w *= obj.h
        total = w.sum()
        if total <= 0.0:
            raise DomainError("grid density carries no mass")
        return obj.grid.copy(), w / total
    x = np.asarray(obj, dtype=float).reshape(-1)
    if x.size == 0:
        raise DomainError("empty sample set")
    return x, np.full(x.size, 1.0 / x.size)


def quantile_transport_cost(mu, nu, p):
    """Cost of the quantile (monotone) coupling: int |F^{-1} - G^{-1}|^p du.

    Exact optimal for p >= 1; for p < 1 it is an upper bound on the optimal
    cost and is reported as such alongside the exact solve.
    """
    if not 0.0 < p < 2.0:
        raise DomainError("cost exponent must lie in (0, 2)")
    xa, wa = _atoms(mu)
    xb, wb = _atoms(nu)
    ia = np.argsort(xa, kind="stable")
    ib = np.argsort(xb, kind="stable")
    xa, wa = xa[ia], wa[ia]
    xb, wb = xb[ib], wb[ib]
    cost = 0.0
    i = j = 0
    level = 0.0
    ca, cb = wa[0], wb[0]
    while True:
        nxt = min(ca, cb)
        cost += (nxt - level) * abs(xa[i] - xb[j]) ** p
        level = nxt
        if level >= 1.0 - 1e-15:
            break
        if ca <= cb and i + 1 < xa.size:
            i += 1
            ca += wa[i]
        elif j + 1 < xb.size:
            j += 1
            cb += wb[j]
        else:
            break
    return float(cost)


def _lp_transport_cost(xa, wa, xb, wb, p):
    cost = np.abs(xa[:, None] - xb[None, :]) ** p
    na, nb = xa.size, xb.size
    # flatten the coupling matrix; marginal constraints (drop one redundant row)
    a_eq = []
    for i in range(na):
        row = np.zeros(na * nb)
        row[i * nb : (i + 1) * nb] = 1.0
        a_eq.append(row)
    for j in range(nb - 1):
        row = np.zeros(na * nb)
        row[j::nb] = 1.0
        a_eq.append(row)
    b_eq = np.concatenate([wa, wb[:-1]])
    res = linprog(
        cost.reshape(-1),
        A_eq=np.array(a_eq),
        b_eq=b_eq,
        bounds=(0.0, None),
        method="highs",
    )
    if not res.success:
        raise NumericsError(f"transport LP failed: {res.message}")
    return float(res.fun)


def transport_cost(mu, nu, p):
    """Optimal transport cost T_p = inf E|X - Y|^p between two 1-D laws.

    Inputs are sample arrays (uniform atoms) or GridDensity values (atoms at
    grid nodes).  p >= 1 solves exactly by the quantile coupling; p < 1
    needs the exact discrete solve, limited to 512 atoms per measure.
    """
    if not 0.0 < p < 2.0:
        raise DomainError("cost exponent must lie in (0, 2)")
    if p >= 1.0:
        return quantile_transport_cost(mu, nu, p)
    xa, wa = _atoms(mu)
    xb, wb = _atoms(nu)
    if xa.size > 512 or xb.size > 512:
        raise ConfigError(
            "exact transport for p < 1 is limited to 512 atoms per measure; "
            "resample or coarsen the inputs"
        )
    return _lp_transport_cost(xa, wa, xb, wb, p)


# ---------------------------------------------------------------------------
# exact OU oracles

def ou_exact_stationary(alpha, grid):
    """Stationary density of dX = -X dt + dL^alpha on the grid.

    The stationary law is the alpha-stable law at time 1/alpha (equivalently
    alpha^{-1/alpha} times a unit-time draw); alpha = 2 gives the standard
    normal.
    """
    if not 0.0 < alpha <= 2.0:
        raise DomainError("stability index must lie in (0, 2]")
    grid = np.asarray(grid, dtype=float)
    vals = density(StableKernelSpec(d=1, alpha=alpha), 1.0 / alpha, grid)
    return tabulate(grid, vals)


def ou_exact_transition(alpha, t, x0, grid):
    """Exact time-t transition density of dX = -X dt + dL^alpha from x0.

    Variation of constants: X_t = x0 e^{-t} + (stable noise at time
    tau_alpha(t)), tau_alpha(t) = (1 - e^{-alpha t})/alpha.
    """
    if not 0.0 < alpha <= 2.0:
        raise DomainError("stability index must lie in (0, 2]")
    if t <= 0.0:
        raise DomainError("transition time must be positive")
    grid = np.asarray(grid, dtype=float)
    tau = (1.0 - np.exp(-alpha * t)) / alpha
    vals = density(StableKernelSpec(d=1, alpha=alpha), tau, grid - x0 * np.exp(-t))
    return tabulate(grid, vals)


def ou_char_lower_bound(alpha):
    """|E cos X_inf^{(alpha)} - E cos X_inf^{(2)}| = |e^{-1/alpha} - e^{-1/2}|.

    A closed-form lower bound for the variation distance between the two
    stationary laws (cos is a unit-sup test function).
    """
    if not 0.0 < alpha <= 2.0:
        raise DomainError("stability index must lie in (0, 2]")
    return abs(np.exp(-1.0 / alpha) - np.exp(-0.5))


# ---------------------------------------------------------------------------
# invariant-measure estimation

def estimate_invariant(drift, alpha, scheme, grid, rng, x0=0.0):
    """Time-averaged Euler estimate of the invariant density on the grid.

    scheme = (t_burn, t_sample, steps_per_unit, n_chains): every chain burns
    in for t_burn, then each post-burn-in state contributes to a per-chain
    kernel density estimate; the output averages the chains and carries the
    chain-to-chain standard error.  Requires a dissipativity certificate on
    the drift.
    """
    if drift.dissipative is None:
        raise ConfigError("invariant estimation requires a dissipativity certificate")
    if not 0.0 < alpha <= 2.0:
        raise DomainError("stability index must lie in (0, 2]")
    t_burn, t_sample, steps_per_unit, n_chains = scheme
    if t_burn < 0.0 or t_sample <= 0.0:
        raise ConfigError("scheme times must satisfy t_burn >= 0, t_sample > 0")
    steps_per_unit = int(steps_per_unit)
    n_chains = int(n_chains)
    if steps_per_unit < 1 or n_chains < 2:
        raise ConfigError("scheme needs steps_per_unit >= 1 and n_chains >= 2")
    grid = np.asarray(grid, dtype=float)
    h = 1.0 / steps_per_unit
    n_burn = int(round(t_burn * steps_per_unit))
    n_keep = int(round(t_sample * steps_per_unit))
    if n_keep < 1000:
        raise ConfigError("scheme keeps fewer than 10^3 states per chain")

    x = np.full(n_chains, float(x0))
    states = np.empty((n_keep, n_chains))
    for k in range(n_burn + n_keep):
        if alpha == 2.0:
            g = rng.generator if hasattr(rng, "generator") else rng
            dl = np.sqrt(2.0 * h) * g.standard_normal(n_chains)
        else:
            dl = sample_stable_1d(alpha, h, n_chains, rng)
        x = x + h * np.asarray(drift(x), dtype=float) + dl
        if not np.all(np.isfinite(x)):
            raise NumericsError(f"chain blow-up at step {k + 1}")
        if k >= n_burn:
            states[k - n_burn] = x

    pooled = states.reshape(-1)
    sub = pooled[:: max(1, pooled.size // 100000)]
    bw = silverman_bandwidth(sub)
    per_chain = np.empty((n_chains, grid.size))
    captured = np.empty(n_chains)
    for c in range(n_chains):
        gd = density_from_samples(states[:, c], grid, bandwidth=bw)
        per_chain[c] = gd.values
        captured[c] = gd.captured_mass
    values = per_chain.mean(axis=0)
    stderr = per_chain.std(axis=0, ddof=1) / np.sqrt(n_chains)
    return GridDensity(
        grid=grid,
        values=values,
        captured_mass=float(np.trapezoid(values, grid)),
        mass_deficit=bool(captured.mean() < 0.999),
        stderr=stderr,
    )


def moment_sweep(drift, gamma, alphas, scheme, grid, rng):
    """gamma-th absolute moments of the estimated invariant laws per alpha.

    Each alpha must satisfy alpha >= (gamma + 2)/2 so the moment exists
    uniformly; returns {alpha: moment}.
    """
    if not 0.0 < gamma < 2.0:
        raise DomainError("moment order must lie in (0, 2)")
    alphas = [float(a) for a in alphas]
    floor = 0.5 * (gamma + 2.0)
    for a in alphas:
        if a < floor - 1e-12 or a > 2.0:
            raise DomainError(
                f"alpha={a} outside the admissible range [{floor}, 2] for gamma={gamma}"
            )
    out = {}
    for a in alphas:
        est = estimate_invariant(drift, a, scheme, grid, rng)
        out[a] = est.moment(gamma)
    return out
