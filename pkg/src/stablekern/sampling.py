"""Random variates for the stable noise, its subordinator clock, and the
Euler scheme for dX = b(X) dt + dL.

Normalization matches the analytic layer throughout: the 1-D stable draw at
time t has characteristic function e^{-t |xi|^alpha} (so alpha=2 means
variance 2t), and the subordinator has Laplace transform e^{-t lam^{alpha/2}}.
All sampling is driven by explicit RngStream values; there is no hidden
global RNG state.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import ConfigError, DomainError, NumericsError
from .grids import GridDensity

__all__ = [
    "PathConfig",
    "RngStream",
    "density_from_samples",
    "euler_maruyama",
    "ou_stationary_sample",
    "sample_stable_1d",
    "sample_stable_dd",
    "sample_subordinator",
]

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """Seeded, stream-addressed random source.

    Identical (seed, stream_id) pairs reproduce identical draw sequences
    bit-for-bit; parallel work items take distinct stream_ids so results do
    not depend on scheduling.
    """

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed < _U64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.stream_id < _U64:
            raise DomainError("stream_id must be a 64-bit unsigned integer")
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        object.__setattr__(self, "generator", np.random.Generator(np.random.PCG64(ss)))

    def substream(self, stream_id):
        """Fresh stream with the same seed and the given stream_id."""
        return RngStream(self.seed, stream_id)


def _generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError("rng must be an RngStream or numpy Generator")


def sample_stable_1d(alpha, t, n, rng):
    """n symmetric draws with characteristic function e^{-t |xi|^alpha}.

    alpha=2 is sqrt(2t) times a standard normal; alpha=1 is a Cauchy of
    scale t; otherwise the Chambers-Mallows-Stuck transform of a uniform
    angle and an exponential variate.
    """
    if not 0.0 < alpha <= 2.0:
        raise DomainError("stability index must lie in (0, 2]")
    if t <= 0.0:
        raise DomainError("time scale must be positive")
    n = int(n)
    if n < 1:
        raise DomainError("sample count must be positive")
    g = _generator(rng)
    if alpha == 2.0:
        return np.sqrt(2.0 * t) * g.standard_normal(n)
    v = np.pi * (g.random(n) - 0.5)
    if alpha == 1.0:
        return t * np.tan(v)
    w = np.maximum(g.standard_exponential(n), 1e-300)
    x = (
        np.sin(alpha * v)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
    )
    return t ** (1.0 / alpha) * x


def sample_subordinator(alpha, t, n, rng):
    """n positive draws of the clock S_t with E e^{-lam S_t} = e^{-t lam^{alpha/2}}.

    Kanter's representation of the one-sided rho-stable law (rho = alpha/2),
    evaluated in log space for stability, then scaled by t^{2/alpha}.
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError("the subordinator requires alpha in (0, 2)")
    if t <= 0.0:
        raise DomainError("time scale must be positive")
    n = int(n)
    if n < 1:
        raise DomainError("sample count must be positive")
    g = _generator(rng)
    rho = 0.5 * alpha
    u = np.clip(g.random(n), 1e-16, 1.0 - 1e-16)
    w = np.maximum(g.standard_exponential(n), 1e-300)
    log_a = (
        rho / (1.0 - rho) * np.log(np.sin(rho * np.pi * u))
        + np.log(np.sin((1.0 - rho) * np.pi * u))
        - 1.0 / (1.0 - rho) * np.log(np.sin(np.pi * u))
    )
    s = np.exp((1.0 - rho) / rho * (log_a - np.log(w)))
    return t ** (2.0 / alpha) * s


def sample_stable_dd(alpha, d, t, n, rng):
    """n isotropic stable points in R^d: sqrt(2 S_t) times a standard d-normal.

    The Gaussian mixture over the subordinator clock gives characteristic
    function e^{-t |xi|^alpha} exactly.
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError("subordinated sampling requires alpha in (0, 2)")
    if int(d) != d or d < 1:
        raise DomainError("dimension must be a positive integer")
    s = sample_subordinator(alpha, t, n, rng)
    g = _generator(rng)
    z = g.standard_normal((int(n), int(d)))
    return np.sqrt(2.0 * s)[:, None] * z


def ou_stationary_sample(alpha, n, rng):
    """Exact draws from the stationary law of dX = -X dt + dL^alpha:
    alpha^{-1/alpha} times a unit-time stable draw (standard normal at alpha=2)."""
    if not 0.0 < alpha <= 2.0:
        raise DomainError("stability index must lie in (0, 2]")
    return alpha ** (-1.0 / alpha) * sample_stable_1d(alpha, 1.0, n, rng)


@dataclass(frozen=True)
class PathConfig:
    """Euler scheme configuration for dX = b(X) dt + dL^alpha.

    `drift` is any vectorized callable b(x); steps have length T/n_steps and
    the noise increments scale as h^{1/alpha}.
    """

    x0: float | np.ndarray
    horizon: float
    n_steps: int
    alpha: float
    drift: object

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise DomainError("horizon must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError("n_steps must be a positive integer")
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError("stability index must lie in (0, 2]")
        if not callable(self.drift):
            raise DomainError("drift must be callable")


def euler_maruyama(cfg, rng, n_paths=1, return_path=False):
    """Terminal states of n_paths Euler chains (optionally the full paths).

    X_{k+1} = X_k + b(X_k) h + dL_k with dL_k an exact stable draw at time
    scale h.  A non-finite state aborts with the offending step index.
    """
    n_paths = int(n_paths)
    if n_paths < 1:
        raise DomainError("n_paths must be positive")
    x0 = np.atleast_1d(np.asarray(cfg.x0, dtype=float))
    d = x0.size
    h = cfg.horizon / cfg.n_steps
    if d == 1:
        x = np.full(n_paths, float(x0[0]))
    else:
        x = np.tile(x0, (n_paths, 1))
    path = [x.copy()] if return_path else None
    for k in range(cfg.n_steps):
        b = np.asarray(cfg.drift(x), dtype=float)
        if b.shape != x.shape:
            b = np.broadcast_to(b, x.shape)
        if d == 1:
            if cfg.alpha == 2.0:
                dl = np.sqrt(2.0 * h) * _generator(rng).standard_normal(n_paths)
            else:
                dl = sample_stable_1d(cfg.alpha, h, n_paths, rng)
        else:
            if cfg.alpha == 2.0:
                dl = np.sqrt(2.0 * h) * _generator(rng).standard_normal((n_paths, d))
            else:
                dl = sample_stable_dd(cfg.alpha, d, h, n_paths, rng)
        x = x + h * b + dl
        if not np.all(np.isfinite(x)):
            raise NumericsError(f"non-finite state at step {k + 1} of {cfg.n_steps}")
        if return_path:
            path.append(x.copy())
    if return_path:
        return x, np.stack(path)
    return x


def silverman_bandwidth(samples):
    """Robust Silverman rule: 0.9 min(std, IQR/1.34) n^{-1/5}."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < 2:
        raise DomainError("bandwidth selection needs at least 2 samples")
    spread = min(float(np.std(samples)), float(np.subtract(*np.percentile(samples, [75, 25]))) / 1.34)
    if spread <= 0.0:
        spread = max(float(np.std(samples)), 1e-12)
    return 0.9 * spread * n ** (-0.2)


def density_from_samples(samples, grid, bandwidth=None):
    """Gaussian-kernel density estimate binned onto the grid.

    The estimate is normalized so its trapezoid mass equals the fraction of
    samples falling inside the grid window; a window losing more than 0.1%
    of the mass sets the mass_deficit flag.
    """
    samples = np.asarray(samples, dtype=float).reshape(-1)
    if samples.size < 1000:
        raise ConfigError("density estimation needs at least 10^3 samples")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 8:
        raise ConfigError("grid must be a 1-D array with at least 8 nodes")
    h = grid[1] - grid[0]
    inside = samples[(samples >= grid[0]) & (samples <= grid[-1])]
    captured = inside.size / samples.size
    if inside.size == 0:
        raise ConfigError("the grid window contains no samples")
    bw = silverman_bandwidth(inside) if bandwidth is None else float(bandwidth)
    if bw <= 0.0:
        raise ConfigError("bandwidth must be positive")
    edges = np.concatenate([grid - 0.5 * h, [grid[-1] + 0.5 * h]])
    counts, _ = np.histogram(inside, bins=edges)
    raw = counts / (samples.size * h)
    smooth = gaussian_filter1d(raw, sigma=max(bw / h, 1e-6), mode="constant")
    mass = float(np.trapezoid(smooth, grid))
    if mass <= 0.0:
        raise NumericsError("density estimate lost all mass")
    values = smooth * (captured / mass)
    return GridDensity(
        grid=grid,
        values=values,
        captured_mass=captured,
        mass_deficit=captured < 0.999,
    )
