"""Tabulated probability densities on uniform 1-D grids, with the mass
accounting used by the measure-distance layer."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["GridDensity", "tabulate", "uniform_grid"]


def uniform_grid(lo, hi, n):
    """Uniform grid of n nodes on [lo, hi]."""
    if not lo < hi:
        raise DomainError("grid bounds must satisfy lo < hi")
    if n < 2:
        raise DomainError("a grid needs at least 2 nodes")
    return np.linspace(float(lo), float(hi), int(n))


@dataclass
class GridDensity:
    """Nonnegative density values on a uniform grid.

    `captured_mass` is the trapezoid mass actually represented on the grid
    (at most 1; strictly below 1 when tails are clipped).  `mass_deficit`
    flags estimates whose window lost more than 0.1% of the sample mass.
    `stderr` optionally carries a pointwise uncertainty band.
    """

    grid: np.ndarray
    values: np.ndarray
    captured_mass: float
    mass_deficit: bool = False
    stderr: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise DomainError("grid must be a 1-D array with at least 2 nodes")
        steps = np.diff(self.grid)
        h = steps[0]
        if h <= 0.0 or np.any(np.abs(steps - h) > 1e-9 * max(abs(h), 1.0)):
            raise DomainError("grid must be uniform and increasing")
        if self.values.shape != self.grid.shape:
            raise DomainError("values must match the grid shape")
        if np.any(self.values < -1e-12):
            raise DomainError("density values must be nonnegative")
        self.values = np.maximum(self.values, 0.0)
        if not 0.0 < self.captured_mass <= 1.0 + 1e-9:
            raise DomainError("captured_mass must lie in (0, 1]")
        mass = float(np.trapezoid(self.values, self.grid))
        if abs(mass - self.captured_mass) > 1e-6 * max(1.0, self.captured_mass):
            raise DomainError(
                "captured_mass inconsistent with the tabulated values "
                f"({self.captured_mass:.9g} vs trapezoid {mass:.9g})"
            )
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != self.grid.shape:
                raise DomainError("stderr must match the grid shape")

    @property
    def h(self):
        return float(self.grid[1] - self.grid[0])

    def mass(self):
        """Trapezoid mass of the tabulated values."""
        return float(np.trapezoid(self.values, self.grid))

    def moment(self, p):
        """Trapezoid estimate of the captured p-th absolute moment."""
        if p < 0.0:
            raise DomainError("moment order must be nonnegative")
        return float(np.trapezoid(np.abs(self.grid) ** p * self.values, self.grid))

    def interpolate(self, x):
        """Linear interpolation of the density (0 outside the grid)."""
        return np.interp(np.asarray(x, dtype=float), self.grid, self.values, left=0.0, right=0.0)


def tabulate(grid, values, *, stderr=None, mass_deficit=False):
    """GridDensity from values tabulated on the grid.

    The captured mass is measured by trapezoid; a slight quadrature
    overshoot past 1 is renormalized down so the mass invariant holds.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.maximum(np.asarray(values, dtype=float), 0.0)
    mass = float(np.trapezoid(values, grid))
    if mass <= 0.0:
        raise DomainError("tabulated values carry no mass")
    if mass > 1.0:
        values = values / mass
        if stderr is not None:
            stderr = np.asarray(stderr, dtype=float) / mass
        mass = 1.0
    return GridDensity(
        grid=grid,
        values=values,
        captured_mass=mass,
        mass_deficit=mass_deficit,
        stderr=stderr,
    )
