"""stablekern: alpha-stable heat-kernel numerics and rate certifications.

Library layers, bottom up:

- special / profiles: jump-measure constants, two-regime bound envelopes;
- density: the d=1 stable kernel (oscillatory quadrature), its derivatives,
  the cancellation-free stable-vs-Gaussian difference, subordination in any
  dimension, and the bound/rate certifications built on them;
- sampling: stable and subordinator samplers, Euler scheme for drifted SDEs;
- drift: drift catalog, mollified flows;
- parametrix: frozen-kernel Duhamel series for drifted stable generators on
  space-time grids;
- metrics: grid densities, variation/transport distances, invariant-measure
  pipelines, log-log rate fits;
- cli: the `stablekern` experiment driver.
"""

from ._backend import backend_name
from .config import ExperimentConfig, emit_manifest, parse_config, read_manifest
from .density import (
    StableKernelSpec,
    StableProfile,
    SubordinatorSpec,
    certify_diff_rate,
    certify_uniform_bound,
    density,
    density_derivative,
    density_diff,
    density_subordination,
    gaussian_density,
)
from .drift import (
    DriftSpec,
    MollifierSpec,
    certify_dissipativity,
    certify_holder,
    drift_catalog,
    flow,
    mollified_drift,
    mollify,
)
from .errors import ConfigError, DomainError, NumericsError, StableKernError
from .fits import RateFit, rate_fit
from .grids import GridDensity, tabulate, uniform_grid
from .metrics import (
    estimate_invariant,
    moment_sweep,
    ou_char_lower_bound,
    ou_exact_stationary,
    ou_exact_transition,
    transport_cost,
    var_distance,
    weighted_var_distance,
)
from .parametrix import (
    SpaceTimeGrid,
    SpaceTimeKernel,
    certify_theorem_1_1,
    frozen_kernel,
    heat_kernel,
    log_gradient_check,
    phi,
    q0,
    q_series,
    read_panel,
    tensor_convolve,
    write_panel,
)
from .profiles import BoundProfile, check_3p, crossover_radius, rho, rho_mass, rho_mass_exponent
from .sampling import (
    PathConfig,
    RngStream,
    density_from_samples,
    euler_maruyama,
    ou_stationary_sample,
    sample_stable_1d,
    sample_stable_dd,
    sample_subordinator,
)
from .special import (
    LevyMeasureSpec,
    frac_laplacian,
    levy_constant,
    levy_tail_integral,
    sphere_area,
    tail_bound_constant,
)

__version__ = "0.1.0"

__all__ = [
    "BoundProfile",
    "ConfigError",
    "DomainError",
    "DriftSpec",
    "ExperimentConfig",
    "GridDensity",
    "LevyMeasureSpec",
    "MollifierSpec",
    "NumericsError",
    "PathConfig",
    "RateFit",
    "RngStream",
    "SpaceTimeGrid",
    "SpaceTimeKernel",
    "StableKernError",
    "StableKernelSpec",
    "StableProfile",
    "SubordinatorSpec",
    "backend_name",
    "certify_diff_rate",
    "certify_dissipativity",
    "certify_holder",
    "certify_theorem_1_1",
    "certify_uniform_bound",
    "check_3p",
    "crossover_radius",
    "density",
    "density_derivative",
    "density_diff",
    "density_from_samples",
    "density_subordination",
    "drift_catalog",
    "emit_manifest",
    "estimate_invariant",
    "euler_maruyama",
    "flow",
    "frac_laplacian",
    "frozen_kernel",
    "gaussian_density",
    "heat_kernel",
    "levy_constant",
    "levy_tail_integral",
    "log_gradient_check",
    "moment_sweep",
    "mollified_drift",
    "mollify",
    "ou_char_lower_bound",
    "ou_exact_stationary",
    "ou_exact_transition",
    "ou_stationary_sample",
    "parse_config",
    "phi",
    "q0",
    "q_series",
    "rate_fit",
    "read_manifest",
    "read_panel",
    "rho",
    "rho_mass",
    "rho_mass_exponent",
    "sample_stable_1d",
    "sample_stable_dd",
    "sample_subordinator",
    "sphere_area",
    "tabulate",
    "tail_bound_constant",
    "tensor_convolve",
    "transport_cost",
    "uniform_grid",
    "var_distance",
    "weighted_var_distance",
    "write_panel",
    "__version__",
]
