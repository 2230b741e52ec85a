"""Coverage probability for Bernoulli-thinned square-grid LiFi attocells.

The library has three layers: an analytic pipeline (closed-form lattice
sums feeding a Gaussian conditional-coverage formula, spatially averaged
over the attocell), an independent Monte Carlo oracle that samples thinning
realizations outright, and a CLI that sweeps both over parameter grids and
writes CSV curves.
"""

from .coverage import (
    ConditionalCoverage,
    CoverageCurve,
    attocell_quadrature,
    conditional_coverage,
    coverage_at,
    coverage_curve,
    coverage_spatial,
    db_to_linear,
    eta,
    linear_to_db,
    threshold_at_level,
)
from .lattice_sums import SumMethod, SumResult, sm_brute, sm_series, sv_brute, sv_series
from .model import (
    DerivedConstants,
    NetworkGeometry,
    OpticalConfig,
    ReceiverPosition,
    TABLE_DEFAULT_OPTICS,
    channel_gain,
    lambertian_order,
    lattice_sites,
    sinr,
)
from .montecarlo import (
    CltDiagnostics,
    McEstimate,
    ThinningModel,
    clt_diagnostics,
    empirical_coverage,
    empirical_coverage_curves,
    empirical_coverage_grid,
    empirical_coverage_spatial,
    interference_samples,
    sample_interference,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionalCoverage",
    "CoverageCurve",
    "attocell_quadrature",
    "conditional_coverage",
    "coverage_at",
    "coverage_curve",
    "coverage_spatial",
    "db_to_linear",
    "eta",
    "linear_to_db",
    "threshold_at_level",
    "SumMethod",
    "SumResult",
    "sm_brute",
    "sm_series",
    "sv_brute",
    "sv_series",
    "DerivedConstants",
    "NetworkGeometry",
    "OpticalConfig",
    "ReceiverPosition",
    "TABLE_DEFAULT_OPTICS",
    "channel_gain",
    "lambertian_order",
    "lattice_sites",
    "sinr",
    "CltDiagnostics",
    "McEstimate",
    "ThinningModel",
    "clt_diagnostics",
    "empirical_coverage",
    "empirical_coverage_curves",
    "empirical_coverage_grid",
    "empirical_coverage_spatial",
    "interference_samples",
    "sample_interference",
    "__version__",
]
