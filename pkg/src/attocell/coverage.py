"""Analytic coverage probability over the attocell.

The SINR event gamma(z) > theta is equivalent to the weighted-interference
event C < eta with

    C   = sum_i alpha_i (D_i^2 + h^2)^(-beta)              (interference)
    eta = (z^2 + h^2)^(-beta) / theta - sigma^2 / (K^2 P_o^2 R_pd^2)

so the gain constant squares cancel.  The thinned interference C is a sum of
independent scaled Bernoulli terms with mean ``mu = p S_m`` and variance
``sigma1^2 = p (1-p) S_v``; approximating C as Gaussian gives the
conditional coverage

    P[C < eta | z] = [erf((eta - mu) / (sqrt(2) sigma1))
                      + erf(mu / (sqrt(2) sigma1))] / 2

clamped to [0, 1] (the Gaussian mass is taken over [0, eta] because C >= 0,
so eta <= 0 means no coverage).  At p in {0, 1} the interference is
deterministic and the probability degenerates to the indicator of
``mu < eta``.  The spatially averaged coverage is the mean of the
conditional coverage over the a x a attocell, computed with tensor-product
Gauss-Legendre quadrature, optionally folded onto one octant via the 8-fold
dihedral symmetry of the integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .lattice_sums import _series_value, sm_brute, sm_series, sv_brute, sv_series
from .model import (
    DerivedConstants,
    NetworkGeometry,
    OpticalConfig,
    position_xy,
)

__all__ = [
    "ConditionalCoverage",
    "CoverageCurve",
    "db_to_linear",
    "linear_to_db",
    "eta",
    "conditional_coverage",
    "coverage_at",
    "coverage_spatial",
    "coverage_curve",
    "attocell_quadrature",
    "threshold_at_level",
]

_SQRT2 = math.sqrt(2.0)


def db_to_linear(theta_db):
    """Electrical SINR threshold: theta = 10^(dB/10)."""
    return 10.0 ** (np.asarray(theta_db, dtype=float) / 10.0)


def linear_to_db(theta_linear):
    return 10.0 * np.log10(np.asarray(theta_linear, dtype=float))


def eta(
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    pos,
    theta_linear: float,
    consts: DerivedConstants | None = None,
) -> float:
    """Interference threshold eta(z, theta); may be negative once noise
    alone pushes the SINR below theta."""
    t = float(theta_linear)
    if not (math.isfinite(t) and t > 0.0):
        raise ValueError(f"theta must be finite and > 0, got {theta_linear!r}")
    if consts is None:
        consts = DerivedConstants.from_configs(optical, geometry)
    zx, zy = position_xy(pos)
    h = geometry.height
    signal = (zx * zx + zy * zy + h * h) ** (-consts.beta)
    noise = consts.noise_var / (
        consts.gain_const**2 * optical.power**2 * optical.responsivity**2
    )
    return signal / t - noise


def _noise_term(optical: OpticalConfig, consts: DerivedConstants) -> float:
    return consts.noise_var / (
        consts.gain_const**2 * optical.power**2 * optical.responsivity**2
    )


def conditional_coverage(eta_value: float, mu: float, sigma1: float) -> float:
    """Gaussian mass of the interference on [0, eta], clamped to [0, 1].

    sigma1 = 0 is the degenerate (deterministic interference) case and
    returns the indicator of mu < eta_value.
    """
    if sigma1 < 0.0 or mu < 0.0:
        raise ValueError("mu and sigma1 must be >= 0")
    if sigma1 == 0.0:
        return 1.0 if mu < eta_value else 0.0
    value = 0.5 * (
        specfun.erf((eta_value - mu) / (_SQRT2 * sigma1))
        + specfun.erf(mu / (_SQRT2 * sigma1))
    )
    return min(1.0, max(0.0, value))


def _gaussian_mass(eta_values: np.ndarray, mu: np.ndarray, sigma1: np.ndarray) -> np.ndarray:
    """Vectorized conditional coverage for sigma1 > 0 everywhere, or the
    indicator path when sigma1 == 0 everywhere (p in {0, 1})."""
    if np.all(sigma1 == 0.0):
        return (mu < eta_values).astype(float)
    arg = specfun.erf((eta_values - mu) / (_SQRT2 * sigma1)) + specfun.erf(
        mu / (_SQRT2 * sigma1)
    )
    return np.clip(0.5 * arg, 0.0, 1.0)


@dataclass(frozen=True)
class ConditionalCoverage:
    """Coverage at one position and threshold, with its ingredients."""

    eta: float
    mu: float
    sigma1: float
    value: float


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"thinning probability must be in [0, 1], got {p!r}")
    return p


def coverage_at(
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    p: float,
    pos,
    theta_linear: float,
    sums: str = "series",
    jl: tuple[int, int] = (1, 1),
    trunc: int | None = None,
) -> ConditionalCoverage:
    """Conditional coverage P[gamma(z) > theta | z] at one position.

    ``sums`` selects how the moment sums are evaluated: "series" (closed
    form, default) or "brute" (truncated direct summation).
    """
    p = _check_p(p)
    consts = DerivedConstants.from_configs(optical, geometry)
    if sums == "series":
        s_m = sm_series(geometry, consts.beta, pos, jl).value
        s_v = sv_series(geometry, consts.beta, pos, jl).value
    elif sums == "brute":
        s_m = sm_brute(geometry, consts.beta, pos, trunc).value
        s_v = sv_brute(geometry, consts.beta, pos, trunc).value
    else:
        raise ValueError(f"sums must be 'series' or 'brute', got {sums!r}")
    mu = p * s_m
    sigma1 = math.sqrt(p * (1.0 - p) * s_v)
    e = eta(optical, geometry, pos, theta_linear, consts)
    return ConditionalCoverage(
        eta=e, mu=mu, sigma1=sigma1, value=conditional_coverage(e, mu, sigma1)
    )


def attocell_quadrature(
    geometry: NetworkGeometry, order: int, use_symmetry: bool = True
):
    """Tensor Gauss-Legendre nodes over the attocell [-a/2, a/2]^2.

    Returns (zx, zy, weights) with weights summing to 1 (the 1/a^2 spatial
    averaging is folded in).  With ``use_symmetry`` the grid is folded onto
    one octant through the mirror and swap symmetries of the integrand,
    cutting the node count roughly 8x without changing the sum beyond
    roundoff.
    """
    order = int(order)
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order!r}")
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * geometry.pitch * x
    w = 0.5 * w  # per-axis weights now sum to 1
    if not use_symmetry:
        zx, zy = np.meshgrid(x, x, indexing="ij")
        return zx.ravel(), zy.ravel(), np.outer(w, w).ravel()
    # fold +-x pairs (leggauss nodes are symmetric and ascending)
    mid = order // 2
    if order % 2 == 0:
        hx = x[mid:]
        hw = 2.0 * w[mid:]
    else:
        hx = x[mid:]
        hw = np.concatenate([[w[mid]], 2.0 * w[mid + 1 :]])
    # fold the swap symmetry onto the triangle i >= j
    zx_list, zy_list, w_list = [], [], []
    for i in range(hx.size):
        for j in range(i + 1):
            zx_list.append(hx[i])
            zy_list.append(hx[j])
            w_list.append(hw[i] * hw[j] if i == j else 2.0 * hw[i] * hw[j])
    return np.array(zx_list), np.array(zy_list), np.array(w_list)


def _node_moment_sums(
    geometry: NetworkGeometry,
    beta: float,
    zx: np.ndarray,
    zy: np.ndarray,
    sums: str,
    jl: tuple[int, int],
    trunc: int | None,
):
    if sums == "series":
        s_m = np.asarray(_series_value(geometry, beta, zx, zy, jl, False), dtype=float)
        s_v = np.asarray(_series_value(geometry, 2.0 * beta, zx, zy, jl, False), dtype=float)
    elif sums == "brute":
        s_m = np.array([sm_brute(geometry, beta, (x, y), trunc).value for x, y in zip(zx, zy)])
        s_v = np.array([sv_brute(geometry, beta, (x, y), trunc).value for x, y in zip(zx, zy)])
    else:
        raise ValueError(f"sums must be 'series' or 'brute', got {sums!r}")
    return s_m, s_v


def _spatial_values(
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    p: float,
    theta_linear: np.ndarray,
    quad_order: int,
    sums: str,
    use_symmetry: bool,
    jl: tuple[int, int],
    trunc: int | None,
) -> np.ndarray:
    p = _check_p(p)
    consts = DerivedConstants.from_configs(optical, geometry)
    if use_symmetry and sums == "series" and jl[0] != jl[1]:
        # swap symmetry requires a square mode window
        use_symmetry = False
    zx, zy, wq = attocell_quadrature(geometry, quad_order, use_symmetry)
    s_m, s_v = _node_moment_sums(geometry, consts.beta, zx, zy, sums, jl, trunc)
    mu = p * s_m
    sigma1 = np.sqrt(p * (1.0 - p) * s_v)
    signal = (zx * zx + zy * zy + geometry.height**2) ** (-consts.beta)
    noise = _noise_term(optical, consts)
    eta_grid = signal[None, :] / theta_linear[:, None] - noise
    mass = _gaussian_mass(eta_grid, mu[None, :], sigma1[None, :])
    return np.clip(mass @ wq, 0.0, 1.0)


def coverage_spatial(
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    p: float,
    theta_linear: float,
    quad_order: int = 32,
    sums: str = "series",
    use_symmetry: bool = True,
    jl: tuple[int, int] = (1, 1),
    trunc: int | None = None,
) -> float:
    """Coverage probability averaged over the attocell at one threshold."""
    t = float(theta_linear)
    if not (math.isfinite(t) and t > 0.0):
        raise ValueError(f"theta must be finite and > 0, got {theta_linear!r}")
    values = _spatial_values(
        optical, geometry, p, np.array([t]), quad_order, sums, use_symmetry, jl, trunc
    )
    return float(values[0])


@dataclass(frozen=True)
class CoverageCurve:
    """Coverage probability against a grid of SINR thresholds."""

    theta_db: np.ndarray
    theta_linear: np.ndarray
    values: np.ndarray
    method: str
    config: dict = field(default_factory=dict)
    stderr: np.ndarray | None = None

    def __post_init__(self):
        if not (self.theta_db.shape == self.theta_linear.shape == self.values.shape):
            raise ValueError("theta grids and values must have matching shapes")
        if np.any(self.values < 0.0) or np.any(self.values > 1.0):
            raise ValueError("coverage values must lie in [0, 1]")
        if self.stderr is not None and self.stderr.shape != self.values.shape:
            raise ValueError("stderr must match the grid shape")


def _curve_config(
    optical: OpticalConfig, geometry: NetworkGeometry, p: float, **extra
) -> dict:
    cfg = {
        "optical": vars(optical).copy(),
        "geometry": {"pitch": geometry.pitch, "height": geometry.height, "trunc": geometry.trunc},
        "p": p,
    }
    cfg.update(extra)
    return cfg


def coverage_curve(
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    p: float,
    theta_db,
    quad_order: int = 32,
    sums: str = "series",
    use_symmetry: bool = True,
    jl: tuple[int, int] = (1, 1),
    trunc: int | None = None,
) -> CoverageCurve:
    """Spatially averaged coverage over a threshold grid (dB).

    The moment sums are evaluated once per quadrature node and reused across
    the grid, so the cost is one lattice-sum pass plus one erf evaluation
    per (node, theta) pair.
    """
    p = _check_p(p)
    theta_db = np.atleast_1d(np.asarray(theta_db, dtype=float))
    theta_lin = db_to_linear(theta_db)
    values = _spatial_values(
        optical, geometry, p, theta_lin, quad_order, sums, use_symmetry, jl, trunc
    )
    return CoverageCurve(
        theta_db=theta_db,
        theta_linear=theta_lin,
        values=values,
        method=f"analytic-{sums}",
        config=_curve_config(
            optical,
            geometry,
            p,
            quad_order=quad_order,
            sums=sums,
            use_symmetry=bool(use_symmetry),
            jl=list(jl),
        ),
    )


def threshold_at_level(curve: CoverageCurve, level: float) -> float | None:
    """Threshold (dB) at which a nonincreasing curve crosses ``level``,
    linearly interpolated on the grid; None if it never does."""
    v = curve.values
    below = np.flatnonzero(v < level)
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(curve.theta_db[0])
    x0, x1 = curve.theta_db[i - 1], curve.theta_db[i]
    y0, y1 = v[i - 1], v[i]
    if y0 == y1:
        return float(x1)
    return float(x0 + (y0 - level) * (x1 - x0) / (y0 - y1))
