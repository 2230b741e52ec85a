"""Monte Carlo oracle for the thinned-interference coverage pipeline.

Draws Bernoulli thinning realizations over the truncated interferer lattice,
accumulates the exact weighted interference C = sum_i alpha_i w_i with
w_i = (D_i^2 + h^2)^(-beta), and estimates coverage as the fraction of
realizations with C < eta.  No Gaussian approximation and no closed-form
series enter anywhere on this path, which is what makes it a usable
cross-check of the analytic pipeline.

Reproducibility contract
------------------------
All randomness comes from counter-based Philox streams derived as

    stream(seed, *path) = Philox(SeedSequence([seed, *path]))

Pointwise estimators consume ``stream(seed)``; the spatial estimators give
quadrature node ``i`` its own ``stream(seed, i)``, so node workers can run
in any order (or in parallel) and still produce bit-identical results.
Within a stream, trials are consumed in fixed row-major blocks; the block
size does not change the sequence.  Uniform variates are drawn as float32
(granularity 2^-24, a negligible Bernoulli bias) and one uniform per site
is shared across the whole ``p`` grid, so thinning realizations are coupled
by common random numbers: raising p can only add interferers, making
realization-wise monotonicity in p exact.  Coverage tallies are integer
counts, never floating accumulations.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import specfun
from .coverage import attocell_quadrature, eta as eta_at
from .lattice_sums import sm_brute, sv_brute
from .model import (
    DerivedConstants,
    NetworkGeometry,
    OpticalConfig,
    interferer_distance_sq,
    tail_bound,
)

__all__ = [
    "ThinningModel",
    "McEstimate",
    "CltDiagnostics",
    "substream",
    "interference_weights",
    "sample_interference",
    "interference_samples",
    "empirical_coverage",
    "empirical_coverage_grid",
    "empirical_coverage_spatial",
    "empirical_coverage_curves",
    "clt_diagnostics",
]

_DEFAULT_BLOCK = 1024


@dataclass(frozen=True)
class ThinningModel:
    """Bernoulli thinning: each interferer transmits with probability p.

    ``trunc`` overrides the geometry's lattice truncation for sampling
    (None inherits it); the tagged LED is never part of the realization.
    """

    p: float
    seed: int
    trunc: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"thinning probability must be in [0, 1], got {self.p!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.trunc is not None and (int(self.trunc) != self.trunc or self.trunc < 1):
            raise ValueError(f"trunc must be an integer >= 1, got {self.trunc!r}")


@dataclass(frozen=True)
class McEstimate:
    """A coverage estimate: sample mean, binomial standard error, and the
    (trials, seed) pair that reproduces it."""

    mean: float
    stderr: float
    trials: int
    seed: int


@dataclass(frozen=True)
class CltDiagnostics:
    """First two moments of the interference samples plus the one-sample
    Kolmogorov-Smirnov distance of the standardized samples from N(0, 1)."""

    sample_mean: float
    sample_var: float
    ks_stat: float
    trials: int


def substream(seed: int, *path: int) -> np.random.Generator:
    """Deterministic Philox stream for (seed, *path); see module docstring."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, path)])))


def _effective_trunc(model: ThinningModel, geometry: NetworkGeometry) -> int:
    return geometry.trunc if model.trunc is None else int(model.trunc)


def interference_weights(
    geometry: NetworkGeometry, beta: float, pos, trunc: int | None = None
) -> np.ndarray:
    """Per-site interference weights (D_i^2 + h^2)^(-beta) in
    ``lattice_sites`` order."""
    d2 = interferer_distance_sq(geometry, pos, trunc)
    return (d2 + geometry.height**2) ** (-float(beta))


def sample_interference(
    model: ThinningModel,
    geometry: NetworkGeometry,
    beta: float,
    pos,
    rng: np.random.Generator | None = None,
) -> float:
    """One realization of C over the truncated lattice.

    Passing an explicit generator continues its stream; otherwise the draw
    is the first trial of ``substream(model.seed)``.
    """
    if rng is None:
        rng = substream(model.seed)
    w = interference_weights(geometry, beta, pos, _effective_trunc(model, geometry))
    u = rng.random(w.size, dtype=np.float32)
    return float(np.asarray(u < np.float32(model.p), dtype=float) @ w)


def interference_samples(
    model: ThinningModel,
    geometry: NetworkGeometry,
    beta: float,
    pos,
    trials: int,
    rng: np.random.Generator | None = None,
    block: int = _DEFAULT_BLOCK,
) -> np.ndarray:
    """``trials`` iid realizations of C as a float64 array."""
    trials = int(trials)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    if rng is None:
        rng = substream(model.seed)
    w = interference_weights(geometry, beta, pos, _effective_trunc(model, geometry))
    p32 = np.float32(model.p)
    out = np.empty(trials)
    done = 0
    while done < trials:
        b = min(block, trials - done)
        u = rng.random((b, w.size), dtype=np.float32)
        out[done : done + b] = np.asarray(u < p32, dtype=float) @ w
        done += b
    return out


def _count_below(samples: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Counts of samples strictly below each threshold, via one sort."""
    s = np.sort(samples)
    return np.searchsorted(s, thresholds, side="left")


def empirical_coverage(
    model: ThinningModel,
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    pos,
    theta_linear: float,
    trials: int,
) -> McEstimate:
    """Fraction of realizations with C < eta(z, theta); deterministic for a
    fixed (model, config)."""
    means, stderrs = empirical_coverage_grid(
        model, optical, geometry, pos, np.array([float(theta_linear)]), trials
    )
    return McEstimate(mean=float(means[0]), stderr=float(stderrs[0]), trials=int(trials), seed=model.seed)


def empirical_coverage_grid(
    model: ThinningModel,
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    pos,
    theta_linear_grid,
    trials: int,
):
    """Empirical coverage across a threshold grid from one common sample
    set (common random numbers), so the result is exactly nonincreasing in
    theta.  Returns (means, stderrs) arrays."""
    theta = np.atleast_1d(np.asarray(theta_linear_grid, dtype=float))
    consts = DerivedConstants.from_configs(optical, geometry)
    etas = np.array([eta_at(optical, geometry, pos, t, consts) for t in theta])
    samples = interference_samples(model, geometry, consts.beta, pos, trials)
    counts = _count_below(samples, etas)
    means = counts / float(trials)
    stderrs = np.sqrt(means * (1.0 - means) / float(trials))
    return means, stderrs


def _node_counts(
    seed: int,
    node_index: int,
    pitch: float,
    height: float,
    trunc: int,
    beta: float,
    zx: float,
    zy: float,
    eta_row: np.ndarray,
    p_list: tuple[float, ...],
    trials: int,
    block: int,
) -> np.ndarray:
    """Coverage counts (len(p_list), len(eta_row)) for one quadrature node.

    One float32 uniform per (trial, site) is shared across the whole p
    grid (common random numbers); C is accumulated in float64.
    """
    geometry = NetworkGeometry(pitch=pitch, height=height, trunc=trunc)
    w = interference_weights(geometry, beta, (zx, zy), trunc)
    rng = substream(seed, node_index)
    counts = np.zeros((len(p_list), eta_row.size), dtype=np.int64)
    done = 0
    while done < trials:
        b = min(block, trials - done)
        u = rng.random((b, w.size), dtype=np.float32)
        for k, p in enumerate(p_list):
            c = np.asarray(u < np.float32(p), dtype=float) @ w
            counts[k] += (c[:, None] < eta_row[None, :]).sum(axis=0)
        done += b
    return counts


def _node_counts_star(args):
    return _node_counts(*args)


def _spatial_counts(
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    p_list: tuple[float, ...],
    theta_linear: np.ndarray,
    seed: int,
    trials_per_node: int,
    quad_order: int,
    trunc: int,
    n_jobs: int,
    block: int,
    use_symmetry: bool,
):
    """Per-node coverage counts for all (p, theta); nodes may be evaluated
    in parallel, with results identical to the serial order."""
    consts = DerivedConstants.from_configs(optical, geometry)
    zx, zy, wq = attocell_quadrature(geometry, quad_order, use_symmetry)
    noise = consts.noise_var / (
        consts.gain_const**2 * optical.power**2 * optical.responsivity**2
    )
    h = geometry.height
    args = [
        (
            seed,
            i,
            geometry.pitch,
            h,
            trunc,
            consts.beta,
            float(zx[i]),
            float(zy[i]),
            (zx[i] * zx[i] + zy[i] * zy[i] + h * h) ** (-consts.beta) / theta_linear - noise,
            p_list,
            trials_per_node,
            block,
        )
        for i in range(zx.size)
    ]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            counts = list(pool.map(_node_counts_star, args, chunksize=1))
    else:
        counts = [_node_counts(*a) for a in args]
    return np.stack(counts), wq


def empirical_coverage_spatial(
    model: ThinningModel,
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    theta_linear: float,
    trials_per_node: int,
    quad_order: int = 16,
    n_jobs: int = 1,
    block: int = _DEFAULT_BLOCK,
    use_symmetry: bool = False,
) -> McEstimate:
    """Quadrature-weighted average of the empirical coverage over the
    attocell; node i draws from ``substream(seed, i)``."""
    means, stderrs, _ = empirical_coverage_curves(
        optical,
        geometry,
        (model.p,),
        theta_db=None,
        theta_linear=np.array([float(theta_linear)]),
        seed=model.seed,
        trials_per_node=trials_per_node,
        quad_order=quad_order,
        trunc=model.trunc,
        n_jobs=n_jobs,
        block=block,
        use_symmetry=use_symmetry,
    )
    return McEstimate(
        mean=float(means[0, 0]),
        stderr=float(stderrs[0, 0]),
        trials=int(trials_per_node),
        seed=model.seed,
    )


def empirical_coverage_curves(
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    p_list,
    theta_db=None,
    theta_linear=None,
    seed: int = 0,
    trials_per_node: int = 10000,
    quad_order: int = 16,
    trunc: int | None = None,
    n_jobs: int = 1,
    block: int = _DEFAULT_BLOCK,
    use_symmetry: bool = False,
):
    """Spatially averaged empirical coverage over (p, theta) grids.

    All p values share every uniform draw and all thresholds share every
    realization, so comparisons across the grids are coupled.  Returns
    (means, stderrs, tail) where means/stderrs have shape
    (len(p_list), len(theta)) and tail bounds the interference mass omitted
    by the sampling truncation.
    """
    if (theta_db is None) == (theta_linear is None):
        raise ValueError("provide exactly one of theta_db, theta_linear")
    if theta_linear is None:
        theta_linear = 10.0 ** (np.atleast_1d(np.asarray(theta_db, dtype=float)) / 10.0)
    theta_linear = np.atleast_1d(np.asarray(theta_linear, dtype=float))
    p_list = tuple(float(p) for p in p_list)
    for p in p_list:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"thinning probability must be in [0, 1], got {p!r}")
    trials_per_node = int(trials_per_node)
    if trials_per_node < 1:
        raise ValueError(f"trials_per_node must be >= 1, got {trials_per_node!r}")
    t = geometry.trunc if trunc is None else int(trunc)
    consts = DerivedConstants.from_configs(optical, geometry)
    counts, wq = _spatial_counts(
        optical,
        geometry,
        p_list,
        theta_linear,
        int(seed),
        trials_per_node,
        quad_order,
        t,
        int(n_jobs),
        int(block),
        use_symmetry,
    )
    phat = counts / float(trials_per_node)  # (nodes, p, theta)
    # quadrature weights sum to 1 only up to roundoff, so clip the average
    means = np.clip(np.einsum("i,ipt->pt", wq, phat), 0.0, 1.0)
    var = np.einsum("i,ipt->pt", wq**2, phat * (1.0 - phat)) / float(trials_per_node)
    return means, np.sqrt(var), tail_bound(geometry, consts.beta, t)


def _ks_statistic_normal(standardized: np.ndarray) -> float:
    """One-sample Kolmogorov-Smirnov distance from the standard normal."""
    z = np.sort(standardized)
    n = z.size
    cdf = 0.5 * (1.0 + specfun.erf(z / math.sqrt(2.0)))
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


def clt_diagnostics(
    model: ThinningModel,
    geometry: NetworkGeometry,
    beta: float,
    pos,
    trials: int,
) -> CltDiagnostics:
    """Gaussian-approximation quality of C at one position.

    Samples are standardized by the brute-force moments (p S_m,
    sqrt(p (1-p) S_v)) over the same truncated lattice used for sampling,
    then compared against N(0, 1).  Undefined at p in {0, 1} where C is
    deterministic.
    """
    if not 0.0 < model.p < 1.0:
        raise ValueError("clt diagnostics require 0 < p < 1")
    t = _effective_trunc(model, geometry)
    samples = interference_samples(model, geometry, beta, pos, trials)
    s_m = sm_brute(geometry, beta, pos, t).value
    s_v = sv_brute(geometry, beta, pos, t).value
    mu = model.p * s_m
    sigma1 = math.sqrt(model.p * (1.0 - model.p) * s_v)
    return CltDiagnostics(
        sample_mean=float(samples.mean()),
        sample_var=float(samples.var(ddof=1)),
        ks_stat=_ks_statistic_normal((samples - mu) / sigma1),
        trials=int(trials),
    )
