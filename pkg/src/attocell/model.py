"""Physical model of a square-grid LiFi attocell downlink.

Ceiling LEDs sit on an infinite square lattice with pitch ``a`` at height
``h`` above the receiver plane; the photodiode (PD) lies on the floor at
``(z_x, z_y)`` inside the attocell of the tagged LED at the origin.  Every
LED is intensity-modulated with the same average optical power and a
Lambertian emission pattern; each non-tagged LED carries data (and therefore
interferes) independently with probability ``p``.

Units are plain SI throughout: metres, watts, amperes.  All configuration
objects are immutable after construction and every function here is pure.

The line-of-sight electrical quantities implemented below:

* Lambertian order       ``m = -ln 2 / ln cos(theta_h)``
* squared-gain exponent  ``beta = m + 3``
* gain constant          ``K = (m+1) A_pd h^(m+1) / (2 pi)``
  (kept verbatim, including the odd h^(m+1) dimensions; K^2 cancels from
  every coverage expression)
* channel gain           ``G(d) = K (d^2 + h^2)^(-beta/2)``
* receiver noise         ``sigma^2 = N_o W``
* electrical SINR        ``P_o^2 G_0^2 R_pd^2 /
  (sum_i alpha_i P_o^2 G_i^2 R_pd^2 + sigma^2)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "OpticalConfig",
    "NetworkGeometry",
    "ReceiverPosition",
    "DerivedConstants",
    "TABLE_DEFAULT_OPTICS",
    "lambertian_order",
    "channel_gain",
    "sinr",
    "lattice_sites",
    "interferer_distance_sq",
    "tail_bound",
]


def lambertian_order(half_angle: float) -> float:
    """Lambertian emission order m = -ln 2 / ln cos(half_angle).

    ``half_angle`` is the half-power semi-angle in radians and must lie in
    the open interval (0, pi/2); m is then strictly positive.
    """
    half_angle = float(half_angle)
    if not (0.0 < half_angle < math.pi / 2):
        raise ValueError(
            f"half-power semi-angle must be in (0, pi/2) rad, got {half_angle!r}"
        )
    return -math.log(2.0) / math.log(math.cos(half_angle))


@dataclass(frozen=True)
class OpticalConfig:
    """LED and photodiode parameters.

    power:        average optical power per LED, W
    pd_area:      photodiode area, m^2
    responsivity: photodiode responsivity, A/W
    half_angle:   LED half-power semi-angle, rad, in (0, pi/2)
    noise_psd:    noise power spectral density at the PD, A^2/Hz
    bandwidth:    modulation bandwidth, Hz
    """

    power: float
    pd_area: float
    responsivity: float
    half_angle: float
    noise_psd: float
    bandwidth: float

    def __post_init__(self):
        for name in ("power", "pd_area", "responsivity", "noise_psd", "bandwidth"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"optical.{name} must be finite and > 0, got {v!r}")
        if not (0.0 < self.half_angle < math.pi / 2):
            raise ValueError(
                f"optical.half_angle must be in (0, pi/2) rad, got {self.half_angle!r}"
            )


@dataclass(frozen=True)
class NetworkGeometry:
    """Square-lattice layout: pitch a (m), mounting height h (m) and the
    truncation half-width of the interferer lattice, in rings of sites."""

    pitch: float
    height: float
    trunc: int = 200

    def __post_init__(self):
        if not (math.isfinite(self.pitch) and self.pitch > 0):
            raise ValueError(f"geometry.pitch must be > 0, got {self.pitch!r}")
        if not (math.isfinite(self.height) and self.height > 0):
            raise ValueError(f"geometry.height must be > 0, got {self.height!r}")
        if int(self.trunc) != self.trunc or self.trunc < 1:
            raise ValueError(f"geometry.trunc must be an integer >= 1, got {self.trunc!r}")


@dataclass(frozen=True)
class ReceiverPosition:
    """PD location on the floor plane, metres from the tagged LED's axis."""

    x: float
    y: float

    @property
    def r_sq(self) -> float:
        return self.x * self.x + self.y * self.y


def position_xy(pos) -> tuple[float, float]:
    """Accept a ReceiverPosition or any (x, y) pair."""
    if isinstance(pos, ReceiverPosition):
        return pos.x, pos.y
    x, y = pos
    return float(x), float(y)


@dataclass(frozen=True)
class DerivedConstants:
    """Quantities derived from an (optics, geometry) pair.

    m:          Lambertian order
    beta:       m + 3, the exponent of the squared channel gain
    gain_const: K = (m+1) A_pd h^(m+1) / (2 pi)
    noise_var:  sigma^2 = N_o W, A^2
    """

    m: float
    beta: float
    gain_const: float
    noise_var: float

    @classmethod
    def from_configs(cls, optical: OpticalConfig, geometry: NetworkGeometry) -> "DerivedConstants":
        m = lambertian_order(optical.half_angle)
        k = (m + 1.0) * optical.pd_area * geometry.height ** (m + 1.0) / (2.0 * math.pi)
        return cls(m=m, beta=m + 3.0, gain_const=k, noise_var=optical.noise_psd * optical.bandwidth)


# Table of optics used by the shipped default configuration (see cli):
# 1 W LEDs, 1 cm^2 PD, 0.1 A/W, 60 degree half-angle (m = 1), thermal-noise
# PSD 4.14e-21 A^2/Hz over 40 MHz.
TABLE_DEFAULT_OPTICS = OpticalConfig(
    power=1.0,
    pd_area=1e-4,
    responsivity=0.1,
    half_angle=math.pi / 3,
    noise_psd=4.14e-21,
    bandwidth=40e6,
)


def channel_gain(consts: DerivedConstants, geometry: NetworkGeometry, d_horiz: float) -> float:
    """Line-of-sight channel gain K (d^2 + h^2)^(-beta/2) at horizontal
    distance ``d_horiz`` (m) from the LED axis; strictly decreasing in d."""
    d = float(d_horiz)
    if d < 0:
        raise ValueError(f"horizontal distance must be >= 0, got {d!r}")
    h = geometry.height
    return consts.gain_const * (d * d + h * h) ** (-0.5 * consts.beta)


@lru_cache(maxsize=8)
def _sites_cached(trunc: int):
    rng = np.arange(-trunc, trunc + 1)
    u, v = np.meshgrid(rng, rng, indexing="ij")
    u = u.ravel()
    v = v.ravel()
    keep = ~((u == 0) & (v == 0))
    sites = np.column_stack([u[keep], v[keep]]).astype(np.int64)
    sites.setflags(write=False)
    return sites

def lattice_sites(trunc: int) -> np.ndarray:
    """Interferer lattice indices (u, v), |u|,|v| <= trunc, origin excluded.

    Returns a read-only array of shape ((2 trunc + 1)^2 - 1, 2) in row-major
    order (u slow, v fast).  This ordering is the contract for every
    thinning realization: ``alphas[i]`` refers to ``lattice_sites(trunc)[i]``.
    """
    trunc = int(trunc)
    if trunc < 1:
        raise ValueError(f"trunc must be >= 1, got {trunc!r}")
    return _sites_cached(trunc)


def interferer_distance_sq(geometry: NetworkGeometry, pos, trunc: int | None = None) -> np.ndarray:
    """Squared horizontal PD-to-LED distances D_i^2 = (u a + z_x)^2 +
    (v a + z_y)^2 over the truncated lattice, in ``lattice_sites`` order."""
    zx, zy = position_xy(pos)
    t = geometry.trunc if trunc is None else int(trunc)
    sites = lattice_sites(t)
    a = geometry.pitch
    dx = sites[:, 0] * a + zx
    dy = sites[:, 1] * a + zy
    return dx * dx + dy * dy


def sinr(
    optical: OpticalConfig,
    geometry: NetworkGeometry,
    pos,
    alphas: np.ndarray,
    consts: DerivedConstants | None = None,
) -> float:
    """Electrical SINR at the PD for one thinning realization.

    ``alphas`` assigns 0/1 to every site of ``lattice_sites(geometry.trunc)``
    in that exact order.  The tagged LED at the origin always transmits; the
    realization only controls the interferers.
    """
    if consts is None:
        consts = DerivedConstants.from_configs(optical, geometry)
    alphas = np.asarray(alphas)
    n_sites = (2 * geometry.trunc + 1) ** 2 - 1
    if alphas.shape != (n_sites,):
        raise ValueError(
            f"alphas must have shape ({n_sites},) matching lattice_sites({geometry.trunc})"
        )
    zx, zy = position_xy(pos)
    h = geometry.height
    beta = consts.beta
    pr2 = (optical.power * optical.responsivity) ** 2
    k2 = consts.gain_const**2
    signal = pr2 * k2 * (zx * zx + zy * zy + h * h) ** (-beta)
    d2 = interferer_distance_sq(geometry, (zx, zy))
    interference = pr2 * k2 * float(np.dot(alphas.astype(float), (d2 + h * h) ** (-beta)))
    return signal / (interference + consts.noise_var)


def tail_bound(geometry: NetworkGeometry, exponent: float, trunc: int | None = None) -> float:
    """Upper bound on the lattice-sum mass outside the truncated window.

    Every omitted site lies at horizontal distance >= a (trunc - 1) from any
    receiver inside the attocell, so the omitted sum of (D^2 + h^2)^(-e) is
    bounded by the integral 2 pi r_max^(2-2e) / ((2e - 2) a^2) with
    r_max = a (trunc - 1) (one pitch of slack absorbs both the receiver
    offset and the cell-vs-site discretization).
    """
    e = float(exponent)
    if e <= 1.0:
        raise ValueError(f"tail bound requires exponent > 1, got {e!r}")
    t = geometry.trunc if trunc is None else int(trunc)
    a = geometry.pitch
    r_max = a * max(t - 1, 0.5)
    return 2.0 * math.pi * r_max ** (2.0 - 2.0 * e) / ((2.0 * e - 2.0) * a * a)
