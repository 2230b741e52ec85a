"""Brute-force and closed-form moment sums against each other."""

import math

import numpy as np
import pytest

from attocell import (
    NetworkGeometry,
    SumMethod,
    sm_brute,
    sm_series,
    sv_brute,
    sv_series,
)
from attocell.lattice_sums import series_mode_terms
from attocell.model import lattice_sites

# ring-ordered compensated sum at the reference config, pinned by the
# independent row-major summation below agreeing to 1e-13
SM_REFERENCE = 0.32872461712993456  # a=0.5, h=1.5, beta=4, z=(0,0), trunc=200
SV_CORNER_REFERENCE = 0.005158622238419826  # as above at z=(0.25, 0.25), exponent 8


def row_major_sum(geometry, exponent, pos, trunc):
    """Second, independent implementation: plain row-major numpy pairwise
    summation (different accumulation order than the library's ring Kahan)."""
    sites = lattice_sites(trunc)
    dx = sites[:, 0] * geometry.pitch + pos[0]
    dy = sites[:, 1] * geometry.pitch + pos[1]
    return float(np.sum((dx * dx + dy * dy + geometry.height**2) ** (-float(exponent))))


class TestBruteForce:
    def test_reference_value_dual_implementation(self, geometry):
        mine = sm_brute(geometry, 4.0, (0.0, 0.0))
        other = row_major_sum(geometry, 4.0, (0.0, 0.0), geometry.trunc)
        assert mine.value == pytest.approx(SM_REFERENCE, rel=1e-13)
        assert mine.value == pytest.approx(other, rel=1e-13)
        assert mine.method is SumMethod.BRUTE_FORCE
        assert mine.tail_bound > 0.0
        assert mine.terms_used is None

    def test_sv_corner_reference(self, geometry):
        mine = sv_brute(geometry, 4.0, (0.25, 0.25))
        other = row_major_sum(geometry, 8.0, (0.25, 0.25), geometry.trunc)
        assert mine.value == pytest.approx(SV_CORNER_REFERENCE, rel=1e-13)
        assert mine.value == pytest.approx(other, rel=1e-13)

    def test_sv_is_sm_at_doubled_exponent(self, geometry):
        assert sv_brute(geometry, 4.0, (0.1, 0.2)).value == sm_brute(
            geometry, 8.0, (0.1, 0.2)
        ).value

    def test_large_exponent_decay(self, geometry):
        s50 = sm_brute(geometry, 50.0, (0.0, 0.0)).value
        s4 = sm_brute(geometry, 4.0, (0.0, 0.0)).value
        assert s50 < 1e-15 * s4
        # the four nearest interferers at distance a dominate completely
        nearest = 4.0 * (geometry.pitch**2 + geometry.height**2) ** (-50.0)
        assert s50 == pytest.approx(nearest, rel=0.05)

    def test_reflection_and_swap_symmetry(self, geometry):
        base = sm_brute(geometry, 4.0, (0.13, 0.07)).value
        for pos in ((-0.13, 0.07), (0.13, -0.07), (0.07, 0.13), (-0.07, -0.13)):
            assert sm_brute(geometry, 4.0, pos).value == pytest.approx(base, rel=1e-13)

    def test_centre_below_corner(self, geometry):
        # the corner position sits next to three close interferers
        centre = sm_brute(geometry, 4.0, (0.0, 0.0)).value
        corner = sm_brute(geometry, 4.0, (0.25, 0.25)).value
        assert centre < corner

    def test_invalid_exponent(self, geometry):
        with pytest.raises(ValueError):
            sm_brute(geometry, 1.0, (0.0, 0.0))


class TestSeries:
    def test_default_modes(self, geometry):
        s = sm_series(geometry, 4.0, (0.0, 0.0))
        assert s.method is SumMethod.SERIES
        assert s.terms_used == 3
        assert s.tail_bound is None
        rows = series_mode_terms(geometry, 4.0, (0.0, 0.0))
        modes = [r["term"] for r in rows if r["term"].startswith("mode")]
        assert modes == ["mode(0,1)", "mode(1,0)", "mode(1,1)"]

    @pytest.mark.parametrize("height", [1.5, 2.0, 2.5, 3.0])
    @pytest.mark.parametrize("pos", [(0.0, 0.0), (0.25, 0.25), (0.13, -0.07)])
    def test_matches_brute_force(self, height, pos):
        geometry = NetworkGeometry(pitch=0.5, height=height, trunc=200)
        for make_brute, make_series in ((sm_brute, sm_series), (sv_brute, sv_series)):
            b = make_brute(geometry, 4.0, pos).value
            s = make_series(geometry, 4.0, pos).value
            assert s == pytest.approx(b, rel=1e-8)

    def test_uniform_mode_weights_show_systematic_error(self, geometry):
        # with every dual mode weighted as an interior mode the closed form
        # overshoots measurably; the halved axis weight is what matches
        b = sv_brute(geometry, 4.0, (0.0, 0.0)).value
        corrected = sv_series(geometry, 4.0, (0.0, 0.0)).value
        uniform = sv_series(geometry, 4.0, (0.0, 0.0), uniform_mode_weights=True).value
        assert abs(corrected - b) / b < 1e-8
        assert abs(uniform - b) / b > 1e-4
        assert uniform > corrected

    def test_sv_is_sm_at_doubled_exponent(self, geometry):
        assert sv_series(geometry, 4.0, (0.2, -0.1)).value == sm_series(
            geometry, 8.0, (0.2, -0.1)
        ).value

    def test_even_in_each_coordinate(self, geometry):
        base = sm_series(geometry, 4.0, (0.18, 0.04)).value
        assert sm_series(geometry, 4.0, (-0.18, 0.04)).value == pytest.approx(base, rel=1e-15)
        assert sm_series(geometry, 4.0, (0.18, -0.04)).value == pytest.approx(base, rel=1e-15)

    def test_cosine_part_is_periodic(self, geometry):
        # only the dual-mode part is lattice periodic (the self term is not)
        def mode_sum(pos):
            rows = series_mode_terms(geometry, 4.0, pos)
            return sum(r["contribution"] for r in rows if r["term"].startswith("mode"))

        a = geometry.pitch
        for pos in ((0.05, 0.11), (0.21, -0.17)):
            shifted = (pos[0] + a, pos[1])
            assert mode_sum(shifted) == pytest.approx(mode_sum(pos), rel=1e-9)
            shifted = (pos[0], pos[1] - a)
            assert mode_sum(shifted) == pytest.approx(mode_sum(pos), rel=1e-9)

    def test_positive_over_attocell_grid(self, geometry):
        half = geometry.pitch / 2
        grid = np.linspace(-half, half, 33)
        for zx in grid:
            for zy in grid:
                assert sv_series(geometry, 4.0, (zx, zy)).value > 0.0

    def test_bessel_terms_vanish_for_tall_mounting(self):
        # h/a large: only the integral and self terms survive
        geometry = NetworkGeometry(pitch=0.5, height=4.0, trunc=50)
        s = sm_series(geometry, 4.0, (0.1, 0.1)).value
        e = 4.0
        expected = (
            math.pi * geometry.height ** (2 - 2 * e) / (geometry.pitch**2 * (e - 1))
            - (0.02 + geometry.height**2) ** (-e)
        )
        assert s == pytest.approx(expected, rel=1e-12)

    def test_zero_modes_allowed_but_coarser(self, geometry):
        b = sm_brute(geometry, 4.0, (0.0, 0.0)).value
        bare = sm_series(geometry, 4.0, (0.0, 0.0), jl=(0, 0))
        full = sm_series(geometry, 4.0, (0.0, 0.0), jl=(1, 1))
        assert bare.terms_used == 0
        assert abs(bare.value - b) > abs(full.value - b)

    def test_larger_mode_window_stays_consistent(self, geometry):
        b = sm_brute(geometry, 4.0, (0.11, 0.23)).value
        s = sm_series(geometry, 4.0, (0.11, 0.23), jl=(3, 3)).value
        assert s == pytest.approx(b, rel=1e-8)

    def test_fractional_exponents(self, geometry):
        # Lambertian orders away from 1 give non-integer beta, so the
        # series runs through genuinely real-order Bessel evaluations
        beta = 4.12592166500788  # half angle 1 rad
        for pos in ((0.0, 0.0), (0.17, -0.08)):
            bm = sm_brute(geometry, beta, pos).value
            bv = sv_brute(geometry, beta, pos).value
            assert sm_series(geometry, beta, pos).value == pytest.approx(bm, rel=1e-8)
            assert sv_series(geometry, beta, pos).value == pytest.approx(bv, rel=1e-8)

    def test_narrow_beam_needs_wider_mode_window(self, geometry):
        # beta ~ 7.82 (half angle pi/6): the Bessel order 2 beta - 1 ~ 14.6
        # weakens the dual-mode decay, so the default three-mode window
        # carries a visible truncation error on S_v; widening it restores
        # full agreement with brute force
        beta = 7.81884167930642
        bv = sv_brute(geometry, beta, (0.0, 0.0)).value
        default = sv_series(geometry, beta, (0.0, 0.0)).value
        wide = sv_series(geometry, beta, (0.0, 0.0), jl=(2, 2)).value
        assert abs(default - bv) / bv < 1e-6
        assert abs(default - bv) / bv > 1e-8
        assert wide == pytest.approx(bv, rel=1e-11)

    def test_invalid_modes(self, geometry):
        with pytest.raises(ValueError):
            sm_series(geometry, 4.0, (0.0, 0.0), jl=(-1, 1))
