import numpy as np
import pytest
from hypothesis import given, strategies as st

import radialwave as rw
from radialwave import regions
from radialwave.regions import (
    DyadicRegion, beta, bracket, chi, dyadic_scales, enumerate_regions,
    realize_mask, sigma_U, sigma_U_prime, slab_mask,
)


def grid(dr=0.125, t_max=16.0):
    return rw.GridSpec(dr=dr, cfl=1.0, r_max=t_max + 4, t_max=t_max)


class TestCutoffs:
    def test_chi_endpoints(self):
        assert chi(7 / 8) == 0.0
        assert chi(1.0) == 1.0
        assert chi(0.0) == 0.0
        assert chi(5.0) == 1.0

    def test_beta_plateau_and_support(self):
        z = np.linspace(1.0, 2.0, 33)
        np.testing.assert_array_equal(beta(z), np.ones_like(z))
        assert beta(7 / 8 - 1e-9) == 0.0
        assert beta(17 / 8 + 1e-9) == 0.0

    def test_beta_c2_seam(self):
        # second difference stays bounded through the transition [TRIVIAL]
        h = 1e-4
        z = np.arange(0.85, 1.05, h)
        second = np.diff(beta(z), 2) / h ** 2
        # successive second differences move by ~|beta'''| * h; a C^1-only seam
        # would produce a jump comparable to max|second| itself
        assert np.max(np.abs(np.diff(second))) < 1e5 * h

    @given(st.floats(-50, 50), st.sampled_from([1.0, 2.0, 8.0]))
    def test_sigma_bounded_and_odd(self, z, U):
        s = float(sigma_U(z, U))
        assert abs(s) < 1.0
        np.testing.assert_allclose(sigma_U(-z, U), -s, atol=1e-15)

    @given(st.floats(-50, 50, allow_nan=False), st.sampled_from([1.0, 4.0]))
    def test_sigma_prime_is_derivative(self, z, U):
        h = 1e-6
        num = (sigma_U(z + h, U) - sigma_U(z - h, U)) / (2 * h)
        np.testing.assert_allclose(num, sigma_U_prime(z, U), rtol=1e-4, atol=1e-8)

    def test_sigma_rejects_small_U(self):
        with pytest.raises(ValueError):
            sigma_U(0.0, 0.5)


class TestDyadicRegion:
    def test_scale_cap(self):
        with pytest.raises(ValueError):
            DyadicRegion(8, "R", 4)  # 4 > 8/4

    def test_non_dyadic_rejected(self):
        with pytest.raises(ValueError):
            DyadicRegion(12, "R", 1)
        with pytest.raises(ValueError):
            DyadicRegion(8, "R", 3)

    def test_descriptor_roundtrip(self):
        reg = DyadicRegion(16, "U", 2)
        d = reg.descriptor()
        assert d == {"tau": 16, "kind": "U", "scale": 2, "enlargement": 0}
        assert DyadicRegion(**d) == reg

    def test_enumerate_order(self):
        regs = enumerate_regions(16, grid(t_max=32.0))
        kinds = [(r.kind, r.scale) for r in regs]
        assert kinds == [("R", 1), ("R", 2), ("R", 4),
                         ("U", 1), ("U", 2), ("U", 4), ("core", None)]

    def test_enumerate_rejects_small_tau(self):
        with pytest.raises(ValueError):
            enumerate_regions(2, grid())

    def test_enumerate_rejects_slab_beyond_horizon(self):
        with pytest.raises(ValueError):
            enumerate_regions(16, grid(t_max=16.0))


class TestMasks:
    def test_covering_is_grid_exact(self):
        g = grid(dr=0.25, t_max=32.0)
        for tau in (4, 8, 16):
            union = np.zeros(g.shape())
            for reg in enumerate_regions(tau, g):
                union = np.maximum(union, realize_mask(reg, g).weights)
            np.testing.assert_array_equal(union, slab_mask(tau, g))

    def test_tilde_contains_plain(self):
        g = grid(dr=0.25)
        for reg in enumerate_regions(4, g):
            plain = realize_mask(reg, g).weights
            tilde = realize_mask(reg.enlarged(1), g).weights
            assert np.all(tilde >= plain)

    def test_tilde_endpoints(self):
        # R-kind [2, 4] widens to [7/4, 17/4] [TRIVIAL]
        g = grid(dr=0.25, t_max=32.0)
        reg = DyadicRegion(16, "R", 2, enlargement=1)
        w = realize_mask(reg, g).weights
        t, r = g.meshes()
        inside = w > 0
        rs = np.broadcast_to(r, g.shape())[inside]
        assert rs.min() == 7 / 4
        assert rs.max() == 17 / 4

    def test_complement_additivity(self):
        g = grid(dr=0.25)
        m = realize_mask(DyadicRegion(4, "R", 1), g).weights
        f = rw.SpaceTimeField.from_function(g, lambda t, r: np.cos(t) * np.exp(-r))
        full = rw.region_l2l2(f, rw.WeightSpec(), np.ones(g.shape()))
        a = rw.region_l2l2(f, rw.WeightSpec(), m)
        b = rw.region_l2l2(f, rw.WeightSpec(), 1.0 - m)
        assert abs(full ** 2 - a ** 2 - b ** 2) <= 1e-10 * full ** 2

    def test_smooth_mask_profile(self):
        g = grid(dr=0.125, t_max=32.0)
        reg = DyadicRegion(16, "R", 2, enlargement=1)
        sharp = realize_mask(reg, g).weights
        smooth = realize_mask(reg, g, smooth=True).weights
        assert np.all((smooth >= 0) & (smooth <= 1))
        # smooth profile is supported inside the sharp tilde region
        assert np.all(smooth[sharp == 0] < 1e-12)

    def test_cone_intersection(self):
        g = grid(dr=0.25)
        w = realize_mask(DyadicRegion(4, "R", 1), g).weights
        t, r = g.meshes()
        assert not np.any(w * (r > t + 2 + 1e-9))

    def test_strip_mask_uses_cone_distance_bracket(self):
        g = grid(dr=0.25)
        w = realize_mask(DyadicRegion(None, "strip", 2), g).weights
        t, r = g.meshes()
        br = bracket(t - r)
        assert np.all(w[(br < 2) | (br > 4)] == 0)
        sel = (br >= 2) & (br <= 4)
        assert np.all(w[sel] == 1)


def test_dyadic_scales():
    assert dyadic_scales(8) == [1, 2, 4, 8]
    assert dyadic_scales(7) == [1, 2, 4]
    assert dyadic_scales(0.5) == []
    assert dyadic_scales(16, start=4) == [4, 8, 16]
