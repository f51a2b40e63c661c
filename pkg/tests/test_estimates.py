import numpy as np
import pytest

import radialwave as rw
from radialwave import estimates, registry


def grid(dr=1 / 32, t_max=8.0, r_max=12.0):
    return rw.GridSpec(dr=dr, cfl=1.0, r_max=r_max, t_max=t_max)


class TestIdentities:
    @pytest.mark.parametrize("family", ["traveling_sym", "standing_bump"])
    def test_plus_residual_refines_at_second_order(self, family):
        res = []
        for dr in (1 / 16, 1 / 32):
            w = registry.build(family, grid(dr=dr))
            res.append(estimates.check_identity_plus(w, 0.75, 1.0).relative_residual)
        assert res[1] <= 2e-3
        assert estimates.observed_order(res[0], res[1]) >= 1.8

    @pytest.mark.parametrize("family", ["traveling_sym", "standing_bump"])
    def test_minus_residual_refines_at_second_order(self, family):
        res = []
        for dr in (1 / 16, 1 / 32):
            w = registry.build(family, grid(dr=dr))
            res.append(estimates.check_identity_minus(w, 0.2).relative_residual)
        assert res[1] <= 2e-3
        assert estimates.observed_order(res[0], res[1]) >= 1.8

    def test_plus_sign_terms(self):
        w = registry.traveling_sym(grid())
        rep = estimates.check_identity_plus(w, 0.75, 2.0)
        assert rep.rhs_terms["p_flux"] >= 0
        assert rep.rhs_terms["ghost"] >= 0
        assert rep.rhs_terms["axis_line"] >= 0
        assert rep.rhs_terms["angular_flux"] == 0.0

    def test_minus_sign_terms(self):
        w = registry.standing_bump(grid())
        rep = estimates.check_identity_minus(w, 0.2)
        assert rep.rhs_terms["delta_flux"] >= 0
        assert rep.rhs_terms["axis_line"] <= 0

    def test_parameter_range(self):
        w = registry.standing_bump(grid(dr=1 / 8))
        with pytest.raises(ValueError):
            estimates.check_identity_plus(w, 2.5, 1.0)
        with pytest.raises(ValueError):
            estimates.check_identity_minus(w, -0.1)


class TestAlgebraicIdentities:
    def test_scaling_identity_exact(self):
        u = registry.standing_bump(grid(dr=1 / 16))
        assert estimates.scaling_identity_residual(u) <= 1e-12

    def test_box_decomposition_converges(self):
        res = [estimates.box_decomposition_residual(registry.standing_bump(grid(dr=dr)))
               for dr in (1 / 16, 1 / 32)]
        assert res[1] <= 1e-10  # centered product rule is exact in the interior

    def test_commutator_with_scaling(self):
        # Box(S u) - S(Box u) = 2 Box u up to truncation error [DERIVED]
        errs = []
        for dr in (1 / 16, 1 / 32):
            g = grid(dr=dr)
            u = registry.standing_bump(g)
            box = estimates.box_scalar(u)
            lhs = estimates.box_scalar(rw.derivative(u, "S")).values \
                - rw.derivative(box, "S").values
            rhs = 2 * box.values
            t, r = g.meshes()
            keep = (r >= 0.5) & (r <= g.r_max - 0.5) & (t >= 0.5) & (t <= g.t_max - 0.5)
            scale = np.max(np.abs(np.where(keep, rhs, 0)))
            errs.append(np.max(np.abs(np.where(keep, lhs - rhs, 0))) / scale)
        assert estimates.observed_order(errs[0], errs[1]) >= 1.8


class TestRatioChecks:
    @pytest.mark.parametrize("family", list(registry.ANALYTIC_FAMILIES))
    def test_ratios_finite(self, family):
        u = registry.build(family, rw.GridSpec(dr=1 / 16, cfl=1.0, r_max=20, t_max=16))
        for rep in (estimates.check_hardy(u, 0.75, family),
                    estimates.check_le(u, family),
                    estimates.check_mr(u, 0.75, family),
                    estimates.check_newle(u, 0.75, 0.2, family)):
            assert np.isfinite(rep.ratio)
            assert rep.rhs > 0

    def test_scale_invariance(self):
        g = rw.GridSpec(dr=1 / 16, cfl=1.0, r_max=20, t_max=16)
        u = registry.standing_bump(g)
        cu = rw.SpaceTimeField(g, 5.0 * u.values, "even")
        for fn in (lambda f: estimates.check_hardy(f, 0.75),
                   lambda f: estimates.check_mr(f, 0.75),
                   lambda f: estimates.check_newle(f, 0.75, 0.2)):
            np.testing.assert_allclose(fn(cu).ratio, fn(u).ratio, rtol=1e-10)

    def test_mr_reports_dyadic_detail(self):
        g = rw.GridSpec(dr=1 / 16, cfl=1.0, r_max=20, t_max=16)
        rep = estimates.check_mr(registry.expanding_bump(g), 0.75)
        detail = [k for k in rep.rhs_slots if k.startswith("detail")]
        assert any("R tau=4" in k for k in detail)
        assert any("core" in k for k in detail)

    def test_angular_slots_vanish(self):
        g = rw.GridSpec(dr=1 / 16, cfl=1.0, r_max=20, t_max=16)
        rep = estimates.check_mr(registry.standing_bump(g), 0.75)
        assert rep.lhs_slots["ang_linfl2"] == 0.0
        assert rep.rhs_slots["data_ang"] == 0.0


class TestPointwiseChecks:
    @staticmethod
    def field_and_grid(family, dr=1 / 16):
        g = rw.GridSpec(dr=dr, cfl=1.0, r_max=22, t_max=18)
        return registry.build(family, g), g

    @pytest.mark.parametrize("family,kind,scale", registry.KS_COMBOS)
    def test_spacetime_ks_finite(self, family, kind, scale):
        u, _ = self.field_and_grid(family)
        rep = estimates.check_spacetime_ks(u, 8, kind, scale)
        assert np.isfinite(rep.ratio) and rep.rhs > 0
        if kind == "R":
            assert "product_form" in rep.rhs_slots

    @pytest.mark.parametrize("family,kind,scale", registry.KS_COMBOS)
    def test_second_derivative_ks_finite(self, family, kind, scale):
        u, _ = self.field_and_grid(family)
        rep = estimates.check_second_derivative_ks(u, 8, kind, scale)
        assert np.isfinite(rep.ratio) and rep.rhs > 0
        assert np.isfinite(rep.rhs_slots["bad2_ratio"])
        assert not rep.flagged

    def test_noise_floor_flagged_for_vanishing_field(self):
        g = rw.GridSpec(dr=1 / 16, cfl=1.0, r_max=22, t_max=18)
        u = rw.SpaceTimeField.from_function(
            g, lambda t, r: 1.0 + 1e-14 * np.exp(-np.square(r - 4)) + 0 * t, "even")
        rep = estimates.check_second_derivative_ks(u, 8, "R", 2)
        # the constant background differences away, leaving derivative mass
        # at the rounding floor of the O(1) field
        assert rep.flagged

    def test_ks_scale_invariance(self):
        u, g = self.field_and_grid("cone_hugger")
        cu = rw.SpaceTimeField(g, 3.0 * u.values, "even")
        a = estimates.check_spacetime_ks(u, 8, "U", 1).ratio
        b = estimates.check_spacetime_ks(cu, 8, "U", 1).ratio
        np.testing.assert_allclose(a, b, rtol=1e-10)

    def test_bad_kind_rejected(self):
        u, _ = self.field_and_grid("standing_bump")
        with pytest.raises(ValueError):
            estimates.check_spacetime_ks(u, 8, "core", 1)


class TestWeightedSobolev:
    def test_ratio_finite_and_scale_invariant(self):
        r = np.arange(0, 16 + 1e-9, 1 / 32)
        h = np.exp(-np.square((r - 4) / 1.5))
        rep = estimates.check_weighted_sobolev(h, r, 4)
        assert np.isfinite(rep.ratio) and rep.lhs > 0
        rep2 = estimates.check_weighted_sobolev(2.5 * h, r, 4)
        np.testing.assert_allclose(rep2.ratio, rep.ratio, rtol=1e-12)

    def test_empty_annulus_rejected(self):
        r = np.arange(0, 2 + 1e-9, 1 / 16)
        with pytest.raises(ValueError):
            estimates.check_weighted_sobolev(np.exp(-r), r, 16)


def test_registry_unknown_family():
    g = grid(dr=1 / 8)
    with pytest.raises(KeyError):
        registry.build("no_such_family", g)
