"""Numerical verification of the multiplier identities and weighted estimates.

Exact identities are checked to discretization order (residuals shrinking at
second order under refinement); inequalities are checked as LHS/RHS ratios
that must be finite, scale-invariant, and stable under refinement over a fixed
family of test fields.  No claim about optimal constants is ever made.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import (
    BAD, DR, DT, GOOD, SCALING, GridSpec, SpaceTimeField, apply_word,
    box_conjugate, derivative, quotient_by_r, z_words,
)
from .norms import (
    FOUR_PI, MixedNormSpec, WeightSpec, le1_norm, mixed_norm, region_l2l2,
    region_supsup, spatial_l2, _trapz_weights,
)
from .regions import (
    CORE, R_KIND, STRIP, U_KIND, DyadicRegion, bracket, dyadic_scales,
    realize_mask, sigma_U, sigma_U_prime,
)

_TINY = 1e-300


@dataclass
class IdentityReport:
    name: str
    lhs: float
    rhs: float
    grid: GridSpec
    rhs_terms: dict = dc_field(default_factory=dict)
    observed_order: float | None = None

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative_residual(self) -> float:
        scale = max(abs(self.lhs), sum(abs(v) for v in self.rhs_terms.values()), _TINY)
        return self.residual / scale


@dataclass
class EstimateReport:
    name: str
    lhs: float
    rhs: float
    family_id: str = ""
    lhs_slots: dict = dc_field(default_factory=dict)
    rhs_slots: dict = dc_field(default_factory=dict)
    refinement_drift: float | None = None
    flagged: bool = False

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else float("inf")
        return self.lhs / self.rhs


def _quad2d(grid: GridSpec, integrand: np.ndarray) -> float:
    wt = _trapz_weights(grid.nt, grid.dt)
    wr = _trapz_weights(grid.nr, grid.dr)
    return float(wt @ integrand @ wr)


def _quad_r(grid: GridSpec, integrand: np.ndarray) -> float:
    wr = _trapz_weights(grid.nr, grid.dr)
    return float(integrand @ wr)


def _quad_t(grid: GridSpec, integrand: np.ndarray) -> float:
    wt = _trapz_weights(grid.nt, grid.dt)
    return float(integrand @ wt)


def _conjugate(w: SpaceTimeField) -> SpaceTimeField:
    r = w.grid.r[None, :]
    return SpaceTimeField(w.grid, r * w.values, "odd")


def check_identity_plus(w: SpaceTimeField, p: float, U: float) -> IdentityReport:
    """Space-time multiplier identity for (1+r)^p e^{-sigma_U(t-r)} (dt+dr+1/r).

    LHS pairs the wave operator with the outgoing weighted multiplier; the RHS
    collects the t-boundary flux, the r = 0 line term, the p-weighted bulk
    flux, and the ghost bulk term.  Angular contributions vanish identically
    on radial data and are reported as exact zeros.
    """
    if not (0 < p < 2):
        raise ValueError(f"p must lie in (0, 2), got {p}")
    grid = w.grid
    t, r = grid.meshes()
    W = _conjugate(w)
    G = derivative(W, GOOD).values
    box2 = box_conjugate(W).values
    z = t - r
    decay = np.exp(-sigma_U(z, U))
    wp = np.power(1.0 + r, p)

    lhs = FOUR_PI * _quad2d(grid, wp * decay * box2 * G)

    g2 = np.square(G)
    boundary = 0.5 * FOUR_PI * (_quad_r(grid, (wp * decay * g2)[-1])
                                - _quad_r(grid, (wp * decay * g2)[0]))
    outer = -0.5 * FOUR_PI * _quad_t(grid, (wp * decay * g2)[:, -1])
    axis = 0.5 * FOUR_PI * _quad_t(
        grid, np.exp(-sigma_U(grid.t, U)) * np.square(w.values[:, 0]))
    p_flux = (p / 2) * FOUR_PI * _quad2d(grid, np.power(1.0 + r, p - 1) * decay * g2)
    ghost = FOUR_PI * _quad2d(grid, wp * sigma_U_prime(z, U) * decay * g2)
    terms = {
        "boundary_t": boundary, "boundary_outer": outer, "axis_line": axis,
        "p_flux": p_flux, "ghost": ghost, "angular_flux": 0.0, "angular_bulk": 0.0,
    }
    return IdentityReport("identity_plus", lhs, sum(terms.values()), grid, terms)


def check_identity_minus(w: SpaceTimeField, delta: float) -> IdentityReport:
    """Multiplier identity for the incoming branch (1+r)^{-delta} (dt-dr-1/r).

    The r = 0 line term enters with a negative sign and the delta-weighted
    bulk flux is nonnegative; angular terms vanish on radial data.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    grid = w.grid
    _, r = grid.meshes()
    W = _conjugate(w)
    H = derivative(W, BAD).values
    box2 = box_conjugate(W).values
    wd = np.power(1.0 + r, -delta)

    lhs = FOUR_PI * _quad2d(grid, wd * box2 * H)
    h2 = np.square(H)
    boundary = 0.5 * FOUR_PI * (_quad_r(grid, (wd * h2)[-1]) - _quad_r(grid, (wd * h2)[0]))
    outer = 0.5 * FOUR_PI * _quad_t(grid, (wd * h2)[:, -1])
    axis = -0.5 * FOUR_PI * _quad_t(grid, np.square(w.values[:, 0]))
    d_flux = (delta / 2) * FOUR_PI * _quad2d(grid, np.power(1.0 + r, -1 - delta) * h2)
    terms = {"boundary_t": boundary, "boundary_outer": outer, "axis_line": axis,
             "delta_flux": d_flux, "angular_bulk": 0.0}
    return IdentityReport("identity_minus", lhs, sum(terms.values()), grid, terms)


def good_of_conjugate_over_r(w: SpaceTimeField) -> SpaceTimeField:
    """r^{-1}(dt+dr)(r w) = (dt + dr + 1/r) w."""
    return quotient_by_r(derivative(_conjugate(w), GOOD))


def box_scalar(w: SpaceTimeField) -> SpaceTimeField:
    """Radial d'Alembertian via the conjugate identity, any parity."""
    from .grid import _diff2  # second-order stencils shared with box_conjugate
    grid = w.grid
    par = {"even": "odd", "odd": "even", None: None}[w.parity]
    W = grid.r[None, :] * w.values
    vals = _diff2(W, grid.dt, axis=0) - _diff2(W, grid.dr, axis=1, parity=par)
    return quotient_by_r(SpaceTimeField(grid, vals, par))


def check_hardy(u: SpaceTimeField, p: float, family_id: str = "") -> EstimateReport:
    """Space-time Hardy variant: interior weighted mass controlled by the data
    and the good derivative of the conjugate variable."""
    if not (0 < p < 2):
        raise ValueError(f"p must lie in (0, 2), got {p}")
    a = (p - 1) / 2
    lhs_slots = {
        "invr_l2l2": mixed_norm(u, MixedNormSpec("L2", "L2", WeightSpec(a, 1.0))),
        "invhalf_linfl2": mixed_norm(u, MixedNormSpec("Linf", "L2", WeightSpec(a, 0.5))),
    }
    good = good_of_conjugate_over_r(u)
    rhs_slots = {
        "data": float(spatial_l2(u, WeightSpec(a, 0.5))[0]),
        "good_l2l2": mixed_norm(good, MixedNormSpec("L2", "L2", WeightSpec(a, 0.0))),
    }
    return EstimateReport("hardy", sum(lhs_slots.values()), sum(rhs_slots.values()),
                          family_id, lhs_slots, rhs_slots)


def _du_magnitude(u: SpaceTimeField) -> SpaceTimeField:
    dt_u = derivative(u, DT).values
    dr_u = derivative(u, DR).values
    return SpaceTimeField(u.grid, np.sqrt(np.square(dt_u) + np.square(dr_u)))


def check_le(u: SpaceTimeField, family_id: str = "") -> EstimateReport:
    """Integrated local energy estimate, squared form."""
    grid = u.grid
    du = _du_magnitude(u)
    lhs_slots = {
        "le1_sq": le1_norm(u) ** 2,
        "du_linfl2_sq": mixed_norm(du, MixedNormSpec("Linf", "L2")) ** 2,
    }
    box = box_scalar(u).values
    uq = quotient_by_r(u).values
    _, r = grid.meshes()
    forcing = FOUR_PI * _quad2d(grid, np.abs(box) * (du.values + np.abs(uq)) * np.square(r))
    rhs_slots = {
        "data_sq": float(spatial_l2(du, WeightSpec())[0]) ** 2,
        "forcing": forcing,
    }
    return EstimateReport("le", sum(lhs_slots.values()), sum(rhs_slots.values()),
                          family_id, lhs_slots, rhs_slots)


def _dyadic_forcing_sums(box: SpaceTimeField, p: float) -> tuple[float, float, dict]:
    """The two dyadic forcing stacks: the ell^2-in-(tau, R) sum with the core
    attached to the R row, and the U-row sum over tau >= 4U."""
    grid = box.grid
    detail = {}
    sq_r = 0.0
    tau_values = dyadic_scales(grid.t_max / 2, start=4)
    for tau in tau_values:
        for s in dyadic_scales(tau // 4):
            m = realize_mask(DyadicRegion(tau, R_KIND, s), grid).weights
            val = region_l2l2(box, WeightSpec((p + 1) / 2), m)
            detail[f"R tau={tau} R={s}"] = val
            sq_r += val * val
        m = realize_mask(DyadicRegion(tau, CORE), grid).weights
        val = region_l2l2(box, WeightSpec((p + 1) / 2), m)
        detail[f"R tau={tau} core"] = val
        sq_r += val * val
    f_r = float(np.sqrt(sq_r))

    f_u = 0.0
    max_u = max(tau_values) // 4 if tau_values else 0
    for U in dyadic_scales(max_u) if max_u >= 1 else []:
        sq = 0.0
        for tau in tau_values:
            if tau >= 4 * U:
                m = realize_mask(DyadicRegion(tau, U_KIND, U), grid).weights
                val = region_l2l2(box, WeightSpec(p / 2), m)
                detail[f"U tau={tau} U={U}"] = val
                sq += U * val * val
        f_u += float(np.sqrt(sq))
    return f_r, f_u, detail


def _sup_U_slot(u: SpaceTimeField, p: float) -> float:
    """sup_U U^{-1/2} || <r>^{p/2} r^{-1}(dt+dr)(r u) ||_{L2L2(X_U)}."""
    good = good_of_conjugate_over_r(u)
    best = 0.0
    for U in dyadic_scales(bracket(max(u.grid.t_max, u.grid.r_max))):
        m = realize_mask(DyadicRegion(None, STRIP, U), u.grid).weights
        best = max(best, U ** -0.5 * region_l2l2(good, WeightSpec(p / 2), m))
    return best


def check_mr(u: SpaceTimeField, p: float, family_id: str = "") -> EstimateReport:
    """The combined r^p / ghost-weight estimate (radial form; angular slots
    vanish identically and are recorded as zeros)."""
    if not (0 < p < 2):
        raise ValueError(f"p must lie in (0, 2), got {p}")
    good_u = derivative(u, GOOD)
    a = (p - 1) / 2
    lhs_slots = {
        "good_linfl2": mixed_norm(good_u, MixedNormSpec("Linf", "L2", WeightSpec(p))),
        "ang_linfl2": 0.0,
        "invhalf_linfl2": mixed_norm(u, MixedNormSpec("Linf", "L2", WeightSpec(a, 0.5))),
        "good_l2l2": mixed_norm(good_u, MixedNormSpec("L2", "L2", WeightSpec(a))),
        "ang_l2l2": 0.0,
        "invr_l2l2": mixed_norm(u, MixedNormSpec("L2", "L2", WeightSpec(a, 1.0))),
        "ghost_supU": _sup_U_slot(u, p),
    }
    box = box_scalar(u)
    f_r, f_u, detail = _dyadic_forcing_sums(box, p)
    rhs_slots = {
        "data_invhalf": float(spatial_l2(u, WeightSpec(a, 0.5))[0]),
        "data_good": float(spatial_l2(good_u, WeightSpec(p / 2))[0]),
        "data_ang": 0.0,
        "forcing_R": f_r,
        "forcing_U": f_u,
    }
    rep = EstimateReport("mr", sum(lhs_slots.values()), sum(rhs_slots.values()),
                         family_id, lhs_slots, rhs_slots)
    rep.rhs_slots.update({f"detail {k}": v for k, v in detail.items()})
    return rep


def check_newle(u: SpaceTimeField, p: float, delta: float,
                family_id: str = "") -> EstimateReport:
    """Refined local energy estimate with the modified incoming multiplier:
    faster-decaying weight on (dt-dr)u, faster-decaying weight on the forcing."""
    if not (0 < p < 2):
        raise ValueError(f"p must lie in (0, 2), got {p}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    good_u = derivative(u, GOOD)
    bad_u = derivative(u, BAD)
    a = (p - 1) / 2
    lhs_slots = {
        "bad_linfl2": mixed_norm(bad_u, MixedNormSpec("Linf", "L2", WeightSpec(-delta / 2))),
        "good_linfl2": mixed_norm(good_u, MixedNormSpec("Linf", "L2", WeightSpec(p / 2))),
        "ang_linfl2": 0.0,
        "invhalf_linfl2": mixed_norm(u, MixedNormSpec("Linf", "L2", WeightSpec(a, 0.5))),
        "bad_l2l2": mixed_norm(bad_u, MixedNormSpec("L2", "L2", WeightSpec(-(1 + delta) / 2))),
        "good_l2l2": mixed_norm(good_u, MixedNormSpec("L2", "L2", WeightSpec(a))),
        "ang_l2l2": 0.0,
        "invr_l2l2": mixed_norm(u, MixedNormSpec("L2", "L2", WeightSpec(a, 1.0))),
        "ghost_supU": _sup_U_slot(u, p),
    }
    box = box_scalar(u)
    f_r, f_u, _ = _dyadic_forcing_sums(box, p)
    rhs_slots = {
        "data_bad": float(spatial_l2(bad_u, WeightSpec(-delta / 2))[0]),
        "data_good": float(spatial_l2(good_u, WeightSpec(p / 2))[0]),
        "data_ang": 0.0,
        "data_invr": float(spatial_l2(u, WeightSpec(p / 2, 1.0))[0]),
        "forcing_weighted": mixed_norm(box, MixedNormSpec("L2", "L2",
                                                          WeightSpec((1 - delta) / 2))),
        "forcing_R": f_r,
        "forcing_U": f_u,
    }
    return EstimateReport("newle", sum(lhs_slots.values()), sum(rhs_slots.values()),
                          family_id, lhs_slots, rhs_slots)


# ----------------------------------------------------------------------
# Sobolev-type estimates
# ----------------------------------------------------------------------

def _radial_words(values: np.ndarray, r: np.ndarray, dr: float, order: int) -> list[np.ndarray]:
    """All compositions of {dr, r*dr} up to the given length on a radial frame
    (even parity assumed for the base frame)."""
    def d(vals, parity):
        out = np.empty_like(vals)
        out[1:-1] = (vals[2:] - vals[:-2]) / (2 * dr)
        out[0] = vals[1] / dr if parity == "odd" else 0.0
        out[-1] = (3 * vals[-1] - 4 * vals[-2] + vals[-3]) / (2 * dr)
        return out

    layers = [[(values, "even")]]
    for _ in range(order):
        nxt = []
        for vals, par in layers[-1]:
            dv = d(vals, par)
            flip = "odd" if par == "even" else "even"
            nxt.append((dv, flip))          # dr
            nxt.append((r * dv, par))       # scaling r*dr
        layers.append(nxt)
    return [vals for layer in layers for vals, _ in layer]


def check_weighted_sobolev(h: np.ndarray, r: np.ndarray, R: int,
                           family_id: str = "") -> EstimateReport:
    """Pointwise bound on a dyadic annulus by R^{-1}-weighted derivative mass
    on its enlargement (radial vector-field set)."""
    dr = float(r[1] - r[0])
    br = bracket(r)
    plain = (br >= R) & (br <= 2 * R)
    tilde = (br >= 7 / 8 * R) & (br <= 17 / 8 * R)
    if not np.any(plain):
        raise ValueError(f"annulus R={R} does not meet the grid")
    lhs = float(np.max(np.abs(h)[plain]))
    agg = np.zeros_like(h)
    for vals in _radial_words(h, r, dr, 2):
        agg += np.abs(vals)
    w = np.full(r.size, dr)
    w[0] = w[-1] = dr / 2
    mass = float(np.sqrt(FOUR_PI * np.sum(np.square(agg) * np.square(r) * w * tilde)))
    return EstimateReport("weighted_sobolev", lhs, mass / R, family_id,
                          {"sup": lhs}, {"mass": mass, "scale": float(R)})


def _z_aggregate(w: SpaceTimeField, N: int, with_prefix: str | None = None):
    """sum over |mu| <= N of |P Z^mu w| with P = identity, 'dr', or 'd'
    (|dt| + |dr|), computed layer by layer."""
    agg = np.zeros(w.grid.shape())
    prev = {(): w}
    for length in range(0, N + 1):
        if length > 0:
            cur = {}
            for word in (x for x in z_words(N) if len(x) == length):
                cur[word] = derivative(prev[word[1:]], word[0])
            prev = cur
        for g in prev.values():
            if with_prefix is None:
                agg += np.abs(g.values)
            elif with_prefix == "dr":
                agg += np.abs(derivative(g, DR).values)
            elif with_prefix == "d":
                agg += np.abs(derivative(g, DT).values) + np.abs(derivative(g, DR).values)
            elif with_prefix == "box":
                agg += np.abs(box_scalar(g).values)
            elif with_prefix == "dtdr2":
                from .grid import _diff2
                agg += np.abs(_diff2(g.values, w.grid.dt, axis=0)
                              - _diff2(g.values, w.grid.dr, axis=1, parity=g.parity))
            elif with_prefix == "bad2":
                agg += np.abs(apply_word(g, (BAD, BAD)).values)
            elif with_prefix == "good2":
                agg += np.abs(apply_word(g, (GOOD, GOOD)).values)
            else:
                raise ValueError(with_prefix)
    return agg


def check_spacetime_ks(w: SpaceTimeField, tau: int, region_kind: str, scale: int,
                       family_id: str = "") -> EstimateReport:
    """Space-time pointwise decay estimate on one dyadic slab piece.

    Also evaluates the intermediate product form (geometric mean of the two
    derivative masses) as a separate slot.
    """
    grid = w.grid
    region = DyadicRegion(tau, region_kind, scale)
    plain = realize_mask(region, grid).weights
    tilde = realize_mask(region.enlarged(1), grid).weights
    lhs = region_supsup(w.values, plain)
    agg = SpaceTimeField(grid, _z_aggregate(w, 2))
    agg_dr = SpaceTimeField(grid, _z_aggregate(w, 2, "dr"))
    m0 = region_l2l2(agg, WeightSpec(), tilde)
    m1 = region_l2l2(agg_dr, WeightSpec(), tilde)
    if region_kind == R_KIND:
        rhs = tau ** -0.5 * scale ** -1.5 * m0 + tau ** -0.5 * scale ** -0.5 * m1
        product_form = tau ** -0.5 * scale ** -1.5 * m0 + tau ** -0.5 / scale * np.sqrt(m0 * m1)
    elif region_kind == U_KIND:
        rhs = tau ** -1.5 * scale ** -0.5 * m0 + scale ** 0.5 * tau ** -1.5 * m1
        product_form = None
    else:
        raise ValueError("region_kind must be R or U")
    rep = EstimateReport("spacetime_ks", lhs, rhs, family_id,
                         {"supsup": lhs},
                         {"mass": m0, "mass_dr": m1, "tau": float(tau),
                          "scale": float(scale), "kind": region_kind})
    if product_form is not None:
        rep.rhs_slots["product_form"] = float(product_form)
    return rep


def scaling_identity_residual(w: SpaceTimeField) -> float:
    """Max residual of 2 S w = (t+r)(dt+dr)w + (t-r)(dt-dr)w on the grid;
    exact (to rounding) since both sides reduce to the same stencils."""
    t, r = w.grid.meshes()
    lhs = 2 * derivative(w, SCALING).values
    rhs = (t + r) * derivative(w, GOOD).values + (t - r) * derivative(w, BAD).values
    scale = max(float(np.max(np.abs(lhs))), _TINY)
    return float(np.max(np.abs(lhs - rhs))) / scale


def box_decomposition_residual(w: SpaceTimeField, r_min: float = 1.0) -> float:
    """Residual of (dt^2 - dr^2)w = Box w + (2/r) dr w away from the axis.

    Measured on interior points only: the centered product rule
    D^2(r w) = r D^2 w + 2 D w is exact there, while the one-sided boundary
    stencils satisfy it only to truncation order.
    """
    from .grid import _diff2
    grid = w.grid
    t, r = grid.meshes()
    d2 = _diff2(w.values, grid.dt, axis=0) - _diff2(w.values, grid.dr, axis=1, parity=w.parity)
    box = box_scalar(w).values
    dr_w = derivative(w, DR).values
    keep = (r >= r_min) & (r <= grid.r_max - grid.dr) & \
        (t >= grid.dt) & (t <= grid.t_max - grid.dt)
    with np.errstate(divide="ignore", invalid="ignore"):
        grad = 2 * dr_w / np.where(keep, r, 1.0)
        res = np.where(keep, d2 - box - grad, 0.0)
        mag = np.abs(d2) + np.abs(box) + np.abs(grad)
    scale = max(float(np.max(np.where(keep, mag, 0.0))), _TINY)
    return float(np.max(np.abs(res))) / scale


def check_second_derivative_ks(w: SpaceTimeField, tau: int, region_kind: str,
                               scale: int, family_id: str = "") -> EstimateReport:
    """Second-derivative pointwise decay with the wave operator substituted in.

    Needs three vector-field orders plus one derivative; a noise-floor guard
    flags the report when both sides sit at the differencing floor.
    """
    grid = w.grid
    region = DyadicRegion(tau, region_kind, scale)
    plain = realize_mask(region, grid).weights
    tilde = realize_mask(region.enlarged(1), grid).weights
    du = np.abs(derivative(w, DT).values) + np.abs(derivative(w, DR).values)
    lhs = region_supsup(du, plain)

    d_agg3 = SpaceTimeField(grid, _z_aggregate(w, 3, "d"))
    box_agg2 = SpaceTimeField(grid, _z_aggregate(w, 2, "box"))
    m_d = region_l2l2(d_agg3, WeightSpec(), tilde)
    m_box = region_l2l2(box_agg2, WeightSpec(), tilde)
    if region_kind == R_KIND:
        rhs = tau ** -0.5 * scale ** -1.5 * m_d + tau ** -0.5 * scale ** -0.5 * m_box
    elif region_kind == U_KIND:
        rhs = scale ** -0.5 * tau ** -1.5 * m_d + scale ** -0.5 * tau ** -0.5 * m_box
    else:
        raise ValueError("region_kind must be R or U")

    # split-direction diagnostics: second bad/good derivatives against the
    # derivative mass and the plain second-order wave combination
    m_dtdr2 = region_l2l2(SpaceTimeField(grid, _z_aggregate(w, 2, "dtdr2")),
                          WeightSpec(), tilde)
    m_bad2 = region_l2l2(SpaceTimeField(grid, _z_aggregate(w, 2, "bad2")),
                         WeightSpec(), tilde)
    m_good2 = region_l2l2(SpaceTimeField(grid, _z_aggregate(w, 2, "good2")),
                          WeightSpec(), tilde)
    if region_kind == R_KIND:
        bad2_rhs = m_d / scale + m_dtdr2
        good2_rhs = m_d / scale + m_dtdr2
    else:
        bad2_rhs = m_d / scale + (tau / scale) * m_dtdr2
        good2_rhs = m_d / tau + m_dtdr2

    noise = np.finfo(float).eps * float(np.max(np.abs(w.values))) / grid.dr ** 4
    flagged = m_d < 1e3 * noise
    rep = EstimateReport("second_derivative_ks", lhs, rhs, family_id,
                         {"supsup_du": lhs},
                         {"mass_d3": m_d, "mass_box2": m_box,
                          "tau": float(tau), "scale": float(scale), "kind": region_kind},
                         flagged=flagged)
    rep.rhs_slots["bad2_ratio"] = float(m_bad2 / bad2_rhs) if bad2_rhs > 0 else 0.0
    rep.rhs_slots["good2_ratio"] = float(m_good2 / good2_rhs) if good2_rhs > 0 else 0.0
    return rep


def observed_order(coarse: float, fine: float) -> float:
    """log2 ratio of residuals under dr -> dr/2."""
    if fine <= 0:
        return float("inf")
    return float(np.log2(coarse / fine))
