"""Weighted mixed space-time norms by trapezoidal quadrature.

All spatial integrals use the radial measure dx = 4*pi*r^2 dr.  Global-in-time
norms are truncated to the grid horizon [0, t_max]; every breakdown records the
truncation so boundedness can be judged against plateau-vs-horizon curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import (
    DT, DR, GOOD, SpaceTimeField, derivative, quotient_by_r, z_words,
)
from .regions import (
    ANNULUS, CORE, R_KIND, U_KIND, DyadicRegion, RegionMask, bracket,
    dyadic_scales, realize_mask,
)

FOUR_PI = 4.0 * np.pi


class NormSpecError(ValueError):
    pass


@dataclass(frozen=True)
class WeightSpec:
    """Pointwise weight <r>^power_r * r^(-power_inv_r), optionally with the
    ghost factor exp(-sigma_U(t - r))."""

    power_r: float = 0.0
    power_inv_r: float = 0.0
    ghost_U: float | None = None

    def __post_init__(self):
        if self.power_inv_r not in (0.0, 0.5, 1.0):
            raise NormSpecError(f"power_inv_r must be 0, 1/2, or 1; got {self.power_inv_r}")


@dataclass(frozen=True)
class MixedNormSpec:
    outer: str = "L2"  # over t: "L2" | "Linf"
    inner: str = "L2"  # over x: "L2" | "Linf"
    weight: WeightSpec = WeightSpec()
    region: DyadicRegion | None = None

    def __post_init__(self):
        if self.outer not in ("L2", "Linf") or self.inner not in ("L2", "Linf"):
            raise NormSpecError("outer/inner must be 'L2' or 'Linf'")
        if self.inner == "Linf" and self.weight.power_inv_r != 0:
            raise NormSpecError("sup-in-x norms carry no inverse-r weight here")


@dataclass
class NormBreakdown:
    """Total plus per-summand values; ``aggregation`` names the reduction rule."""

    total: float
    slots: dict = dc_field(default_factory=dict)
    per_region: dict = dc_field(default_factory=dict)
    truncation_T: float = 0.0
    aggregation: str = "sum"


def _trapz_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def _ghost_factor(grid, U):
    if U is None:
        return 1.0
    t, r = grid.meshes()
    z = t - r
    return np.exp(-z / (U + np.abs(z)))


def spatial_l2(f: SpaceTimeField, weight: WeightSpec = WeightSpec(),
               mask: np.ndarray | None = None) -> np.ndarray:
    """||w f(t, .)||_{L^2(dx)} for every time level.

    The inverse-r power is folded into the measure (integrand r^{2-2b} |f|^2)
    so the axis point never divides by zero.
    """
    grid = f.grid
    r = grid.r
    wr = _trapz_weights(grid.nr, grid.dr)
    # exponent 2 - 2b is in {0, 1, 2}, so r = 0 is regular (0^0 = 1 by np.power)
    rad = np.power(bracket(r), 2 * weight.power_r) * np.power(r, 2.0 - 2.0 * weight.power_inv_r)
    integrand = np.square(f.values) * (np.square(_ghost_factor(grid, weight.ghost_U))
                                       if weight.ghost_U is not None else 1.0)
    if mask is not None:
        integrand = integrand * mask
    return np.sqrt(FOUR_PI * (integrand * rad[None, :]) @ wr)


def spatial_sup(f: SpaceTimeField, weight: WeightSpec = WeightSpec(),
                mask: np.ndarray | None = None) -> np.ndarray:
    grid = f.grid
    w = np.power(bracket(grid.r), weight.power_r)[None, :]
    g = _ghost_factor(grid, weight.ghost_U)
    vals = np.abs(f.values) * w * (g if weight.ghost_U is not None else 1.0)
    if mask is not None:
        vals = np.where(mask > 0, vals, 0.0)
    return np.max(vals, axis=1)


def mixed_norm(f: SpaceTimeField, spec: MixedNormSpec, smooth_mask: bool = False) -> float:
    """Evaluate a weighted mixed norm, optionally localized to a dyadic region."""
    mask = None
    if spec.region is not None:
        rm = realize_mask(spec.region, f.grid, smooth=smooth_mask)
        mask = rm.weights
    if spec.inner == "L2":
        per_t = spatial_l2(f, spec.weight, mask)
    else:
        per_t = spatial_sup(f, spec.weight, mask)
    if spec.outer == "Linf":
        return float(np.max(per_t))
    wt = _trapz_weights(f.grid.nt, f.grid.dt)
    return float(np.sqrt(np.square(per_t) @ wt))


def region_l2l2(f: SpaceTimeField, weight: WeightSpec, mask: np.ndarray) -> float:
    per_t = spatial_l2(f, weight, mask)
    wt = _trapz_weights(f.grid.nt, f.grid.dt)
    return float(np.sqrt(np.square(per_t) @ wt))


def region_supsup(values: np.ndarray, mask: np.ndarray) -> float:
    return float(np.max(np.where(mask > 0, np.abs(values), 0.0)))


# ----------------------------------------------------------------------
# local energy norms
# ----------------------------------------------------------------------

def _annulus_scales(grid) -> list[int]:
    return dyadic_scales(bracket(grid.r_max))


def le_norm(f: SpaceTimeField) -> float:
    """sup over dyadic R >= 1 of R^{-1/2} ||f||_{L2L2(A_R)}."""
    best = 0.0
    for R in _annulus_scales(f.grid):
        mask = realize_mask(DyadicRegion(None, ANNULUS, R), f.grid).weights
        best = max(best, R ** -0.5 * region_l2l2(f, WeightSpec(), mask))
    return best


def le1_pointwise(dt_f: np.ndarray, dr_f: np.ndarray, f_over_r: np.ndarray) -> np.ndarray:
    """Pointwise magnitude of (du, u/r) fed to the LE norm."""
    return np.sqrt(np.square(dt_f) + np.square(dr_f) + np.square(f_over_r))


def le1_norm(f: SpaceTimeField,
             dt_f: SpaceTimeField | None = None,
             dr_f: SpaceTimeField | None = None,
             f_over_r: SpaceTimeField | None = None) -> float:
    """||(du, u/r)||_LE; derivative fields may be supplied to bypass the stencils."""
    dt_v = (dt_f or derivative(f, DT)).values
    dr_v = (dr_f or derivative(f, DR)).values
    q_v = (f_over_r or quotient_by_r(f)).values
    e = SpaceTimeField(f.grid, le1_pointwise(dt_v, dr_v, q_v))
    return le_norm(e)


# ----------------------------------------------------------------------
# composite functionals
# ----------------------------------------------------------------------

def _check_params(p, delta, N):
    if not (0 < p < 1):
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if not (0 < delta < min(p, 1 - p)):
        raise ValueError(f"delta must lie in (0, min(p, 1-p)), got {delta}")
    if N > 3:
        raise ValueError(f"N = {N} exceeds the supported maximum 3")


class _Aggregates:
    """Pointwise sums over Z words |mu| <= N of derivative magnitudes.

    Words are consumed one at a time (layer by layer) so at most one layer of
    word fields is alive at once.
    """

    def __init__(self, f: SpaceTimeField, N: int):
        shape = f.grid.shape()
        self.grid = f.grid
        half = N // 2
        self.good = np.zeros(shape)     # sum |(dt+dr) Z^mu f|
        self.plain = np.zeros(shape)    # sum |Z^mu f|
        self.d_t = np.zeros(shape)      # sum |dt Z^mu f|
        self.d_r = np.zeros(shape)      # sum |dr Z^mu f|
        self.d_half = np.zeros(shape)   # sum over |mu| <= N//2 of |dt| + |dr|
        self.quot = np.zeros(shape)     # sum |Z^mu f| / r
        prev: dict[tuple, SpaceTimeField] = {(): f}
        self._absorb((), f, half)
        for length in range(1, N + 1):
            cur: dict[tuple, SpaceTimeField] = {}
            for word in (w for w in z_words(N) if len(w) == length):
                g = derivative(prev[word[1:]], word[0])
                cur[word] = g
                self._absorb(word, g, half)
            prev = cur

    def _absorb(self, word, g: SpaceTimeField, half: int):
        gt = derivative(g, DT).values
        gr = derivative(g, DR).values
        self.good += np.abs(gt + gr)
        self.plain += np.abs(g.values)
        self.d_t += np.abs(gt)
        self.d_r += np.abs(gr)
        self.quot += np.abs(quotient_by_r(g).values)
        if len(word) <= half:
            self.d_half += np.abs(gt) + np.abs(gr)

    def field(self, values) -> SpaceTimeField:
        return SpaceTimeField(self.grid, values)


def _region_rows(grid, tau_values):
    """(tau, R_eff, mask) and (tau, U_eff, mask) lists with the core attributed
    to both rows at effective scale tau/2."""
    r_rows, u_rows = [], []
    for tau in tau_values:
        for s in dyadic_scales(tau // 4):
            r_rows.append((tau, s, realize_mask(DyadicRegion(tau, R_KIND, s), grid).weights))
            u_rows.append((tau, s, realize_mask(DyadicRegion(tau, U_KIND, s), grid).weights))
        core = realize_mask(DyadicRegion(tau, CORE), grid).weights
        r_rows.append((tau, tau // 2, core))
        u_rows.append((tau, tau // 2, core))
    return r_rows, u_rows


def m_functional(u: SpaceTimeField, v: SpaceTimeField, p: float, delta: float,
                 N: int) -> NormBreakdown:
    """All summands of the boundedness functional for one iterate pair (u, v).

    The ell^2 region row for v is reported in both printed weight variants
    ("v_R_l2" with tau^{1/2} R^{1-delta/2} enters the total; the
    R^{(3-delta)/2} alternative is recorded as "v_R_l2_alt").
    """
    _check_params(p, delta, N)
    if u.grid != v.grid:
        raise ValueError("u and v must share a grid")
    grid = u.grid
    au, av = _Aggregates(u, N), _Aggregates(v, N)
    w_half = WeightSpec(power_r=(p - 1) / 2)

    slots: dict[str, float] = {}
    slots["u_good_l2l2"] = mixed_norm(au.field(au.good), MixedNormSpec("L2", "L2", w_half))
    slots["u_invr_l2l2"] = mixed_norm(au.field(au.quot), MixedNormSpec("L2", "L2", w_half))
    slots["v_good_l2l2"] = mixed_norm(av.field(av.good), MixedNormSpec("L2", "L2", w_half))
    slots["v_invr_l2l2"] = mixed_norm(av.field(av.quot), MixedNormSpec("L2", "L2", w_half))
    slots["u_le1"] = le_norm(au.field(le1_pointwise(au.d_t, au.d_r, au.quot)))
    slots["u_d_linfl2"] = mixed_norm(au.field(au.d_t + au.d_r), MixedNormSpec("Linf", "L2"))
    slots["v_d_weighted_l2l2"] = mixed_norm(
        av.field(av.d_t + av.d_r), MixedNormSpec("L2", "L2", WeightSpec(power_r=-(1 + delta) / 2)))
    slots["v_d_weighted_linfl2"] = mixed_norm(
        av.field(av.d_t + av.d_r), MixedNormSpec("Linf", "L2", WeightSpec(power_r=-delta / 2)))

    per_region: dict[str, float] = {}
    tau_values = dyadic_scales(grid.t_max / 2, start=4)
    r_rows, u_rows = _region_rows(grid, tau_values)

    sup_u_r = 0.0
    sq_v_r = 0.0
    sq_v_r_alt = 0.0
    for tau, s, mask in r_rows:
        lu = region_supsup(au.d_half, mask)
        lv = region_supsup(av.d_half, mask)
        per_region[f"R tau={tau} s={s} u"] = lu
        per_region[f"R tau={tau} s={s} v"] = lv
        sup_u_r = max(sup_u_r, tau ** 0.5 * s * lu)
        sq_v_r += (tau ** 0.5 * s ** (1 - delta / 2) * lv) ** 2
        sq_v_r_alt += (s ** ((3 - delta) / 2) * lv) ** 2
    sup_u_u = 0.0
    sq_v_u = 0.0
    for tau, s, mask in u_rows:
        lu = region_supsup(au.d_half, mask)
        lv = region_supsup(av.d_half, mask)
        per_region[f"U tau={tau} s={s} u"] = lu
        per_region[f"U tau={tau} s={s} v"] = lv
        sup_u_u = max(sup_u_u, tau * s ** 0.5 * lu)
        sq_v_u += (tau ** (1 - delta / 2) * s ** 0.5 * lv) ** 2

    slots["u_R_sup"] = sup_u_r
    slots["v_R_l2"] = float(np.sqrt(sq_v_r))
    slots["u_U_sup"] = sup_u_u
    slots["v_U_l2"] = float(np.sqrt(sq_v_u))
    extras = {"v_R_l2_alt": float(np.sqrt(sq_v_r_alt))}

    total = float(sum(slots.values()))
    slots.update(extras)
    return NormBreakdown(total=total, slots=slots, per_region=per_region,
                         truncation_T=grid.t_max, aggregation="sum (alt slots excluded)")


def a_functional(u_diff: SpaceTimeField, v_diff: SpaceTimeField, p: float,
                 delta: float, N: int) -> NormBreakdown:
    """Contraction functional: the boundedness slots applied to iterate
    differences, minus the sup-in-t slot for the v derivative, with the
    R^{(3-delta)/2} weight on the v region row."""
    _check_params(p, delta, N)
    if u_diff.grid != v_diff.grid:
        raise ValueError("difference fields must share a grid")
    grid = u_diff.grid
    au, av = _Aggregates(u_diff, N), _Aggregates(v_diff, N)
    w_half = WeightSpec(power_r=(p - 1) / 2)

    slots: dict[str, float] = {}
    slots["u_good_l2l2"] = mixed_norm(au.field(au.good), MixedNormSpec("L2", "L2", w_half))
    slots["u_invr_l2l2"] = mixed_norm(au.field(au.quot), MixedNormSpec("L2", "L2", w_half))
    slots["v_good_l2l2"] = mixed_norm(av.field(av.good), MixedNormSpec("L2", "L2", w_half))
    slots["v_invr_l2l2"] = mixed_norm(av.field(av.quot), MixedNormSpec("L2", "L2", w_half))
    slots["u_le1"] = le_norm(au.field(le1_pointwise(au.d_t, au.d_r, au.quot)))
    slots["u_d_linfl2"] = mixed_norm(au.field(au.d_t + au.d_r), MixedNormSpec("Linf", "L2"))
    slots["v_d_weighted_l2l2"] = mixed_norm(
        av.field(av.d_t + av.d_r), MixedNormSpec("L2", "L2", WeightSpec(power_r=-(1 + delta) / 2)))

    per_region: dict[str, float] = {}
    tau_values = dyadic_scales(grid.t_max / 2, start=4)
    r_rows, u_rows = _region_rows(grid, tau_values)

    sup_u_r, sq_v_r = 0.0, 0.0
    for tau, s, mask in r_rows:
        lu = region_supsup(au.d_half, mask)
        lv = region_supsup(av.d_half, mask)
        per_region[f"R tau={tau} s={s} u"] = lu
        per_region[f"R tau={tau} s={s} v"] = lv
        sup_u_r = max(sup_u_r, tau ** 0.5 * s * lu)
        sq_v_r += (s ** ((3 - delta) / 2) * lv) ** 2
    sup_u_u, sq_v_u = 0.0, 0.0
    for tau, s, mask in u_rows:
        lu = region_supsup(au.d_half, mask)
        lv = region_supsup(av.d_half, mask)
        per_region[f"U tau={tau} s={s} u"] = lu
        per_region[f"U tau={tau} s={s} v"] = lv
        sup_u_u = max(sup_u_u, tau * s ** 0.5 * lu)
        sq_v_u += (tau ** (1 - delta / 2) * s ** 0.5 * lv) ** 2

    slots["u_R_sup"] = sup_u_r
    slots["v_R_l2"] = float(np.sqrt(sq_v_r))
    slots["u_U_sup"] = sup_u_u
    slots["v_U_l2"] = float(np.sqrt(sq_v_u))
    total = float(sum(slots.values()))
    return NormBreakdown(total=total, slots=slots, per_region=per_region,
                         truncation_T=grid.t_max, aggregation="sum")
