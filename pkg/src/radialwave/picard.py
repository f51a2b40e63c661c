"""Fixed-point iteration driver, boundedness bookkeeping, and decay fits.

Each iterate solves the linear wave system with the quadratic source frozen
from the previous iterate; the boundedness functional of each iterate and the
contraction functional of consecutive differences are recorded per step.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import DR, GridSpec, SpaceTimeField, derivative, quotient_by_r
from .norms import NormBreakdown, a_functional, m_functional
from .solver import (
    InitialData, SolveConfig, SolutionHistory, bump, calibrate, config_hash,
    nonlinearity, solve, solve_linear_forced, zero_profile,
)


class NonContraction(RuntimeError):
    """Raised when the difference functional fails to decrease three times in
    a row; carries the records accumulated so far."""

    def __init__(self, records):
        super().__init__(
            "difference functional non-decreasing for three consecutive iterates")
        self.records = records


@dataclass
class PicardConfig:
    grid: GridSpec
    eps: float
    p: float = 0.75
    delta: float = 0.2
    N: int = 2
    kmax: int = 6
    data: InitialData = dc_field(default_factory=lambda: InitialData(
        bump, zero_profile, bump, zero_profile))
    outdir: str | None = None

    def descriptor(self) -> dict:
        g = self.grid
        return {"dr": g.dr, "cfl": g.cfl, "r_max": g.r_max, "t_max": g.t_max,
                "eps": self.eps, "p": self.p, "delta": self.delta,
                "N": self.N, "kmax": self.kmax}


@dataclass
class IterationRecord:
    k: int
    m_total: float
    a_total: float
    contraction_ratio: float | None
    m_slots: dict = dc_field(default_factory=dict)
    a_slots: dict = dc_field(default_factory=dict)
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {"k": self.k, "m_total": self.m_total, "a_total": self.a_total,
                "contraction_ratio": self.contraction_ratio,
                "m_slots": self.m_slots, "a_slots": self.a_slots,
                "wall_time": self.wall_time}

    @classmethod
    def from_json(cls, d: dict) -> "IterationRecord":
        return cls(d["k"], d["m_total"], d["a_total"], d["contraction_ratio"],
                   d["m_slots"], d["a_slots"], d["wall_time"])


def _derivative_frames(hist: SolutionHistory):
    """(dtu, dru, dtv, drv) scalar frames on the history grid; time derivatives
    come from the stored conjugate momenta, radial ones from the stencils."""
    u = hist.u()
    v = hist.v()
    return (quotient_by_r(hist.dtW_u).values, derivative(u, DR).values,
            quotient_by_r(hist.dtW_v).values, derivative(v, DR).values)


def _forcing_from(hist: SolutionHistory) -> tuple[SpaceTimeField, SpaceTimeField]:
    dtu, dru, dtv, drv = _derivative_frames(hist)
    g = hist.grid
    fu = SpaceTimeField(g, nonlinearity(dtu, dru, dtv, drv, "u-eq"))
    fv = SpaceTimeField(g, nonlinearity(dtu, dru, dtv, drv, "v-eq"))
    return fu, fv


def _difference(a: SpaceTimeField, b: SpaceTimeField | None) -> SpaceTimeField:
    if b is None:
        return a
    return SpaceTimeField(a.grid, a.values - b.values, a.parity)


def run_iteration(config: PicardConfig) -> list[IterationRecord]:
    """Run the iteration u_k = linear solve with source from (u_{k-1}, v_{k-1}).

    The zeroth iterate is identically zero, so k = 1 is the homogeneous solve.
    Records (and iterate histories, when ``outdir`` is set) are persisted per
    step and picked up again on rerun with an identical configuration.
    """
    grid = config.grid
    data = calibrate(config.data, grid, config.N, config.eps)
    records: list[IterationRecord] = []
    tag = config_hash(config.descriptor())

    prev_hist: SolutionHistory | None = None
    prev_u = prev_v = None
    start_k = 1
    if config.outdir:
        os.makedirs(config.outdir, exist_ok=True)
        records, prev_hist = _load_state(config, tag)
        if records:
            start_k = records[-1].k + 1
            prev_u, prev_v = prev_hist.u(), prev_hist.v()

    rising = 0
    for k in range(start_k, config.kmax + 1):
        t0 = time.perf_counter()
        if k == 1:
            hist = solve(data, SolveConfig(grid=grid, mode="homogeneous"))
        else:
            fu, fv = _forcing_from(prev_hist)
            hist = solve_linear_forced(data, fu, fv, SolveConfig(grid=grid))
        u, v = hist.u(), hist.v()
        m = m_functional(u, v, config.p, config.delta, config.N)
        a = a_functional(_difference(u, prev_u), _difference(v, prev_v),
                         config.p, config.delta, config.N)
        ratio = None
        if records:
            prev_a = records[-1].a_total
            ratio = a.total / prev_a if prev_a > 0 else float("inf")
        rec = IterationRecord(k, m.total, a.total, ratio, dict(m.slots),
                              dict(a.slots), time.perf_counter() - t0)
        records.append(rec)
        if config.outdir:
            _save_state(config, tag, records, hist)
        if ratio is not None and ratio >= 1.0:
            rising += 1
            if rising >= 3:
                raise NonContraction(records)
        else:
            rising = 0
        prev_hist, prev_u, prev_v = hist, u, v
    return records


def _state_paths(config: PicardConfig, tag: str):
    base = os.path.join(config.outdir, f"picard_{tag}")
    return base + "_records.json", base + "_last"


def _save_state(config, tag, records, hist):
    rec_path, hist_dir = _state_paths(config, tag)
    hist.save(hist_dir)
    with open(rec_path, "w") as fh:
        json.dump({"config": config.descriptor(),
                   "records": [r.to_json() for r in records]}, fh, sort_keys=True)


def _load_state(config, tag):
    rec_path, hist_dir = _state_paths(config, tag)
    if not os.path.exists(rec_path):
        return [], None
    with open(rec_path) as fh:
        blob = json.load(fh)
    records = [IterationRecord.from_json(d) for d in blob["records"]]
    return records, SolutionHistory.load(hist_dir)


def check_boundedness(records: list[IterationRecord], eps: float) -> dict:
    """Judge sup_k M_k against the 2*C0*eps threshold with C0 fitted from the
    first (linear) iterate."""
    if not records:
        raise ValueError("no iteration records")
    fitted_c0 = records[0].m_total / eps
    threshold = 2.0 * fitted_c0 * eps
    worst = max(r.m_total for r in records)
    return {
        "fitted_C0": fitted_c0,
        "threshold": threshold,
        "max_m": worst,
        "margin": worst / threshold,
        "bounded": bool(worst <= 1.05 * threshold),
    }


def fit_decay(diagnostics: dict, t_min: float | None = None,
              t_max: float | None = None) -> dict:
    """Log-log slopes of sup_x |u| and sup_x |v| against 1 + t on [T/8, T].

    Returns the fitted exponents plus the worst multiplicative departure of
    (1 + t) * sup|u| from its own median over the window.
    """
    t = np.asarray(diagnostics["t"], dtype=float)
    horizon = float(t[-1])
    lo = horizon / 8 if t_min is None else t_min
    hi = horizon if t_max is None else t_max
    sel = (t >= lo) & (t <= hi) & (t > 0)
    if np.count_nonzero(sel) < 8:
        raise ValueError(f"window [{lo}, {hi}] holds too few samples for a fit")
    out = {"window": (float(lo), float(hi))}
    for name in ("sup_u", "sup_v"):
        y = np.asarray(diagnostics[name], dtype=float)[sel]
        if np.any(y <= 0):
            raise ValueError(f"{name} vanishes inside the fit window")
        slope, intercept = np.polyfit(np.log1p(t[sel]), np.log(y), 1)
        out[f"exponent_{name[4:]}"] = float(slope)
        out[f"amplitude_{name[4:]}"] = float(np.exp(intercept))
    tu = (1.0 + t[sel]) * np.asarray(diagnostics["sup_u"], dtype=float)[sel]
    med = float(np.median(tu))
    out["t_sup_u_factor"] = float(max(np.max(tu) / med, med / np.min(tu)))
    return out


def decay_run(grid: GridSpec, eps: float, N: int = 2,
              data: InitialData | None = None) -> dict:
    """Long semilinear evolution recording diagnostics only (no history)."""
    data = data or InitialData(bump, zero_profile, bump, zero_profile)
    data = calibrate(data, grid, N, eps)
    hist = solve(data, SolveConfig(grid=grid, mode="semilinear", store_history=False))
    return hist.diagnostics
