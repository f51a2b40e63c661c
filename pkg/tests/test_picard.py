import numpy as np
import pytest

import radialwave as rw
from radialwave import picard
from radialwave.picard import IterationRecord, PicardConfig


def small_config(**kw):
    g = rw.GridSpec(dr=1 / 16, cfl=0.5, r_max=20, t_max=16)
    defaults = dict(grid=g, eps=0.02, kmax=3)
    defaults.update(kw)
    return PicardConfig(**defaults)


class TestIteration:
    def test_records_and_contraction(self):
        records = picard.run_iteration(small_config())
        assert [r.k for r in records] == [1, 2, 3]
        assert records[0].contraction_ratio is None
        # the second difference is a quadratically small correction
        assert records[1].contraction_ratio < 0.5
        assert records[2].a_total < records[1].a_total

    def test_first_iterate_is_linear(self):
        cfg = small_config(kmax=1)
        records = picard.run_iteration(cfg)
        g = cfg.grid
        data = rw.calibrate(cfg.data, g, cfg.N, cfg.eps)
        lin = rw.solve(data, rw.SolveConfig(grid=g, mode="homogeneous"))
        m = rw.m_functional(lin.u(), lin.v(), cfg.p, cfg.delta, cfg.N)
        np.testing.assert_allclose(records[0].m_total, m.total, rtol=1e-12)

    def test_persistence_and_resume(self, tmp_path):
        out = str(tmp_path)
        first = picard.run_iteration(small_config(kmax=2, outdir=out))
        resumed = picard.run_iteration(small_config(kmax=3, outdir=out))
        # the first two records come back verbatim from disk
        assert [r.k for r in resumed] == [1, 2, 3]
        np.testing.assert_allclose(resumed[0].m_total, first[0].m_total, rtol=0)
        np.testing.assert_allclose(resumed[1].a_total, first[1].a_total, rtol=0)
        # continuation agrees with a fresh full run
        fresh = picard.run_iteration(small_config(kmax=3))
        np.testing.assert_allclose(resumed[2].m_total, fresh[2].m_total, rtol=1e-9)

    def test_record_json_roundtrip(self):
        rec = IterationRecord(2, 1.5, 0.25, 0.1, {"a": 1.0}, {"b": 2.0}, 0.5)
        back = IterationRecord.from_json(rec.to_json())
        assert back == rec


class TestBoundedness:
    def test_verdict_structure(self):
        records = picard.run_iteration(small_config())
        verdict = picard.check_boundedness(records, 0.02)
        assert verdict["bounded"]
        np.testing.assert_allclose(verdict["threshold"],
                                   2 * verdict["fitted_C0"] * 0.02)
        assert verdict["max_m"] >= records[0].m_total

    def test_unbounded_flagged(self):
        records = [IterationRecord(1, 1.0, 1.0, None),
                   IterationRecord(2, 5.0, 0.1, 0.1)]
        verdict = picard.check_boundedness(records, 0.01)
        assert not verdict["bounded"]

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            picard.check_boundedness([], 0.01)


class TestNonContraction:
    def test_raised_after_three_rises(self, monkeypatch):
        cfg = small_config(kmax=6)
        # force the difference functional to grow every step
        seq = iter([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])

        class FakeBreakdown:
            def __init__(self, total):
                self.total = total
                self.slots = {}

        monkeypatch.setattr(picard, "a_functional",
                            lambda *a, **k: FakeBreakdown(next(seq)))
        with pytest.raises(picard.NonContraction) as exc:
            picard.run_iteration(cfg)
        assert len(exc.value.records) == 4  # k = 1 plus three rising ratios


class TestDecayFit:
    def test_recovers_synthetic_exponent(self):
        t = np.linspace(0, 128, 4097)
        diags = {"t": t,
                 "sup_u": 0.5 * (1 + t) ** -1.0,
                 "sup_v": 0.25 * (1 + t) ** -1.1}
        fit = picard.fit_decay(diags)
        assert abs(fit["exponent_u"] + 1.0) < 0.02
        assert abs(fit["exponent_v"] + 1.1) < 0.02
        assert fit["t_sup_u_factor"] < 1.1

    def test_window_too_small(self):
        diags = {"t": np.array([0.0, 1.0, 2.0]),
                 "sup_u": np.ones(3), "sup_v": np.ones(3)}
        with pytest.raises(ValueError):
            picard.fit_decay(diags)

    def test_decay_run_diagnostics_only(self):
        g = rw.GridSpec(dr=1 / 8, cfl=0.5, r_max=36, t_max=32)
        diags = picard.decay_run(g, 0.02)
        assert set(diags) >= {"t", "sup_u", "sup_v", "support_radius"}
        fit = picard.fit_decay(diags)
        assert fit["exponent_u"] < -0.5
