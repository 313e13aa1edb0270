import random

import pytest

from combplan.netgraph import Demand
from combplan.metrics import (max_mws_block_cost, scenario_metrics,
                              underprovisioning, wavelength_source_count)
from combplan.planner import (MwsInstance, PlanResult, fixed_fsr_policy,
                              flexible_fsr_policy, sws_policy)


def result_with(provisioned, policy=None, lightpaths=(), mws=(), fallbacks=0):
    return PlanResult(policy=policy or sws_policy(), lightpaths=list(lightpaths),
                      mws_instances=list(mws), provisioned_gbps=dict(provisioned),
                      failures=[], fallback_demand_count=fallbacks)


def demands_of(*rates):
    return [Demand(i, 0, 1, r) for i, r in enumerate(rates)]


class FakeLp:
    def __init__(self, lp_id, src, kind="sws"):
        self.id = lp_id
        self.source = (kind,) if kind == "sws" else (kind, "m", 0)
        self.route = type("R", (), {"src": src})()
        self.data_rate_gbps = 100.0


class TestUnderprovisioning:
    def test_fully_served(self):
        demands = demands_of(100.0, 50.0)
        assert underprovisioning(demands, result_with({0: 100.0, 1: 50.0})) == 0.0

    def test_partial_shortfall(self):
        demands = demands_of(100.0, 50.0)
        up = underprovisioning(demands, result_with({0: 80.0, 1: 50.0}))
        assert up == pytest.approx(20.0 / 150.0)

    def test_overshoot_never_offsets_shortfall(self):
        demands = demands_of(100.0, 100.0)
        up = underprovisioning(demands, result_with({0: 120.0, 1: 0.0}))
        assert up == pytest.approx(0.5)

    def test_zero_total_demand_rejected(self):
        with pytest.raises(ValueError):
            underprovisioning([], result_with({}))

    def test_range_and_scale_invariance(self):
        rng = random.Random(23)
        for _ in range(200):
            n = rng.randint(1, 12)
            demands = demands_of(*(rng.uniform(1, 500) for _ in range(n)))
            prov = {d.id: rng.uniform(0, 600) for d in demands}
            up = underprovisioning(demands, result_with(prov))
            assert 0.0 <= up <= 1.0
            factor = rng.uniform(0.1, 10)
            scaled = [Demand(d.id, d.src, d.dst, d.requested_gbps * factor)
                      for d in demands]
            up2 = underprovisioning(
                scaled, result_with({k: v * factor for k, v in prov.items()}))
            assert up2 == pytest.approx(up, rel=1e-9)


class TestWavelengthSources:
    def test_sws_equals_lightpaths(self):
        lps = [FakeLp(i, 0) for i in range(50)]
        res = result_with({}, lightpaths=lps)
        assert wavelength_source_count(res, sws_policy()) == 50

    def test_fixed_counts_instances_plus_fallbacks(self):
        mws = [MwsInstance(f"m{i}", 0, "fixed", 4, (None,) * 4) for i in range(3)]
        lps = [FakeLp(0, 0, kind="mws"), FakeLp(1, 0, kind="mws"),
               FakeLp(2, 0), FakeLp(3, 0)]
        res = result_with({}, lightpaths=lps, mws=mws)
        assert wavelength_source_count(res, fixed_fsr_policy(4, 2)) == 5

    def test_flexible_grouping_count(self):
        lps = [FakeLp(i, src) for i, src in enumerate([0] * 8 + [1])]
        res = result_with({}, lightpaths=lps)
        assert wavelength_source_count(res, flexible_fsr_policy(1.0, n_lines=4)) == 3


class TestBlockCost:
    def test_hand_computed_anchor(self):
        assert max_mws_block_cost(100, 102, 29, 0.33) == pytest.approx(3.308255, abs=1e-5)

    def test_round_number_case(self):
        assert max_mws_block_cost(100, 100, 25, 0.33) == pytest.approx(4.0)

    def test_pure_laser_consolidation_limit(self):
        assert max_mws_block_cost(100, 100, 25, 0.999999) == pytest.approx(4.0, abs=1e-3)

    def test_never_viable(self):
        assert max_mws_block_cost(10, 100, 5, 0.2) is None

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            max_mws_block_cost(10, 10, 0, 0.33)
        with pytest.raises(ValueError):
            max_mws_block_cost(10, 10, 5, 1.0)

    def test_monotonicities(self):
        rng = random.Random(31)
        for _ in range(200):
            n_sws = rng.randint(50, 500)
            n_mws_lp = rng.randint(n_sws, int(n_sws * 1.3))
            n_mws = rng.randint(10, n_sws)
            s = rng.uniform(0.1, 0.6)
            base = max_mws_block_cost(n_sws, n_mws_lp, n_mws, s)
            if base is None:
                continue
            up_s = max_mws_block_cost(n_sws, n_mws_lp, n_mws, min(s + 0.05, 0.99))
            up_sws = max_mws_block_cost(n_sws + 10, n_mws_lp, n_mws, s)
            dn_lp = max_mws_block_cost(n_sws, n_mws_lp + 10, n_mws, s)
            dn_m = max_mws_block_cost(n_sws, n_mws_lp, n_mws + 10, s)
            assert up_s is None or up_s >= base - 1e-9
            assert up_sws >= base
            assert dn_lp is None or dn_lp <= base
            assert dn_m <= base


class TestScenarioMetrics:
    def test_identical_plan_zero_extra(self):
        demands = demands_of(100.0)
        lps = [FakeLp(0, 0)]
        res = result_with({0: 112.0}, lightpaths=lps)
        m = scenario_metrics(0.1, demands, res, sws_policy(), baseline=res)
        assert m.extra_lp_ratio == 0.0
        assert m.up_ratio == 0.0
        assert m.provisioned_tbps == pytest.approx(0.112)

    def test_no_baseline_leaves_extra_unset(self):
        demands = demands_of(100.0)
        res = result_with({0: 112.0}, lightpaths=[FakeLp(0, 0)])
        m = scenario_metrics(0.1, demands, res, sws_policy())
        assert m.extra_lp_ratio is None

    def test_ws_never_exceeds_lp(self):
        lps = [FakeLp(i, i % 3) for i in range(10)]
        res = result_with({}, lightpaths=lps)
        for policy in (sws_policy(), flexible_fsr_policy(1.0, n_lines=4),
                       flexible_fsr_policy(1.0, n_lines=8)):
            assert wavelength_source_count(res, policy) <= len(lps)
