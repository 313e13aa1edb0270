import math

import pytest

from combplan.netgraph import parse_topology, Demand
from combplan.phys import CONFIGS, FiberParams
from combplan.planner import (INFEASIBLE, Planner, PlannerPolicy, fixed_fsr_policy,
                              flexible_fsr_policy, group_flexible_mws, plan,
                              sws_policy)
from combplan.spectrum import RESERVED, USED, SlotBlock

FIBER = FiberParams()


def line_topology(n_links=1, length_km=80.0):
    return parse_topology({
        "nodes": [{"id": i, "name": f"n{i}", "lat": 0, "lon": 0}
                  for i in range(n_links + 1)],
        "links": [{"a": i, "b": i + 1, "length_km": length_km}
                  for i in range(n_links)],
    }, "line")


def config_for(modulation, sr):
    return next(c for c in CONFIGS
                if c.modulation == modulation and c.symbol_rate_gbd == sr)


def demand(gbps, src=0, dst=None, did=0):
    return Demand(id=did, src=src, dst=dst if dst is not None else 1,
                  requested_gbps=gbps)


class TestSwsPlacement:
    def test_single_small_demand(self):
        topo = line_topology()
        result, _ = plan(topo, [demand(100.0)], sws_policy())
        assert result.lp_count == 1
        assert not result.failures
        assert result.provisioned_gbps[0] >= 100.0

    def test_next_higher_rate_chosen(self):
        topo = line_topology()
        result, _ = plan(topo, [demand(1000.0)], sws_policy())
        assert result.lp_count == 1
        lp = result.lightpaths[0]
        assert (lp.config.modulation, lp.config.symbol_rate_gbd) == ("64QAM", 105.0)
        assert result.provisioned_gbps[0] == pytest.approx(1008.0)

    def test_two_lightpaths_with_minimal_tail(self):
        topo = line_topology()
        result, _ = plan(topo, [demand(2000.0)], sws_policy())
        rates = sorted(lp.data_rate_gbps for lp in result.lightpaths)
        assert rates == [672.0, 1344.0]
        tail = next(lp for lp in result.lightpaths if lp.data_rate_gbps == 672.0)
        assert (tail.config.modulation, tail.config.symbol_rate_gbd) == ("64QAM", 70.0)

    def test_full_grid_leaves_shortfall(self):
        topo = line_topology()
        planner = Planner(topo, sws_policy())
        planner.grid.allocate([0], SlotBlock(0, 400), owner="blocker")
        result = planner.run([demand(500.0)])
        assert result.lp_count == 0
        assert result.failures[0].shortfall_gbps == pytest.approx(500.0)
        assert result.failures[0].reason == "no_spectrum"

    def test_overshoot_allowed(self):
        topo = line_topology()
        result, _ = plan(topo, [demand(1300.0)], sws_policy())
        assert result.provisioned_gbps[0] >= 1300.0

    def test_committed_lightpaths_meet_required_snr(self):
        topo = line_topology(3)
        dem = [Demand(0, 0, 3, 900.0), Demand(1, 0, 2, 400.0)]
        result, _ = plan(topo, dem, sws_policy())
        for lp in result.lightpaths:
            assert lp.snr.snr_total_db >= lp.config.required_snr_db


class TestDowngrade:
    def test_unchanged_when_passing(self):
        planner = Planner(line_topology(1), sws_policy())
        route = planner.routes_for(0, 1)[0]
        top = config_for("64QAM", 140.0)
        assert planner.downgrade(route, top, top.width_slots, 36.0) == top

    def test_steps_down_to_16qam_140(self):
        planner = Planner(line_topology(4), sws_policy())
        route = planner.routes_for(0, 4)[0]
        top = config_for("64QAM", 140.0)
        snr = planner.full_snr(route, top, 36.0)
        assert snr.snr_total_db < top.required_snr_db  # needs the downgrade
        result = planner.downgrade(route, top, top.width_slots, 36.0)
        assert (result.modulation, result.symbol_rate_gbd) == ("16QAM", 140.0)

    def test_none_when_even_qpsk35_fails(self):
        planner = Planner(line_topology(1, length_km=8640.0), sws_policy())
        route = planner.routes_for(0, 1)[0]
        cfg = config_for("QPSK", 35.0)
        assert planner.downgrade(route, cfg, 12, 36.0) is None

    def test_ladder_respects_block_width(self):
        planner = Planner(line_topology(6), sws_policy())
        route = planner.routes_for(0, 6)[0]
        start = config_for("64QAM", 70.0)  # width-6 block: 16QAM@105 is skipped
        result = planner.downgrade(route, start, start.width_slots, 36.0)
        assert (result.modulation, result.symbol_rate_gbd) == ("16QAM", 70.0)
        assert result.width_slots <= start.width_slots


class TestEstimate:
    def test_single_lightpath_demand(self):
        planner = Planner(line_topology(), sws_policy())
        assert planner.estimate_sws_lp_count(demand(1000.0)) == 1

    def test_three_times_best_rate(self):
        planner = Planner(line_topology(), sws_policy())
        assert planner.estimate_sws_lp_count(demand(3 * 1344.0)) == 3

    def test_infeasible_sentinel(self):
        planner = Planner(line_topology(), sws_policy())
        planner.grid.allocate([0], SlotBlock(0, 400), owner="blocker")
        assert planner.estimate_sws_lp_count(demand(100.0)) == INFEASIBLE
        assert math.isinf(INFEASIBLE)

    def test_matches_committed_placement(self):
        topo = line_topology(2)
        demands = [Demand(i, 0, 2, 700.0 + 13 * i) for i in range(20)]
        planner = Planner(topo, sws_policy())
        for d in sorted(demands, key=lambda x: (-x.requested_gbps, x.id)):
            planner.provisioned.setdefault(d.id, 0.0)
            estimate = planner.estimate_sws_lp_count(d)
            placed = planner.place_demand_sws(d, 36.0)
            failed = any(f.demand_id == d.id for f in planner.failures)
            committed = INFEASIBLE if failed else len(placed)
            assert estimate == committed

    def test_estimate_does_not_mutate_grid(self):
        planner = Planner(line_topology(), sws_policy())
        before = planner.grid.slot_counts(0)
        planner.estimate_sws_lp_count(demand(5000.0))
        assert planner.grid.slot_counts(0) == before


class TestFixedFsr:
    def test_cutoff_one_uses_mws(self):
        topo = line_topology()
        result, engine = plan(topo, [demand(800.0)], fixed_fsr_policy(4, 1))
        assert len(result.mws_instances) == 1
        inst = result.mws_instances[0]
        assert inst.active_line_count == 1
        assert result.lp_count == 1
        assert result.lightpaths[0].source[0] == "mws"
        # one line used, three still reserved
        counts = engine.grid.slot_counts(0)
        width = inst.per_line_width_slots
        assert counts[USED] == width
        assert counts[RESERVED] == 3 * width

    def test_two_of_four_lines_active(self):
        topo = line_topology()
        result, _ = plan(topo, [demand(1500.0)], fixed_fsr_policy(4, 1))
        assert len(result.mws_instances) == 1
        assert result.mws_instances[0].active_line_count == 2
        assert result.lp_count == 2
        assert result.provisioned_gbps[0] >= 1500.0

    def test_uniform_config_shared_by_lines(self):
        topo = line_topology()
        result, _ = plan(topo, [demand(2600.0)], fixed_fsr_policy(4, 1))
        configs = {lp.config for lp in result.lightpaths}
        assert len(configs) == 1

    def test_cutoff_dispatch(self):
        topo = line_topology()
        # 1500 Gbit/s needs 2 SWS lightpaths: estimate 2
        result_hi, _ = plan(topo, [demand(1500.0)], fixed_fsr_policy(4, 4))
        assert not result_hi.mws_instances  # 2 < 4: stays on SWSs
        assert all(lp.source == ("sws",) for lp in result_hi.lightpaths)
        result_lo, _ = plan(topo, [demand(1500.0)], fixed_fsr_policy(4, 2))
        assert result_lo.mws_instances  # 2 >= 2: comb source

    def test_additional_mws_for_large_demand(self):
        topo = line_topology()
        result, _ = plan(topo, [demand(6000.0)], fixed_fsr_policy(4, 1))
        assert len(result.mws_instances) == 2
        assert result.provisioned_gbps[0] >= 6000.0
        assert all(inst.demand_id == 0 for inst in result.mws_instances)

    def test_fallback_to_sws_when_no_block(self):
        topo = line_topology()
        planner = Planner(topo, fixed_fsr_policy(4, 1))
        # leave free gaps too narrow for a 4-line block but fine for one channel
        for start in range(13, 400, 26):
            planner.grid.allocate([0], SlotBlock(start, 13), owner=f"b{start}")
        result = planner.run([demand(800.0)])
        assert not result.mws_instances
        assert result.fallback_demand_count == 1
        assert result.lp_count >= 1
        assert all(lp.source == ("sws",) for lp in result.lightpaths)

    def test_mws_lines_use_penalized_osnr(self):
        topo = line_topology()
        result, _ = plan(topo, [demand(800.0)],
                         fixed_fsr_policy(4, 1, penalty_db=1.0))
        lp = result.lightpaths[0]
        # transmit SNR reflects 35 dB, not the 36 dB base
        expected = 35.0 - 10 * math.log10(lp.config.symbol_rate_gbd / 12.5)
        assert lp.snr.snr_tx_db == pytest.approx(expected, abs=1e-9)


class TestFlexible:
    def test_penalty_zero_identical_to_sws(self):
        topo = line_topology(2)
        demands = [Demand(i, 0, 2, 400.0 * (i + 1)) for i in range(5)]
        r_sws, _ = plan(topo, demands, sws_policy())
        r_flex, _ = plan(topo, demands, flexible_fsr_policy(0.0))
        assert r_flex.lightpaths == r_sws.lightpaths
        assert r_flex.provisioned_gbps == r_sws.provisioned_gbps
        assert r_flex.failures == r_sws.failures
        assert r_flex.mws_instances == [] == r_sws.mws_instances

    def test_penalty_reduces_selectable_rate(self):
        topo = line_topology(1)
        r0, _ = plan(topo, [demand(1300.0)], flexible_fsr_policy(0.0))
        r5, _ = plan(topo, [demand(1300.0)], flexible_fsr_policy(5.0))
        assert r0.lp_count == 1
        assert r5.lp_count == 2


class TestGrouping:
    def _result_with_lps_at(self, node_counts, n_lines):
        topo = line_topology(len(node_counts))
        demands = []
        for node, count in enumerate(node_counts):
            for _ in range(count):
                demands.append(Demand(len(demands), node, len(node_counts), 100.0))
        result, _ = plan(topo, demands, flexible_fsr_policy(1.0, n_lines=n_lines))
        return result

    def test_eight_lightpaths_two_sources(self):
        result = self._result_with_lps_at([8], 4)
        assert len(group_flexible_mws(result, 4)) == 2

    def test_nine_lightpaths_three_sources(self):
        result = self._result_with_lps_at([9], 4)
        assert len(group_flexible_mws(result, 4)) == 3

    def test_scattered_lightpaths_one_source_each(self):
        result = self._result_with_lps_at([1, 1, 1, 1, 1], 8)
        assert len(group_flexible_mws(result, 8)) == 5

    def test_lines_reference_lightpaths(self):
        result = self._result_with_lps_at([5], 4)
        instances = group_flexible_mws(result, 4)
        referenced = [lp for inst in instances for lp in inst.line_lightpath_ids
                      if lp is not None]
        assert sorted(referenced) == sorted(lp.id for lp in result.lightpaths)


class TestDeterminism:
    def test_identical_reruns(self):
        topo = line_topology(3)
        demands = [Demand(i, i % 3, 3, 321.0 * (1 + i % 4)) for i in range(12)]
        r1, _ = plan(topo, demands, flexible_fsr_policy(3.0))
        r2, _ = plan(topo, demands, flexible_fsr_policy(3.0))
        assert r1.lightpaths == r2.lightpaths
        assert r1.provisioned_gbps == r2.provisioned_gbps
        assert r1.failures == r2.failures

    def test_service_order_largest_first(self):
        topo = line_topology()
        demands = [Demand(0, 0, 1, 100.0), Demand(1, 0, 1, 900.0)]
        result, _ = plan(topo, demands, sws_policy())
        first_lp = result.lightpaths[0]
        assert first_lp.demand_id == 1


def test_policy_validation():
    with pytest.raises(ValueError):
        fixed_fsr_policy(4, 5)
    with pytest.raises(ValueError):
        flexible_fsr_policy(-1.0)
    with pytest.raises(ValueError):
        PlannerPolicy(mode="bogus")
