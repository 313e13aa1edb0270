"""Planning metrics: underprovisioning ratio, wavelength-source counts and the
maximum viable cost of a multi-wavelength-source block relative to an SWS."""

from __future__ import annotations

from dataclasses import dataclass

from .netgraph import Demand
from .planner import (FIXED_FSR_MODE, SWS_MODE, PlanResult, PlannerPolicy,
                      group_flexible_mws)


@dataclass(frozen=True)
class ScenarioMetrics:
    art_tbps: float
    provisioned_tbps: float
    lp_count: int
    ws_count: int
    up_ratio: float
    extra_lp_ratio: float | None
    fallback_count: int


def underprovisioning(demands: list[Demand], result: PlanResult) -> float:
    """Fraction of requested traffic left unserved; only demands with a
    positive shortfall count, overshoot elsewhere never compensates."""
    total_requested = sum(d.requested_gbps for d in demands)
    if total_requested <= 0:
        raise ValueError("total requested traffic must be > 0")
    shortfall = 0.0
    for d in demands:
        gap = d.requested_gbps - result.provisioned_gbps.get(d.id, 0.0)
        if gap > 0:
            shortfall += gap
    return shortfall / total_requested


def wavelength_source_count(result: PlanResult, policy: PlannerPolicy) -> int:
    """Sources needed by a plan: one per lightpath for SWSs, MWS instances plus
    SWS lightpaths in the hybrid case, per-node grouping for flexible MWSs."""
    if policy.mode == SWS_MODE:
        return result.lp_count
    if policy.mode == FIXED_FSR_MODE:
        sws_lps = sum(1 for lp in result.lightpaths if lp.source[0] == "sws")
        return len(result.mws_instances) + sws_lps
    return len(group_flexible_mws(result, policy.n_lines))


def max_mws_block_cost(n_sws_lp: int, n_mws_lp: int, n_mws: int,
                       laser_share: float) -> float | None:
    """Largest MWS block cost (as a multiple of the SWS laser cost) that still
    beats the all-SWS deployment.

    Transponder cost is laser_share laser + (1 - laser_share) electronics per
    lightpath; parity of n_sws_lp SWS transponders with n_mws_lp MWS-fed
    lightpaths plus n_mws blocks gives the break-even block cost. None means
    the MWS deployment can never be cheaper.
    """
    if n_mws <= 0:
        raise ValueError("n_mws must be > 0")
    if not 0 < laser_share < 1:
        raise ValueError("laser share must be in (0, 1)")
    block_cost = (n_sws_lp - n_mws_lp * (1.0 - laser_share)) / n_mws
    if block_cost <= 0:
        return None
    return block_cost / laser_share


def scenario_metrics(art_tbps: float, demands: list[Demand], result: PlanResult,
                     policy: PlannerPolicy,
                     baseline: PlanResult | None = None) -> ScenarioMetrics:
    extra = None
    if baseline is not None and baseline.lp_count > 0:
        extra = (result.lp_count - baseline.lp_count) / baseline.lp_count
    return ScenarioMetrics(
        art_tbps=art_tbps,
        provisioned_tbps=result.provisioned_total_gbps() / 1000.0,
        lp_count=result.lp_count,
        ws_count=wavelength_source_count(result, policy),
        up_ratio=underprovisioning(demands, result),
        extra_lp_ratio=extra,
        fallback_count=result.fallback_demand_count,
    )
