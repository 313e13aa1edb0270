"""Routing, configuration and spectrum assignment under three deployment policies.

Demands are served sequentially, largest first. For each lightpath the
candidate configuration is chosen from the linear-SNR feasible set so the
demand needs as few lightpaths as possible and, within that, overshoots as
little as possible; the choice is then verified against the full SNR
(nonlinear interference included) and downgraded along the configuration
ladder when it fails. Routes are tried in length order and the first route
admitting a placement wins.

Policies:
  sws           every lightpath gets its own single-wavelength source.
  fixed_fsr     demands that would need at least n_cutoff SWS lightpaths are
                served from fixed-FSR multi-wavelength sources whose full
                n_lines block is reserved end-to-end on one route; others (and
                fallbacks when no block fits) use SWSs.
  flexible_fsr  placement is SWS-like at a penalized transmit OSNR; the
                wavelength-source count comes from grouping lightpaths per
                terminal node afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .netgraph import Demand, RoutePath, Topology, k_shortest_paths
from .phys import (CONFIGS, FiberParams, SnrBreakdown, TransceiverConfig,
                   feasible_configs, route_snr_terms, snr_tx_db_for, LINEAR_ONLY)
from .spectrum import SLOTS_PER_LINK, SlotBlock, SpectrumGrid
from .units import db_to_linear, linear_to_db

SWS_MODE = "sws"
FIXED_FSR_MODE = "fixed_fsr"
FLEXIBLE_FSR_MODE = "flexible_fsr"

INFEASIBLE = math.inf

_EPS_GBPS = 1e-6
_RATE_EPS = 1e-9


@dataclass(frozen=True)
class PlannerPolicy:
    mode: str
    n_lines: int = 1
    n_cutoff: int = 1
    osnr_tx_penalty_db: float = 0.0
    k: int = 3
    base_osnr_tx_db: float = 36.0

    def __post_init__(self):
        if self.mode not in (SWS_MODE, FIXED_FSR_MODE, FLEXIBLE_FSR_MODE):
            raise ValueError(f"unknown planner mode {self.mode!r}")
        if self.mode != SWS_MODE and self.n_lines < 1:
            raise ValueError("n_lines must be >= 1")
        if self.mode == FIXED_FSR_MODE and not 1 <= self.n_cutoff <= self.n_lines:
            raise ValueError("n_cutoff must be in 1..n_lines")
        if self.osnr_tx_penalty_db < 0:
            raise ValueError("penalty must be >= 0")

    @property
    def mws_osnr_tx_db(self) -> float:
        return self.base_osnr_tx_db - self.osnr_tx_penalty_db


def sws_policy(base_osnr_tx_db: float = 36.0, k: int = 3) -> PlannerPolicy:
    return PlannerPolicy(mode=SWS_MODE, base_osnr_tx_db=base_osnr_tx_db, k=k)


def fixed_fsr_policy(n_lines: int, n_cutoff: int, penalty_db: float = 1.0,
                     base_osnr_tx_db: float = 36.0, k: int = 3) -> PlannerPolicy:
    return PlannerPolicy(mode=FIXED_FSR_MODE, n_lines=n_lines, n_cutoff=n_cutoff,
                         osnr_tx_penalty_db=penalty_db,
                         base_osnr_tx_db=base_osnr_tx_db, k=k)


def flexible_fsr_policy(penalty_db: float, n_lines: int = 4,
                        base_osnr_tx_db: float = 36.0, k: int = 3) -> PlannerPolicy:
    return PlannerPolicy(mode=FLEXIBLE_FSR_MODE, n_lines=n_lines,
                         osnr_tx_penalty_db=penalty_db,
                         base_osnr_tx_db=base_osnr_tx_db, k=k)


@dataclass(frozen=True)
class Lightpath:
    id: int
    demand_id: int
    route: RoutePath
    config: TransceiverConfig
    block: SlotBlock
    source: tuple
    snr: SnrBreakdown
    data_rate_gbps: float


@dataclass(frozen=True)
class MwsInstance:
    id: str
    terminal_node: int
    fsr_mode: str
    n_lines: int
    line_lightpath_ids: tuple
    demand_id: int | None = None
    route: RoutePath | None = None
    block: SlotBlock | None = None
    per_line_width_slots: int | None = None

    @property
    def active_line_count(self) -> int:
        return sum(1 for lp in self.line_lightpath_ids if lp is not None)


@dataclass(frozen=True)
class PlacementFailure:
    demand_id: int
    shortfall_gbps: float
    reason: str


@dataclass
class PlanResult:
    policy: PlannerPolicy
    lightpaths: list = field(default_factory=list)
    mws_instances: list = field(default_factory=list)
    provisioned_gbps: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    fallback_demand_count: int = 0

    @property
    def lp_count(self) -> int:
        return len(self.lightpaths)

    def provisioned_total_gbps(self) -> float:
        return sum(self.provisioned_gbps.values())


def _lps_needed(remaining: float, rate: float) -> int:
    return max(1, math.ceil(remaining / rate - _RATE_EPS))


def _pick_config(candidates: list[TransceiverConfig], remaining: float) -> TransceiverConfig:
    """Highest rate while more lightpaths are needed anyway, otherwise the
    smallest feasible rate that still covers the remainder (narrower on ties)."""
    best = candidates[0]
    if remaining >= best.data_rate_gbps - _RATE_EPS:
        return best
    eligible = [c for c in candidates if c.data_rate_gbps >= remaining - _RATE_EPS]
    return min(eligible, key=lambda c: (c.data_rate_gbps, c.width_slots))


def _pick_uniform_config(candidates: list[TransceiverConfig], remaining: float,
                         n_lines: int) -> TransceiverConfig:
    """One configuration for all lines of a fixed-FSR block: fewest activated
    lines first, least overshoot second."""
    best = candidates[0]
    if remaining >= n_lines * best.data_rate_gbps - _RATE_EPS:
        return best
    lines_needed = _lps_needed(remaining, best.data_rate_gbps)
    eligible = [c for c in candidates
                if _lps_needed(remaining, c.data_rate_gbps) == lines_needed]
    return min(eligible, key=lambda c: (c.data_rate_gbps, c.width_slots))


class Planner:
    """Mutable state of one planning run; use plan() for the one-shot API."""

    def __init__(self, topology: Topology, policy: PlannerPolicy,
                 fiber: FiberParams | None = None,
                 routes: dict | None = None,
                 terms_cache: dict | None = None,
                 slots_per_link: int = SLOTS_PER_LINK):
        self.topology = topology
        self.policy = policy
        self.fiber = fiber if fiber is not None else FiberParams()
        self.grid = SpectrumGrid(len(topology.links), slots_per_link)
        self._routes = routes if routes is not None else {}
        self._terms_cache = terms_cache if terms_cache is not None else {}
        self._linear_cache: dict = {}
        self._selectable_cache: dict = {}
        self._lp_seq = 0
        self._mws_seq = 0
        self.lightpaths: list[Lightpath] = []
        self.mws_instances: list[MwsInstance] = []
        self.provisioned: dict[int, float] = {}
        self.failures: list[PlacementFailure] = []
        self.fallback_demand_count = 0

    # -- cached lookups -------------------------------------------------

    def routes_for(self, src: int, dst: int) -> list[RoutePath]:
        key = (src, dst)
        if key not in self._routes:
            self._routes[key] = k_shortest_paths(self.topology, src, dst, self.policy.k)
        return self._routes[key]

    def _terms(self, route: RoutePath) -> tuple[float, float]:
        terms = self._terms_cache.get(route.nodes)
        if terms is None:
            terms = route_snr_terms(route, self.fiber)
            self._terms_cache[route.nodes] = terms
        return terms

    def _linear_candidates(self, route: RoutePath, osnr_tx_db: float) -> list[TransceiverConfig]:
        key = (route.nodes, osnr_tx_db)
        cands = self._linear_cache.get(key)
        if cands is None:
            cands = feasible_configs(route, osnr_tx_db, self.fiber, mode=LINEAR_ONLY,
                                     route_terms=self._terms(route))
            self._linear_cache[key] = cands
        return cands

    def _selectable_candidates(self, route: RoutePath, osnr_tx_db: float) -> list[TransceiverConfig]:
        """Linear-SNR candidates narrowed to those already meeting the full
        requirement; when the full check leaves nothing, the linear list stands
        and the commit-time downgrade sorts it out."""
        key = (route.nodes, osnr_tx_db)
        cands = self._selectable_cache.get(key)
        if cands is None:
            linear = self._linear_candidates(route, osnr_tx_db)
            verified = [c for c in linear
                        if self.full_snr(route, c, osnr_tx_db).snr_total_db
                        >= c.required_snr_db]
            cands = verified if verified else linear
            self._selectable_cache[key] = cands
        return cands

    def full_snr(self, route: RoutePath, config: TransceiverConfig,
                 osnr_tx_db: float) -> SnrBreakdown:
        ase_db, nli_db = self._terms(route)
        tx_db = snr_tx_db_for(osnr_tx_db, config.symbol_rate_gbd)
        inv = db_to_linear(-ase_db) + db_to_linear(-nli_db)
        if not math.isinf(tx_db):
            inv += db_to_linear(-tx_db)
        return SnrBreakdown(snr_tx_db=tx_db, snr_ase_db=ase_db, snr_nli_db=nli_db,
                            snr_total_db=-linear_to_db(inv))

    # -- per-lightpath search --------------------------------------------

    def downgrade(self, route: RoutePath, config: TransceiverConfig,
                  max_width_slots: int, osnr_tx_db: float) -> TransceiverConfig | None:
        """Step down the rate-ordered ladder (widths capped by the allocated
        block) until the full SNR meets the requirement; None if nothing fits."""
        ladder = [c for c in CONFIGS if c.width_slots <= max_width_slots]
        for cand in ladder[ladder.index(config):]:
            snr = self.full_snr(route, cand, osnr_tx_db)
            if snr.snr_total_db >= cand.required_snr_db:
                return cand
        return None

    def _search_placement(self, demand: Demand, remaining: float,
                          osnr_tx_db: float, gridlike):
        """First route admitting one lightpath; returns (route, config, block)
        or (None, stage) where stage names the furthest step reached."""
        stage = "no_route"
        for route in self.routes_for(demand.src, demand.dst):
            if not self._linear_candidates(route, osnr_tx_db):
                stage = _max_stage(stage, "no_feasible_config")
                continue
            candidates = self._selectable_candidates(route, osnr_tx_db)
            config = _pick_config(candidates, remaining)
            block = gridlike.first_fit(route.link_ids, config.width_slots)
            if block is None:
                stage = _max_stage(stage, "no_spectrum")
                continue
            final = self.downgrade(route, config, block.width_slots, osnr_tx_db)
            if final is None:
                stage = _max_stage(stage, "snr_violation")
                continue
            return (route, final, block)
        return (None, stage)

    def _commit_lightpath(self, demand: Demand, route: RoutePath,
                          config: TransceiverConfig, block: SlotBlock,
                          source: tuple, osnr_tx_db: float,
                          preallocated: bool = False) -> Lightpath:
        lp_id = self._lp_seq
        self._lp_seq += 1
        if not preallocated:
            self.grid.allocate(route.link_ids, block, lp_id)
        lp = Lightpath(id=lp_id, demand_id=demand.id, route=route, config=config,
                       block=block, source=source,
                       snr=self.full_snr(route, config, osnr_tx_db),
                       data_rate_gbps=config.data_rate_gbps)
        self.lightpaths.append(lp)
        self.provisioned[demand.id] = self.provisioned.get(demand.id, 0.0) + lp.data_rate_gbps
        return lp

    def _record_failure(self, demand: Demand, shortfall: float, reason: str) -> None:
        self.failures.append(PlacementFailure(demand.id, shortfall, reason))

    # -- policy placements -------------------------------------------------

    def place_demand_sws(self, demand: Demand, osnr_tx_db: float) -> list[Lightpath]:
        placed = []
        remaining = demand.requested_gbps - self.provisioned.get(demand.id, 0.0)
        while remaining > _EPS_GBPS:
            found = self._search_placement(demand, remaining, osnr_tx_db, self.grid)
            if found[0] is None:
                self._record_failure(demand, remaining, found[1])
                break
            route, config, block = found
            lp = self._commit_lightpath(demand, route, config, block, ("sws",), osnr_tx_db)
            placed.append(lp)
            remaining -= lp.data_rate_gbps
        return placed

    def estimate_sws_lp_count(self, demand: Demand) -> float:
        """Lightpaths an SWS-only placement would need on the current spectrum
        state, without committing; inf when the demand cannot be fully served."""
        shadow = self.grid.clone_masks()
        remaining = demand.requested_gbps - self.provisioned.get(demand.id, 0.0)
        count = 0
        while remaining > _EPS_GBPS:
            found = self._search_placement(demand, remaining,
                                           self.policy.base_osnr_tx_db, shadow)
            if found[0] is None:
                return INFEASIBLE
            route, config, block = found
            shadow.occupy(route.link_ids, block)
            count += 1
            remaining -= config.data_rate_gbps
        return count

    def _search_mws_placement(self, demand: Demand, remaining: float, osnr_tx_db: float):
        n_lines = self.policy.n_lines
        for route in self.routes_for(demand.src, demand.dst):
            if not self._linear_candidates(route, osnr_tx_db):
                continue
            candidates = self._selectable_candidates(route, osnr_tx_db)
            config = _pick_uniform_config(candidates, remaining, n_lines)
            block = self.grid.first_fit(route.link_ids, n_lines * config.width_slots)
            if block is None:
                continue
            final = self.downgrade(route, config, config.width_slots, osnr_tx_db)
            if final is None:
                continue
            return (route, config, final)
        return None

    def place_demand_fixed_mws(self, demand: Demand) -> list[Lightpath]:
        """Serve a demand from fixed-FSR MWS blocks; the whole n_lines block is
        reserved on one route, lines are activated until the demand is covered,
        further MWSs follow if needed, and SWS placement is the fallback when
        no block fits anywhere."""
        osnr_mws = self.policy.mws_osnr_tx_db
        n_lines = self.policy.n_lines
        placed = []
        remaining = demand.requested_gbps - self.provisioned.get(demand.id, 0.0)
        fell_back = False
        while remaining > _EPS_GBPS:
            found = self._search_mws_placement(demand, remaining, osnr_mws)
            if found is None:
                fell_back = True
                break
            route, reserve_config, config = found
            mws_id = f"mws-{self._mws_seq}"
            self._mws_seq += 1
            block = self.grid.reserve_fixed_fsr(route.link_ids, mws_id, n_lines,
                                                reserve_config.width_slots)
            n_activate = min(n_lines, _lps_needed(remaining, config.data_rate_gbps))
            line_ids: list = [None] * n_lines
            for line in range(n_activate):
                lp_id = self._lp_seq
                line_block = self.grid.activate_reserved_line(mws_id, line, lp_id)
                lp = self._commit_lightpath(demand, route, config, line_block,
                                            ("mws", mws_id, line), osnr_mws,
                                            preallocated=True)
                line_ids[line] = lp.id
                placed.append(lp)
                remaining -= lp.data_rate_gbps
            self.mws_instances.append(MwsInstance(
                id=mws_id, terminal_node=route.src, fsr_mode="fixed",
                n_lines=n_lines, line_lightpath_ids=tuple(line_ids),
                demand_id=demand.id, route=route, block=block,
                per_line_width_slots=reserve_config.width_slots))
        if remaining > _EPS_GBPS and fell_back:
            self.fallback_demand_count += 1
            placed.extend(self.place_demand_sws(demand, self.policy.base_osnr_tx_db))
        return placed

    def place_demand_flexible_mws(self, demand: Demand) -> list[Lightpath]:
        """Flexible-FSR lines behave like SWSs at a penalized transmit OSNR;
        source accounting happens later in group_flexible_mws."""
        return self.place_demand_sws(demand, self.policy.mws_osnr_tx_db)

    # -- orchestration ------------------------------------------------------

    def run(self, demands: list[Demand]) -> PlanResult:
        order = sorted(demands, key=lambda d: (-d.requested_gbps, d.id))
        for demand in order:
            self.provisioned.setdefault(demand.id, 0.0)
            if self.policy.mode == SWS_MODE:
                self.place_demand_sws(demand, self.policy.base_osnr_tx_db)
            elif self.policy.mode == FLEXIBLE_FSR_MODE:
                self.place_demand_flexible_mws(demand)
            else:
                estimate = self.estimate_sws_lp_count(demand)
                if estimate >= self.policy.n_cutoff:
                    self.place_demand_fixed_mws(demand)
                else:
                    self.place_demand_sws(demand, self.policy.base_osnr_tx_db)
        self.grid.check_conservation()
        return PlanResult(policy=self.policy,
                          lightpaths=list(self.lightpaths),
                          mws_instances=list(self.mws_instances),
                          provisioned_gbps=dict(self.provisioned),
                          failures=list(self.failures),
                          fallback_demand_count=self.fallback_demand_count)


def _max_stage(a: str, b: str) -> str:
    order = ("no_route", "no_feasible_config", "no_spectrum", "snr_violation")
    return a if order.index(a) >= order.index(b) else b


def plan(topology: Topology, demands: list[Demand], policy: PlannerPolicy,
         fiber: FiberParams | None = None, routes: dict | None = None,
         terms_cache: dict | None = None,
         slots_per_link: int = SLOTS_PER_LINK) -> tuple[PlanResult, Planner]:
    """Run one deterministic planning pass; returns the result and the planner
    (whose grid allows post-run inspection). routes and terms_cache may be
    shared across runs on the same topology/fiber to avoid recomputation."""
    planner = Planner(topology, policy, fiber=fiber, routes=routes,
                      terms_cache=terms_cache, slots_per_link=slots_per_link)
    return planner.run(demands), planner


def group_flexible_mws(result: PlanResult, n_lines: int) -> list[MwsInstance]:
    """Group a flexible plan's lightpaths into n_lines-line sources per
    terminal node (the demand's source node); idle lines stay unassigned."""
    by_node: dict[int, list[Lightpath]] = {}
    for lp in result.lightpaths:
        by_node.setdefault(lp.route.src, []).append(lp)
    instances = []
    for node in sorted(by_node):
        lps = by_node[node]
        for start in range(0, len(lps), n_lines):
            group = lps[start:start + n_lines]
            line_ids = tuple(lp.id for lp in group) + (None,) * (n_lines - len(group))
            instances.append(MwsInstance(
                id=f"flex-{node}-{start // n_lines}", terminal_node=node,
                fsr_mode="flexible", n_lines=n_lines,
                line_lightpath_ids=line_ids))
    return instances
