"""Physical-layer-aware planning studies for optical networks built on
single- and multi-wavelength-source (optical frequency comb) transmitters."""

__version__ = "0.1.0"

from .netgraph import (Demand, Topology, generate_demands, k_shortest_paths,
                       load_bundled, load_topology, parse_topology, scale_demands)
from .phys import CONFIGS, FiberParams, TransceiverConfig
from .planner import (PlannerPolicy, PlanResult, Planner, fixed_fsr_policy,
                      flexible_fsr_policy, group_flexible_mws, plan, sws_policy)
from .txmodel import SourceSpec, mws_source, sws_source, tx_osnr

__all__ = [
    "Demand", "Topology", "generate_demands", "k_shortest_paths",
    "load_bundled", "load_topology", "parse_topology", "scale_demands",
    "CONFIGS", "FiberParams", "TransceiverConfig",
    "PlannerPolicy", "PlanResult", "Planner", "fixed_fsr_policy",
    "flexible_fsr_policy", "group_flexible_mws", "plan", "sws_policy",
    "SourceSpec", "mws_source", "sws_source", "tx_osnr",
]
