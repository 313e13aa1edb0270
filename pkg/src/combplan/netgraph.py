"""Topology model, JSON ingestion, k-shortest-path routing and traffic demands.

Link lengths come from the topology file when present; otherwise they are
derived from node coordinates as great-circle distance times a 1.2 routing
factor. Every link is divided into 80 km amplifier spans (the final span
takes the remainder).
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, replace
from importlib import resources

from .errors import TopologyError

SPAN_LENGTH_KM = 80.0
ROUTING_FACTOR = 1.2
EARTH_RADIUS_KM = 6371.0

BUNDLED_TOPOLOGIES = ("nobel-germany", "nobel-eu")


@dataclass(frozen=True)
class Node:
    id: int
    name: str
    latitude: float
    longitude: float
    traffic_weight: float = 1.0


@dataclass(frozen=True)
class Link:
    a: int
    b: int
    length_km: float
    span_count: int

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.a, self.b)


@dataclass(frozen=True)
class Topology:
    name: str
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]

    def adjacency(self) -> dict[int, list[tuple[int, float, int]]]:
        """node -> sorted [(neighbor, length_km, link_index)]."""
        adj: dict[int, list[tuple[int, float, int]]] = {n.id: [] for n in self.nodes}
        for idx, link in enumerate(self.links):
            adj[link.a].append((link.b, link.length_km, idx))
            adj[link.b].append((link.a, link.length_km, idx))
        for lst in adj.values():
            lst.sort()
        return adj

    def link_index(self) -> dict[tuple[int, int], int]:
        return {(min(l.a, l.b), max(l.a, l.b)): i for i, l in enumerate(self.links)}


@dataclass(frozen=True)
class Demand:
    id: int
    src: int
    dst: int
    requested_gbps: float


@dataclass(frozen=True)
class RoutePath:
    nodes: tuple[int, ...]
    link_ids: tuple[int, ...]
    link_lengths_km: tuple[float, ...]
    total_length_km: float
    total_span_count: int

    @property
    def src(self) -> int:
        return self.nodes[0]

    @property
    def dst(self) -> int:
        return self.nodes[-1]


def great_circle_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, l1, p2, l2 = map(math.radians, (lat1, lon1, lat2, lon2))
    h = (math.sin((p2 - p1) / 2) ** 2
         + math.cos(p1) * math.cos(p2) * math.sin((l2 - l1) / 2) ** 2)
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def span_count_for(length_km: float) -> int:
    return max(1, math.ceil(length_km / SPAN_LENGTH_KM - 1e-9))


def parse_topology(data: dict, name: str = "") -> Topology:
    """Validate a parsed topology document and return the immutable Topology."""
    if not isinstance(data, dict) or "nodes" not in data or "links" not in data:
        raise TopologyError("topology document needs 'nodes' and 'links' arrays")
    name = data.get("name") or name or "unnamed"

    nodes = []
    seen_ids = set()
    for i, raw in enumerate(data["nodes"]):
        try:
            nid = int(raw["id"])
            node = Node(id=nid, name=str(raw.get("name", nid)),
                        latitude=float(raw.get("lat", 0.0)),
                        longitude=float(raw.get("lon", 0.0)),
                        traffic_weight=float(raw.get("weight", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"nodes[{i}]: {exc}") from exc
        if node.id in seen_ids:
            raise TopologyError(f"nodes[{i}]: duplicate node id {node.id}")
        if node.traffic_weight < 0:
            raise TopologyError(f"nodes[{i}]: negative traffic weight")
        seen_ids.add(node.id)
        nodes.append(node)
    if not nodes:
        raise TopologyError("topology has no nodes")
    if seen_ids != set(range(len(nodes))):
        raise TopologyError("node ids must be dense from 0")
    nodes.sort(key=lambda n: n.id)
    by_id = {n.id: n for n in nodes}

    links = []
    seen_pairs = set()
    for i, raw in enumerate(data["links"]):
        try:
            a, b = int(raw["a"]), int(raw["b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"links[{i}]: {exc}") from exc
        if a == b:
            raise TopologyError(f"links[{i}]: self-loop at node {a}")
        if a not in by_id or b not in by_id:
            raise TopologyError(f"links[{i}]: unknown endpoint")
        a, b = min(a, b), max(a, b)
        if (a, b) in seen_pairs:
            raise TopologyError(f"links[{i}]: parallel link {a}-{b}")
        seen_pairs.add((a, b))
        if "length_km" in raw and raw["length_km"] is not None:
            length = float(raw["length_km"])
        else:
            na, nb = by_id[a], by_id[b]
            length = round(great_circle_km(na.latitude, na.longitude,
                                           nb.latitude, nb.longitude) * ROUTING_FACTOR, 1)
        if length <= 0:
            raise TopologyError(f"links[{i}]: non-positive length {length}")
        links.append(Link(a=a, b=b, length_km=length,
                          span_count=span_count_for(length)))
    if not links:
        raise TopologyError("topology has no links")
    links.sort(key=lambda l: (l.a, l.b))

    topo = Topology(name=name, nodes=tuple(nodes), links=tuple(links))
    _check_connected(topo)
    return topo


def _check_connected(topo: Topology) -> None:
    adj = topo.adjacency()
    seen = {topo.nodes[0].id}
    stack = [topo.nodes[0].id]
    while stack:
        u = stack.pop()
        for v, _, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if len(seen) != len(topo.nodes):
        missing = sorted(n.id for n in topo.nodes if n.id not in seen)
        raise TopologyError(f"graph is disconnected; unreachable nodes {missing}")


def load_topology(path: str) -> Topology:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    return parse_topology(data, name=str(path))


def load_bundled(name: str) -> Topology:
    if name not in BUNDLED_TOPOLOGIES:
        raise TopologyError(f"no bundled topology {name!r}; have {BUNDLED_TOPOLOGIES}")
    text = resources.files("combplan.data").joinpath(f"{name}.json").read_text("utf-8")
    return parse_topology(json.loads(text), name=name)


def _route_from_nodes(topo: Topology, node_seq: tuple[int, ...]) -> RoutePath:
    index = topo.link_index()
    link_ids = []
    lengths = []
    for u, v in zip(node_seq, node_seq[1:]):
        li = index[(min(u, v), max(u, v))]
        link_ids.append(li)
        lengths.append(topo.links[li].length_km)
    return RoutePath(nodes=node_seq, link_ids=tuple(link_ids),
                     link_lengths_km=tuple(lengths),
                     total_length_km=sum(lengths),
                     total_span_count=sum(topo.links[li].span_count for li in link_ids))


def _dijkstra(adj, src: int, dst: int, banned_nodes=frozenset(), banned_edges=frozenset()):
    """Shortest path by (length, node sequence); returns (length, nodes) or None.

    Heap keys carry the full node sequence so equal-length paths resolve to the
    lexicographically smallest one, which keeps routing fully deterministic.
    """
    visited = set()
    heap = [(0.0, (src,))]
    while heap:
        dist, path = heapq.heappop(heap)
        u = path[-1]
        if u in visited:
            continue
        visited.add(u)
        if u == dst:
            return dist, path
        for v, w, _ in adj.get(u, ()):
            if v in visited or v in banned_nodes or (u, v) in banned_edges:
                continue
            heapq.heappush(heap, (dist + w, path + (v,)))
    return None


def k_shortest_paths(topo: Topology, src: int, dst: int, k: int) -> list[RoutePath]:
    """Up to k loop-free shortest paths, ordered by (length, node sequence)."""
    if src == dst:
        raise ValueError("src and dst must differ")
    if k < 1:
        return []
    adj = topo.adjacency()
    first = _dijkstra(adj, src, dst)
    if first is None:
        return []
    accepted = [first]
    candidates: list[tuple[float, tuple[int, ...]]] = []
    candidate_set = set()

    while len(accepted) < k:
        _, prev_path = accepted[-1]
        for i in range(len(prev_path) - 1):
            root = prev_path[:i + 1]
            root_len = 0.0
            for u, v in zip(root, root[1:]):
                root_len += next(w for (n, w, _) in adj[u] if n == v)
            banned_edges = set()
            for _, p in accepted:
                if len(p) > i + 1 and p[:i + 1] == root:
                    banned_edges.add((p[i], p[i + 1]))
            banned_nodes = frozenset(root[:-1])
            spur = _dijkstra(adj, root[-1], dst, banned_nodes, frozenset(banned_edges))
            if spur is None:
                continue
            total = (root_len + spur[0], root + spur[1][1:])
            if total[1] not in candidate_set and all(total[1] != p for _, p in accepted):
                candidate_set.add(total[1])
                heapq.heappush(candidates, total)
        if not candidates:
            break
        accepted.append(heapq.heappop(candidates))

    return [_route_from_nodes(topo, path) for _, path in accepted]


def generate_demands(topo: Topology) -> list[Demand]:
    """One demand per node pair with positive weight product, magnitude w_i * w_j.

    The returned requested_gbps values are relative magnitudes; scale_demands
    turns them into absolute rates.
    """
    weights = {n.id: n.traffic_weight for n in topo.nodes}
    demands = []
    ids = sorted(weights)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            magnitude = weights[a] * weights[b]
            if magnitude > 0:
                demands.append(Demand(id=len(demands), src=a, dst=b,
                                      requested_gbps=magnitude))
    if not demands:
        raise ValueError("all traffic weights are zero; no demands to generate")
    return demands


def scale_demands(demands: list[Demand], art_tbps: float) -> list[Demand]:
    """Scale all demands by one factor so they sum to the requested ART."""
    if art_tbps <= 0:
        raise ValueError("ART must be > 0")
    total = sum(d.requested_gbps for d in demands)
    factor = art_tbps * 1000.0 / total
    return [replace(d, requested_gbps=d.requested_gbps * factor) for d in demands]
