"""Command-line front end: transmitter sweeps, planning studies and the cost
analysis, all emitting deterministic CSV (header plus a leading comment line
that records the resolved configuration)."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import traceback

from . import metrics as metrics_mod
from . import netgraph, phys, planner, txmodel
from .errors import CombPlanError

DEFAULT_ART_GRID = (20.0, 200.0, 10.0)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


class UsageError(CombPlanError):
    pass


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return format(value, ".10g")
    return str(value)


def _write_csv(path, header: list[str], rows, config: dict) -> None:
    out = open(path, "w", newline="", encoding="utf-8") if path != "-" else sys.stdout
    try:
        out.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if out is not sys.stdout:
            out.close()


def read_csv_rows(path: str) -> list[dict]:
    """Read one of this tool's CSV files, skipping comment lines."""
    with open(path, encoding="utf-8") as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# -- txosnr ----------------------------------------------------------------

_SWEEP_DEFAULTS = {"p_line": (-20.0, 0.0, 0.5), "ocnr": (35.0, 55.0, 0.5)}
_SWEEP_VARIABLE_MAP = {"p_line": "p_line_dbm", "ocnr": "ocnr_db"}


def cmd_txosnr(args) -> int:
    lo, hi, step = _SWEEP_DEFAULTS[args.sweep]
    lo = args.sweep_from if args.sweep_from is not None else lo
    hi = args.sweep_to if args.sweep_to is not None else hi
    step = args.step if args.step is not None else step
    if step <= 0 or hi < lo:
        raise UsageError("sweep range must be non-empty with positive step")
    points = txmodel.sweep_tx_osnr(
        _SWEEP_VARIABLE_MAP[args.sweep], lo, hi, step,
        ocnr_db=args.ocnr, p_line_dbm=args.p_line)
    config = {"command": "txosnr", "sweep": args.sweep, "from": lo, "to": hi,
              "step": step, "ocnr_db": args.ocnr, "p_line_dbm": args.p_line}
    rows = [(args.sweep, p.x_value, p.architecture, p.n_lines,
             round(p.osnr_tx_db, 6), p.clamped) for p in points]
    _write_csv(args.out, ["x_variable", "x_value", "architecture", "n_lines",
                          "osnr_tx_db", "clamped"], rows, config)
    return EXIT_OK


# -- scenario engine (plan / sweep) ------------------------------------------

def _resolve_topology(name_or_path: str) -> netgraph.Topology:
    if name_or_path in netgraph.BUNDLED_TOPOLOGIES:
        return netgraph.load_bundled(name_or_path)
    if not os.path.exists(name_or_path):
        raise UsageError(f"topology {name_or_path!r} is neither bundled nor a file")
    return netgraph.load_topology(name_or_path)


def _art_points(art) -> list[float]:
    if isinstance(art, list):
        pts = [float(a) for a in art]
    else:
        lo, hi, step = float(art["min"]), float(art["max"]), float(art["step"])
        if step <= 0 or hi < lo:
            raise UsageError("ART grid must be non-empty with positive step")
        pts = []
        x = lo
        while x <= hi + 1e-9:
            pts.append(round(x, 9))
            x += step
    if not pts or min(pts) <= 0:
        raise UsageError("ART points must be positive")
    return pts


def _policy_from_dict(raw: dict, base_osnr: float, k: int) -> planner.PlannerPolicy:
    mode = raw.get("mode")
    try:
        if mode == planner.SWS_MODE:
            return planner.sws_policy(base_osnr_tx_db=base_osnr, k=k)
        if mode == planner.FIXED_FSR_MODE:
            return planner.fixed_fsr_policy(
                n_lines=int(raw["n_lines"]), n_cutoff=int(raw["n_cutoff"]),
                penalty_db=float(raw.get("penalty_db", 1.0)),
                base_osnr_tx_db=base_osnr, k=k)
        if mode == planner.FLEXIBLE_FSR_MODE:
            return planner.flexible_fsr_policy(
                penalty_db=float(raw.get("penalty_db", 1.0)),
                n_lines=int(raw.get("n_lines", 4)),
                base_osnr_tx_db=base_osnr, k=k)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad policy entry {raw}: {exc}") from exc
    raise UsageError(f"unknown policy mode {mode!r}")


def _policy_sort_key(policy: planner.PlannerPolicy):
    mode_rank = {planner.SWS_MODE: 0, planner.FIXED_FSR_MODE: 1,
                 planner.FLEXIBLE_FSR_MODE: 2}[policy.mode]
    return (mode_rank, policy.n_lines, policy.n_cutoff, policy.osnr_tx_penalty_db)


def _policy_columns(policy: planner.PlannerPolicy):
    if policy.mode == planner.SWS_MODE:
        return ("", "", 0.0)
    if policy.mode == planner.FLEXIBLE_FSR_MODE:
        return (policy.n_lines, "", policy.osnr_tx_penalty_db)
    return (policy.n_lines, policy.n_cutoff, policy.osnr_tx_penalty_db)


METRICS_HEADER = ["topology", "policy", "n_lines", "n_cutoff", "penalty_db",
                  "art_tbps", "provisioned_tbps", "lp_count", "ws_count",
                  "up_ratio", "extra_lp_ratio", "fallback_count"]


def run_scenarios(config: dict, collect_lightpaths: bool = False,
                  collect_grid: bool = False):
    """All (policy x ART) planning runs of one scenario configuration.

    Returns (metrics_rows, lightpath_rows, grid_rows), each deterministically
    sorted. A configured sws policy doubles as the extra-LP baseline.
    """
    topo = _resolve_topology(config["topology"])
    art_points = _art_points(config.get("art_tbps",
                                        {"min": DEFAULT_ART_GRID[0],
                                         "max": DEFAULT_ART_GRID[1],
                                         "step": DEFAULT_ART_GRID[2]}))
    base_osnr = float(config.get("base_osnr_tx_db", 36.0))
    k = int(config.get("k", 3))
    fiber = phys.FiberParams(**config.get("fiber", {}))
    policies = [_policy_from_dict(p, base_osnr, k) for p in config.get("policies", [])]
    if not policies:
        raise UsageError("config contains no policies")
    policies.sort(key=_policy_sort_key)

    base_demands = netgraph.generate_demands(topo)
    routes_cache: dict = {}
    terms_cache: dict = {}

    metric_rows = []
    lightpath_rows = []
    grid_rows = []
    for art in art_points:
        demands = netgraph.scale_demands(base_demands, art)
        baseline = None
        results = []
        for policy in policies:
            result, engine = planner.plan(topo, demands, policy, fiber=fiber,
                                          routes=routes_cache,
                                          terms_cache=terms_cache)
            if policy.mode == planner.SWS_MODE and baseline is None:
                baseline = result
            results.append((policy, result, engine))
        for policy, result, engine in results:
            m = metrics_mod.scenario_metrics(art, demands, result, policy,
                                             baseline=baseline)
            n_lines, n_cutoff, penalty = _policy_columns(policy)
            metric_rows.append((topo.name, policy.mode, n_lines, n_cutoff,
                                penalty, art, round(m.provisioned_tbps, 6),
                                m.lp_count, m.ws_count, round(m.up_ratio, 9),
                                None if m.extra_lp_ratio is None else round(m.extra_lp_ratio, 9),
                                m.fallback_count))
            if collect_lightpaths:
                for lp in result.lightpaths:
                    src_kind = lp.source[0]
                    mws_id = lp.source[1] if src_kind == "mws" else ""
                    line_idx = lp.source[2] if src_kind == "mws" else ""
                    lightpath_rows.append((
                        policy.mode, n_lines, n_cutoff, penalty, art, lp.id,
                        lp.demand_id, lp.route.src, lp.route.dst,
                        "-".join(str(n) for n in lp.route.nodes),
                        lp.config.symbol_rate_gbd, lp.config.modulation,
                        lp.block.start_slot, lp.block.width_slots,
                        lp.data_rate_gbps, round(lp.snr.snr_total_db, 6),
                        lp.config.required_snr_db, src_kind, mws_id, line_idx))
            if collect_grid:
                for link_id, slot, state, owner in engine.grid.dump_rows():
                    grid_rows.append((policy.mode, n_lines, n_cutoff, penalty,
                                      art, link_id, slot, state, owner))

    def scenario_key(row):
        policy, n_lines, n_cutoff, penalty = row[0], row[1], row[2], row[3]
        return (policy, n_lines if n_lines != "" else -1,
                n_cutoff if n_cutoff != "" else -1, penalty, row[4])

    metric_rows.sort(key=lambda r: scenario_key(r[1:]))
    lightpath_rows.sort(key=lambda r: scenario_key(r) + tuple(r[5:7]))
    grid_rows.sort(key=lambda r: scenario_key(r) + tuple(r[5:7]))
    return metric_rows, lightpath_rows, grid_rows


LIGHTPATH_HEADER = ["policy", "n_lines", "n_cutoff", "penalty_db", "art_tbps",
                    "lp_id", "demand_id", "src", "dst", "route_nodes",
                    "symbol_rate_gbd", "modulation", "start_slot", "width_slots",
                    "data_rate_gbps", "snr_total_db", "required_snr_db",
                    "source_kind", "mws_id", "line_index"]

GRID_HEADER = ["policy", "n_lines", "n_cutoff", "penalty_db", "art_tbps",
               "link_id", "slot", "state", "owner"]


def cmd_plan(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if args.topology:
        config["topology"] = args.topology
    return _run_and_write(config, args)


def _run_and_write(config: dict, args) -> int:
    os.makedirs(args.out, exist_ok=True)
    metric_rows, lightpath_rows, grid_rows = run_scenarios(
        config, collect_lightpaths=args.dump_plan, collect_grid=args.dump_grid)
    _write_csv(os.path.join(args.out, "metrics.csv"), METRICS_HEADER,
               metric_rows, config)
    if args.dump_plan:
        _write_csv(os.path.join(args.out, "lightpaths.csv"), LIGHTPATH_HEADER,
                   lightpath_rows, config)
    if args.dump_grid:
        _write_csv(os.path.join(args.out, "grid.csv"), GRID_HEADER,
                   grid_rows, config)
    return EXIT_OK


def _parse_grid(text: str, what: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad {what} grid {text!r}, expected lo:hi:step") from exc
    return lo, hi, step


def cmd_sweep(args) -> int:
    lo, hi, step = _parse_grid(args.art, "ART")
    policies: list[dict] = [{"mode": "sws"}]
    if args.study in ("flexible", "all"):
        for pen in args.penalties:
            policies.append({"mode": "flexible_fsr", "penalty_db": pen,
                             "n_lines": args.n_lines})
    if args.study in ("fixed", "all"):
        cutoffs = args.cutoffs or list(range(1, args.n_lines + 1))
        for cutoff in cutoffs:
            policies.append({"mode": "fixed_fsr", "n_lines": args.n_lines,
                             "n_cutoff": cutoff,
                             "penalty_db": args.fixed_penalty})
    config = {"topology": args.topology,
              "art_tbps": {"min": lo, "max": hi, "step": step},
              "policies": policies}
    return _run_and_write(config, args)


# -- cost ---------------------------------------------------------------------

def cmd_cost(args) -> int:
    lo, hi, step = _parse_grid(args.s_grid, "laser-share")
    if step <= 0 or hi < lo or lo <= 0 or hi >= 1:
        raise UsageError("laser-share grid must lie inside (0, 1)")
    shares = []
    s = lo
    while s <= hi + 1e-9:
        shares.append(round(s, 9))
        s += step

    baseline_rows = [r for r in read_csv_rows(args.baseline) if r["policy"] == "sws"]
    if not baseline_rows:
        raise UsageError(f"{args.baseline} contains no sws baseline rows")
    base_lp = {(r["topology"], r["art_tbps"]): int(r["lp_count"]) for r in baseline_rows}

    mws_rows = [r for r in read_csv_rows(args.mws) if r["policy"] != "sws"]
    if not mws_rows:
        raise UsageError(f"{args.mws} contains no MWS scenario rows")
    groups: dict = {}
    for r in mws_rows:
        key = (r["topology"], r["n_lines"], r["penalty_db"])
        art_key = (r["topology"], r["art_tbps"])
        if art_key not in base_lp:
            raise UsageError(f"no baseline row for ART {r['art_tbps']} Tbit/s")
        agg = groups.setdefault(key, {"sws_lp": 0, "mws_lp": 0, "mws": 0})
        agg["sws_lp"] += base_lp[art_key]
        agg["mws_lp"] += int(r["lp_count"])
        agg["mws"] += int(r["ws_count"])

    rows = []
    for s in shares:
        for (topology, n_lines, penalty), agg in sorted(groups.items()):
            if agg["mws"] == 0:
                rows.append((s, topology, n_lines, penalty, "never_viable"))
                continue
            multiple = metrics_mod.max_mws_block_cost(
                agg["sws_lp"], agg["mws_lp"], agg["mws"], s)
            rows.append((s, topology, n_lines, penalty,
                         "never_viable" if multiple is None else round(multiple, 6)))
    config = {"command": "cost", "baseline": args.baseline, "mws": args.mws,
              "s_grid": args.s_grid}
    _write_csv(args.out, ["s", "topology", "n_lines", "penalty_db",
                          "max_block_cost_multiple"], rows, config)
    return EXIT_OK


# -- entry point ---------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combplan",
        description="Physical-layer-aware planning studies for optical networks "
                    "with single- and multi-wavelength-source transmitters.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_tx = sub.add_parser("txosnr", help="transmit-OSNR sweep CSV")
    p_tx.add_argument("--sweep", choices=("p_line", "ocnr"), required=True)
    p_tx.add_argument("--from", dest="sweep_from", type=float, default=None)
    p_tx.add_argument("--to", dest="sweep_to", type=float, default=None)
    p_tx.add_argument("--step", type=float, default=None)
    p_tx.add_argument("--ocnr", type=float, default=45.0,
                      help="fixed OCNR per line when sweeping power")
    p_tx.add_argument("--p-line", type=float, default=-10.0,
                      help="fixed per-line power when sweeping OCNR")
    p_tx.add_argument("--out", default="-")
    p_tx.set_defaults(func=cmd_txosnr)

    p_plan = sub.add_parser("plan", help="run the scenarios of a config file")
    p_plan.add_argument("--config", required=True)
    p_plan.add_argument("--topology", default=None,
                        help="override the config's topology")
    p_plan.add_argument("--out", default="out")
    p_plan.add_argument("--dump-plan", action="store_true")
    p_plan.add_argument("--dump-grid", action="store_true")
    p_plan.set_defaults(func=cmd_plan)

    p_sweep = sub.add_parser("sweep", help="run a canned study over an ART grid")
    p_sweep.add_argument("--topology", required=True,
                         help="bundled name (nobel-germany, nobel-eu) or file path")
    p_sweep.add_argument("--study", choices=("flexible", "fixed", "all"),
                         default="flexible")
    p_sweep.add_argument("--n-lines", type=int, default=4)
    p_sweep.add_argument("--penalties", type=_float_list, default=[1.0, 3.0, 5.0])
    p_sweep.add_argument("--cutoffs", type=_int_list, default=None)
    p_sweep.add_argument("--fixed-penalty", type=float, default=1.0)
    p_sweep.add_argument("--art", default="20:200:10")
    p_sweep.add_argument("--out", default="out")
    p_sweep.add_argument("--dump-plan", action="store_true")
    p_sweep.add_argument("--dump-grid", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cost = sub.add_parser("cost", help="maximum viable MWS block cost CSV")
    p_cost.add_argument("--baseline", required=True,
                        help="metrics CSV containing the sws rows")
    p_cost.add_argument("--mws", required=True,
                        help="metrics CSV containing the MWS scenario rows")
    p_cost.add_argument("--s-grid", default="0.1:0.6:0.05")
    p_cost.add_argument("--out", default="-")
    p_cost.set_defaults(func=cmd_cost)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CombPlanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
