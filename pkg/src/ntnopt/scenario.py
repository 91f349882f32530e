"""Scenario configuration, seeding, the experiment sweep, and resume logic.

Configs are TOML with `schema = 1`; unknown keys are hard errors so a typo
cannot silently change a sweep. One sweep point is the full pipeline:
seeded traffic -> 5QI/NQI mapping and per-gNB aggregation -> slices ->
MILP -> redistribution -> metrics CSV row. Points run in a canonical
order (seed, condition, flows_per_ue, weights) and completed rows are
skipped on resume, keyed by (condition, flows_per_ue, w_f, seed).
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import metrics as metrics_mod
from .constellation import GeoPoint, Topology, WalkerParams, build_topology
from .milp import (
    OptimizationWeights,
    Solution,
    SolveOptions,
    build_model,
    solve,
)
from .qos import MappingCondition, aggregate_at_gnb, generate_traffic
from .slicing import SlicePolicy, assign_slice_edges, build_slices, routable_slices

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Configuration schema violation; message names the offending field."""


# ---------------------------------------------------------------------------
# Config model


@dataclass(frozen=True)
class ScenarioConfig:
    walker: WalkerParams
    ogs_sites: tuple[GeoPoint, ...]
    gnb_sites: tuple[GeoPoint, ...]
    user_capacity_bps: float
    isl_capacity_bps: float
    feeder_capacity_bps: float
    min_elevation_deg: float
    close_seam: bool
    ues_per_gnb: int
    flows_per_ue: tuple[int, ...]
    demand_per_flow_bps: float
    seeds: tuple[int, ...]
    conditions: tuple[int | str, ...]
    custom_conditions: dict[str, MappingCondition]
    slice_policy: SlicePolicy
    weights: tuple[tuple[float, float], ...]
    solve_options: SolveOptions
    end_to_end_latency: bool
    csv_path: Path
    flow_detail_path: Path | None

    def condition_object(self, cond: int | str) -> MappingCondition:
        if isinstance(cond, int):
            return MappingCondition.builtin(cond)
        return self.custom_conditions[cond]

    def semantic_dict(self) -> dict:
        """Everything that affects results (output paths excluded)."""
        return {
            "schema": SCHEMA_VERSION,
            "walker": {
                "num_planes": self.walker.num_planes,
                "sats_per_plane": self.walker.sats_per_plane,
                "altitude_m": self.walker.altitude_m,
                "inclination_deg": self.walker.inclination_deg,
                "raan_spread_deg": self.walker.raan_spread_deg,
                "phase_offset_deg": self.walker.phase_offset_deg,
                "epoch_s": self.walker.epoch_s,
            },
            "ogs": [[p.latitude_deg, p.longitude_deg, p.altitude_m] for p in self.ogs_sites],
            "gnbs": [[p.latitude_deg, p.longitude_deg, p.altitude_m] for p in self.gnb_sites],
            "network": [
                self.user_capacity_bps,
                self.isl_capacity_bps,
                self.feeder_capacity_bps,
                self.min_elevation_deg,
                self.close_seam,
            ],
            "traffic": [
                self.ues_per_gnb,
                list(self.flows_per_ue),
                self.demand_per_flow_bps,
                list(self.seeds),
            ],
            "conditions": [str(c) for c in self.conditions],
            "custom": {
                name: sorted(c.table.items()) for name, c in self.custom_conditions.items()
            },
            "policy": [sorted(g) for g in self.slice_policy.groups],
            "weights": [list(w) for w in self.weights],
            "solver": [
                self.solve_options.time_limit_s,
                self.solve_options.node_limit,
                self.solve_options.abs_gap,
                self.solve_options.rel_gap,
                self.solve_options.int_tol,
                self.solve_options.lp_backend,
            ],
            "end_to_end_latency": self.end_to_end_latency,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"{path}.{key}: missing required key")
    return table[key]


def _check_keys(table: dict, allowed: set[str], path: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")


def _number(v, path: str, positive=False, nonnegative=False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}: must be > 0, got {v}")
    if nonnegative and v < 0:
        raise ConfigError(f"{path}: must be >= 0, got {v}")
    return float(v)


def _int(v, path: str, positive=False) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}: must be > 0, got {v}")
    return v


def _site(table: dict, path: str) -> GeoPoint:
    _check_keys(table, {"name", "latitude_deg", "longitude_deg", "altitude_m"}, path)
    try:
        return GeoPoint(
            latitude_deg=_number(_require(table, "latitude_deg", path), f"{path}.latitude_deg"),
            longitude_deg=_number(_require(table, "longitude_deg", path), f"{path}.longitude_deg"),
            altitude_m=_number(table.get("altitude_m", 0.0), f"{path}.altitude_m", nonnegative=True),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def uniform_sphere_sites(count: int, seed: int) -> list[GeoPoint]:
    """Seeded uniform-on-sphere gNB placement."""
    rng = np.random.default_rng(seed)
    sites = []
    for _ in range(count):
        z = float(rng.uniform(-1.0, 1.0))
        lon = float(rng.uniform(-180.0, 180.0))
        lat = math.degrees(math.asin(z))
        if lon >= 180.0:
            lon -= 360.0
        sites.append(GeoPoint(lat, lon, 0.0))
    return sites


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: not valid TOML: {exc}") from None
    return parse_config(raw, base_dir=path.parent)


def parse_config(raw: dict, base_dir: Path = Path(".")) -> ScenarioConfig:
    _check_keys(
        raw,
        {"schema", "walker", "network", "ogs", "gnbs", "traffic", "mapping",
         "slices", "optimize", "output"},
        "config",
    )
    schema = _require(raw, "schema", "config")
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"schema: expected {SCHEMA_VERSION}, got {schema!r}")

    w = _require(raw, "walker", "config")
    _check_keys(
        w,
        {"num_planes", "sats_per_plane", "altitude_km", "inclination_deg",
         "raan_spread_deg", "phase_offset_deg", "epoch_s"},
        "walker",
    )
    try:
        walker = WalkerParams(
            num_planes=_int(_require(w, "num_planes", "walker"), "walker.num_planes", positive=True),
            sats_per_plane=_int(
                _require(w, "sats_per_plane", "walker"), "walker.sats_per_plane", positive=True
            ),
            altitude_m=_number(_require(w, "altitude_km", "walker"), "walker.altitude_km", positive=True) * 1000.0,
            inclination_deg=_number(_require(w, "inclination_deg", "walker"), "walker.inclination_deg"),
            raan_spread_deg=_number(w.get("raan_spread_deg", 180.0), "walker.raan_spread_deg"),
            phase_offset_deg=_number(w.get("phase_offset_deg", 0.0), "walker.phase_offset_deg"),
            epoch_s=_number(w.get("epoch_s", 0.0), "walker.epoch_s"),
        )
    except ValueError as exc:
        raise ConfigError(f"walker: {exc}") from None

    net = _require(raw, "network", "config")
    _check_keys(
        net,
        {"user_capacity_mbps", "isl_capacity_mbps", "feeder_capacity_mbps",
         "min_elevation_deg", "close_seam"},
        "network",
    )
    user_cap = _number(_require(net, "user_capacity_mbps", "network"),
                       "network.user_capacity_mbps", positive=True) * 1e6
    isl_cap = _number(_require(net, "isl_capacity_mbps", "network"),
                      "network.isl_capacity_mbps", positive=True) * 1e6
    feeder_cap = _number(_require(net, "feeder_capacity_mbps", "network"),
                         "network.feeder_capacity_mbps", positive=True) * 1e6
    min_elev = _number(net.get("min_elevation_deg", 10.0), "network.min_elevation_deg")
    close_seam = net.get("close_seam", True)
    if not isinstance(close_seam, bool):
        raise ConfigError("network.close_seam: expected a boolean")

    ogs_raw = _require(raw, "ogs", "config")
    if not isinstance(ogs_raw, list) or not ogs_raw:
        raise ConfigError("ogs: expected a nonempty array of tables")
    ogs_sites = tuple(_site(t, f"ogs[{i}]") for i, t in enumerate(ogs_raw))

    g = _require(raw, "gnbs", "config")
    _check_keys(g, {"count", "placement_seed", "sites"}, "gnbs")
    if "sites" in g:
        if "count" in g or "placement_seed" in g:
            raise ConfigError("gnbs: give either explicit sites or count+placement_seed, not both")
        sites_raw = g["sites"]
        if not isinstance(sites_raw, list) or not sites_raw:
            raise ConfigError("gnbs.sites: expected a nonempty array of tables")
        gnb_sites = tuple(_site(t, f"gnbs.sites[{i}]") for i, t in enumerate(sites_raw))
    else:
        count = _int(_require(g, "count", "gnbs"), "gnbs.count", positive=True)
        seed = _int(_require(g, "placement_seed", "gnbs"), "gnbs.placement_seed")
        gnb_sites = tuple(uniform_sphere_sites(count, seed))

    tr = _require(raw, "traffic", "config")
    _check_keys(tr, {"ues_per_gnb", "flows_per_ue", "demand_per_flow_mbps", "seeds"}, "traffic")
    ues = _int(_require(tr, "ues_per_gnb", "traffic"), "traffic.ues_per_gnb", positive=True)
    fpu_raw = _require(tr, "flows_per_ue", "traffic")
    if not isinstance(fpu_raw, list) or not fpu_raw:
        raise ConfigError("traffic.flows_per_ue: expected a nonempty list")
    flows_per_ue = tuple(_int(v, f"traffic.flows_per_ue[{i}]", positive=True)
                         for i, v in enumerate(fpu_raw))
    demand = _number(_require(tr, "demand_per_flow_mbps", "traffic"),
                     "traffic.demand_per_flow_mbps", positive=True) * 1e6
    seeds_raw = _require(tr, "seeds", "traffic")
    if not isinstance(seeds_raw, list) or not seeds_raw:
        raise ConfigError("traffic.seeds: expected a nonempty list")
    seeds = tuple(_int(v, f"traffic.seeds[{i}]") for i, v in enumerate(seeds_raw))

    mp = _require(raw, "mapping", "config")
    _check_keys(mp, {"conditions", "custom"}, "mapping")
    custom: dict[str, MappingCondition] = {}
    for i, t in enumerate(mp.get("custom", [])):
        _check_keys(t, {"name", "pairs"}, f"mapping.custom[{i}]")
        name = _require(t, "name", f"mapping.custom[{i}]")
        pairs_raw = _require(t, "pairs", f"mapping.custom[{i}]")
        try:
            pairs = {int(k): int(v) for k, v in pairs_raw.items()}
            custom[name] = MappingCondition.custom(name, pairs)
        except (ValueError, AttributeError) as exc:
            raise ConfigError(f"mapping.custom[{i}].pairs: {exc}") from None
    conds_raw = _require(mp, "conditions", "mapping")
    if not isinstance(conds_raw, list) or not conds_raw:
        raise ConfigError("mapping.conditions: expected a nonempty list")
    conditions: list[int | str] = []
    for i, cond in enumerate(conds_raw):
        if isinstance(cond, int) and not isinstance(cond, bool):
            try:
                MappingCondition.builtin(cond)
            except ValueError as exc:
                raise ConfigError(f"mapping.conditions[{i}]: {exc}") from None
            conditions.append(cond)
        elif isinstance(cond, str):
            if cond not in custom:
                raise ConfigError(f"mapping.conditions[{i}]: no custom condition named {cond!r}")
            conditions.append(cond)
        else:
            raise ConfigError(f"mapping.conditions[{i}]: expected int or string, got {cond!r}")

    sl = raw.get("slices", {})
    _check_keys(sl, {"policy", "groups"}, "slices")
    policy_kind = sl.get("policy", "per_nqi")
    if policy_kind == "per_nqi":
        policy = SlicePolicy.per_nqi()
    elif policy_kind == "groups":
        groups_raw = _require(sl, "groups", "slices")
        try:
            policy = SlicePolicy(tuple(frozenset(int(v) for v in grp) for grp in groups_raw))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"slices.groups: {exc}") from None
    else:
        raise ConfigError(f"slices.policy: unknown policy {policy_kind!r}")

    op = _require(raw, "optimize", "config")
    _check_keys(
        op,
        {"weights", "abs_gap", "rel_gap", "int_tol", "lp_backend",
         "node_limit", "time_limit_s", "end_to_end_latency"},
        "optimize",
    )
    weights_raw = _require(op, "weights", "optimize")
    if not isinstance(weights_raw, list) or not weights_raw:
        raise ConfigError("optimize.weights: expected a nonempty list of [w_f, w_l] pairs")
    weights: list[tuple[float, float]] = []
    for i, pair in enumerate(weights_raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"optimize.weights[{i}]: expected a [w_f, w_l] pair")
        wf = _number(pair[0], f"optimize.weights[{i}][0]", nonnegative=True)
        wl = _number(pair[1], f"optimize.weights[{i}][1]", nonnegative=True)
        if abs(wf + wl - 1.0) > 1e-9:
            raise ConfigError(f"optimize.weights[{i}]: w_f + w_l must equal 1, got {wf} + {wl}")
        weights.append((wf, wl))
    lp_backend = op.get("lp_backend", "auto")
    if lp_backend not in ("auto", "dense", "highs"):
        raise ConfigError(f"optimize.lp_backend: expected auto|dense|highs, got {lp_backend!r}")
    time_limit = _number(op.get("time_limit_s", 0.0), "optimize.time_limit_s", nonnegative=True)
    node_limit = op.get("node_limit")
    if node_limit is not None:
        node_limit = _int(node_limit, "optimize.node_limit", positive=True)
    end_to_end = op.get("end_to_end_latency", False)
    if not isinstance(end_to_end, bool):
        raise ConfigError("optimize.end_to_end_latency: expected a boolean")
    solve_options = SolveOptions(
        time_limit_s=time_limit if time_limit > 0 else None,
        node_limit=node_limit,
        abs_gap=_number(op.get("abs_gap", 1e-6), "optimize.abs_gap", positive=True),
        rel_gap=_number(op.get("rel_gap", 0.0), "optimize.rel_gap", nonnegative=True),
        int_tol=_number(op.get("int_tol", 1e-6), "optimize.int_tol", positive=True),
        lp_backend=lp_backend,
    )

    out = _require(raw, "output", "config")
    _check_keys(out, {"csv", "flow_detail_jsonl"}, "output")
    csv_path = _require(out, "csv", "output")
    if not isinstance(csv_path, str) or not csv_path:
        raise ConfigError("output.csv: expected a nonempty path string")
    detail = out.get("flow_detail_jsonl", "")
    if not isinstance(detail, str):
        raise ConfigError("output.flow_detail_jsonl: expected a path string")

    return ScenarioConfig(
        walker=walker,
        ogs_sites=ogs_sites,
        gnb_sites=gnb_sites,
        user_capacity_bps=user_cap,
        isl_capacity_bps=isl_cap,
        feeder_capacity_bps=feeder_cap,
        min_elevation_deg=min_elev,
        close_seam=close_seam,
        ues_per_gnb=ues,
        flows_per_ue=flows_per_ue,
        demand_per_flow_bps=demand,
        seeds=seeds,
        conditions=tuple(conditions),
        custom_conditions=custom,
        slice_policy=policy,
        weights=tuple(weights),
        solve_options=solve_options,
        end_to_end_latency=end_to_end,
        csv_path=(base_dir / csv_path) if not Path(csv_path).is_absolute() else Path(csv_path),
        flow_detail_path=(
            ((base_dir / detail) if not Path(detail).is_absolute() else Path(detail))
            if detail else None
        ),
    )


# ---------------------------------------------------------------------------
# Pipeline


@dataclass
class PointResult:
    condition: int | str
    flows_per_ue: int
    w_f: float
    w_l: float
    seed: int
    metrics: metrics_mod.RunMetrics
    solution: Solution | None = None
    slices: list | None = None
    unrouted: list | None = None
    weights: OptimizationWeights | None = None
    outcomes: list | None = None

    def key(self) -> tuple[str, int, float, int]:
        return (str(self.condition), self.flows_per_ue, self.w_f, self.seed)


@dataclass
class RunRecord:
    config_hash: str
    topology: Topology
    points: list[PointResult] = field(default_factory=list)
    skipped: list[tuple] = field(default_factory=list)
    csv_path: Path | None = None


def build_scenario_topology(config: ScenarioConfig) -> Topology:
    return build_topology(
        config.walker,
        list(config.ogs_sites),
        list(config.gnb_sites),
        user_capacity_bps=config.user_capacity_bps,
        isl_capacity_bps=config.isl_capacity_bps,
        feeder_capacity_bps=config.feeder_capacity_bps,
        min_elevation_deg=config.min_elevation_deg,
        close_seam=config.close_seam,
    )


def run_point(
    config: ScenarioConfig,
    topology: Topology,
    condition: int | str,
    flows_per_ue: int,
    weight_pair: tuple[float, float],
    seed: int,
    keep_solutions: bool = False,
) -> PointResult:
    """Full pipeline for one sweep point."""
    cond = config.condition_object(condition)
    destinations = list(topology.ground_station_ids())
    flows = generate_traffic(
        n_gnbs=len(config.gnb_sites),
        ues_per_gnb=config.ues_per_gnb,
        flows_per_ue=flows_per_ue,
        demand_per_flow_bps=config.demand_per_flow_bps,
        destinations=destinations,
        rng_seed=seed,
    )

    ntn = []
    by_gnb: dict[int, list] = {}
    for f in flows:
        by_gnb.setdefault(f.gnb_id, []).append(f)
    for gnb_id in sorted(by_gnb):
        gnb_node = topology.gnb_ids()[gnb_id]
        cap = topology.user_link_of_gnb(gnb_node).capacity_bps
        ntn.extend(aggregate_at_gnb(by_gnb[gnb_id], cond, cap, id_start=len(ntn)))

    edges = assign_slice_edges(topology)
    slices = build_slices(ntn, config.slice_policy, edges)
    ok, unrouted = routable_slices(slices, topology)
    # Re-id the routable slices densely for the model.
    ok = [dataclasses.replace(s, id=i) for i, s in enumerate(ok)]

    w_f, w_l = weight_pair
    weights = OptimizationWeights.from_traffic(w_f, w_l, flows)
    model = build_model(ok, topology, weights)
    solution = solve(model, config.solve_options)

    outcomes = metrics_mod.redistribute(
        solution,
        ok,
        unrouted=unrouted,
        end_to_end=config.end_to_end_latency,
        topology=topology,
    )
    point_metrics = metrics_mod.run_metrics(solution, outcomes, weights, model.n_binaries)
    result = PointResult(
        condition=condition,
        flows_per_ue=flows_per_ue,
        w_f=w_f,
        w_l=w_l,
        seed=seed,
        metrics=point_metrics,
    )
    if keep_solutions:
        result.solution = solution
        result.slices = ok
        result.unrouted = unrouted
        result.weights = weights
        result.outcomes = outcomes
    return result


def sweep_points(config: ScenarioConfig) -> list[tuple]:
    """Canonical execution order: seeds, then conditions, flows, weights."""
    return [
        (cond, fpu, pair, seed)
        for seed in config.seeds
        for cond in config.conditions
        for fpu in config.flows_per_ue
        for pair in config.weights
    ]


def completed_keys(csv_path: Path) -> set[tuple[str, int, float, int]]:
    if not csv_path.exists():
        return set()
    keys = set()
    with csv_path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            keys.add(
                (row["condition"], int(row["flows_per_ue"]), float(row["w_f"]), int(row["seed"]))
            )
    return keys


def _point_task(args) -> "PointResult | Exception":
    config, topology, cond, fpu, pair, seed, keep = args
    try:
        return run_point(config, topology, cond, fpu, pair, seed, keep_solutions=keep)
    except Exception as exc:  # recorded in the row's status column by the caller
        return exc


def run_sweep(
    config: ScenarioConfig,
    jobs: int = 1,
    resume: bool = True,
    keep_solutions: bool = False,
    csv_path: Path | None = None,
) -> RunRecord:
    """Execute the sweep, appending one CSV row per point; per-point solver
    failures land in the status column instead of aborting the sweep."""
    topology = build_scenario_topology(config)
    record = RunRecord(config_hash=config.config_hash(), topology=topology)
    out_csv = Path(csv_path) if csv_path is not None else config.csv_path
    record.csv_path = out_csv

    done = completed_keys(out_csv) if resume else set()
    points = []
    for cond, fpu, pair, seed in sweep_points(config):
        key = (str(cond), fpu, pair[0], seed)
        if key in done:
            record.skipped.append(key)
            continue
        points.append((config, topology, cond, fpu, pair, seed, keep_solutions))

    def handle(result: PointResult | Exception, point) -> None:
        cond, fpu, pair, seed = point
        if isinstance(result, Exception):
            failed = metrics_mod.RunMetrics(
                sbar_f=float("nan"), sbar_l=float("nan"), J=float("nan"),
                J_flow_term=float("nan"), J_latency_term=float("nan"),
                solve_time_s=0.0, n_slices=0, n_binaries=0,
                status=f"error:{type(result).__name__}",
                n_flows=0, n_unrouted_flows=0,
            )
            result = PointResult(cond, fpu, pair[0], pair[1], seed, failed)
        row = metrics_mod.csv_row(
            result.condition, result.flows_per_ue, result.w_f, result.w_l,
            result.seed, result.metrics,
        )
        metrics_mod.append_csv_rows(out_csv, [row])
        if config.flow_detail_path is not None and result.outcomes is not None:
            metrics_mod.dump_flow_detail(
                config.flow_detail_path,
                {"condition": str(result.condition), "flows_per_ue": result.flows_per_ue,
                 "w_f": result.w_f, "w_l": result.w_l, "seed": result.seed},
                result.outcomes,
            )
        record.points.append(result)

    if jobs <= 1:
        for task in points:
            handle(_point_task(task), (task[2], task[3], task[4], task[5]))
    else:
        ctx = get_context("spawn")
        with ctx.Pool(processes=jobs) as pool:
            for task, result in zip(points, pool.imap(_point_task, points)):
                handle(result, (task[2], task[3], task[4], task[5]))
    return record
