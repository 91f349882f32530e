"""Command-line entry point.

Subcommands: run (execute a sweep), topo (dump topology JSON), export-mps
(write one sweep point's model), validate (schema-check a config).
Exit codes: 0 success, 1 runtime failure, 2 bad usage or invalid config.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .constellation import TopologyError
from .milp import build_model, export_mps, OptimizationWeights
from .scenario import (
    ConfigError,
    ScenarioConfig,
    build_scenario_topology,
    load_config,
    run_sweep,
)


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ntnopt",
        description="5G-NTN slice mapping and joint flow/routing optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured sweep and write the CSV")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config's seed list with a single seed")
    p_run.add_argument("--time-limit", type=float, default=None,
                       help="per-point solver time limit in seconds")
    p_run.add_argument("--out", type=Path, default=None, help="override the CSV output path")
    p_run.add_argument("--jobs", type=int, default=1, help="worker processes for sweep points")
    p_run.add_argument("--no-resume", action="store_true",
                       help="recompute points already present in the CSV")

    p_topo = sub.add_parser("topo", help="dump the scenario topology as JSON")
    p_topo.add_argument("config", type=Path)
    p_topo.add_argument("--out", type=Path, default=None,
                        help="output file (default: stdout)")

    p_mps = sub.add_parser("export-mps", help="write one sweep point's model as an MPS file")
    p_mps.add_argument("config", type=Path)
    p_mps.add_argument("--point", required=True,
                       help="sweep point selector, e.g. cond=5,flows=20,w=0.5")
    p_mps.add_argument("--seed", type=int, default=None,
                       help="traffic seed (default: first config seed)")
    p_mps.add_argument("--out", type=Path, default=None,
                       help="output file (default: <config stem>_<point>.mps)")

    p_val = sub.add_parser("validate", help="check a config against the schema")
    p_val.add_argument("config", type=Path)
    return parser


def _apply_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seeds"] = (args.seed,)
    if getattr(args, "time_limit", None) is not None:
        changes["solve_options"] = dataclasses.replace(
            config.solve_options, time_limit_s=args.time_limit
        )
    return dataclasses.replace(config, **changes) if changes else config


def _parse_point(spec: str, config: ScenarioConfig):
    fields = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ConfigError(f"--point: expected key=value, got {part!r}")
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"cond", "flows", "w"}
    if unknown:
        raise ConfigError(f"--point: unknown key(s) {sorted(unknown)}")
    try:
        cond_raw = fields["cond"]
        cond = int(cond_raw) if cond_raw.isdigit() else cond_raw
        flows = int(fields["flows"])
        w_f = float(fields["w"])
    except KeyError as exc:
        raise ConfigError(f"--point: missing {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"--point: {exc}") from None
    if cond not in config.conditions:
        raise ConfigError(f"--point: condition {cond!r} is not in the config")
    if flows not in config.flows_per_ue:
        raise ConfigError(f"--point: flows={flows} is not in the config sweep")
    for pair in config.weights:
        if abs(pair[0] - w_f) < 1e-12:
            return cond, flows, pair
    raise ConfigError(f"--point: no weight pair with w_f={w_f} in the config")


def main(argv: list[str] | None = None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "validate":
            print(f"{args.config}: valid (hash {config.config_hash()})")
            return 0

        config = _apply_overrides(config, args)

        if args.command == "topo":
            topology = build_scenario_topology(config)
            doc = topology.to_json()
            if args.out is None:
                print(doc)
            else:
                args.out.parent.mkdir(parents=True, exist_ok=True)
                args.out.write_text(doc + "\n")
                print(f"wrote {args.out}")
            return 0

        if args.command == "export-mps":
            cond, flows, pair = _parse_point(args.point, config)
            seed = args.seed if args.seed is not None else config.seeds[0]
            out = args.out
            if out is None:
                tag = f"cond{cond}_f{flows}_w{pair[0]:g}_s{seed}"
                out = args.config.with_name(f"{args.config.stem}_{tag}.mps")
            _export_point(config, cond, flows, pair, seed, out)
            print(f"wrote {out}")
            return 0

        if args.command == "run":
            record = run_sweep(
                config,
                jobs=max(1, args.jobs),
                resume=not args.no_resume,
                csv_path=args.out,
            )
            n_done = len(record.points)
            n_skip = len(record.skipped)
            print(f"wrote {record.csv_path} ({n_done} new rows, {n_skip} resumed)")
            failures = [p for p in record.points if p.metrics.status.startswith("error")]
            for p in failures:
                print(f"point {p.key()} failed: {p.metrics.status}", file=sys.stderr)
            return 0
    except (ConfigError, TopologyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _export_point(config, cond, flows, pair, seed, out: Path):
    from .qos import aggregate_at_gnb, generate_traffic
    from .slicing import assign_slice_edges, build_slices, routable_slices

    topology = build_scenario_topology(config)
    condition = config.condition_object(cond)
    flows_5g = generate_traffic(
        n_gnbs=len(config.gnb_sites),
        ues_per_gnb=config.ues_per_gnb,
        flows_per_ue=flows,
        demand_per_flow_bps=config.demand_per_flow_bps,
        destinations=list(topology.ground_station_ids()),
        rng_seed=seed,
    )
    by_gnb: dict[int, list] = {}
    for f in flows_5g:
        by_gnb.setdefault(f.gnb_id, []).append(f)
    ntn = []
    for gnb_id in sorted(by_gnb):
        gnb_node = topology.gnb_ids()[gnb_id]
        cap = topology.user_link_of_gnb(gnb_node).capacity_bps
        ntn.extend(aggregate_at_gnb(by_gnb[gnb_id], condition, cap, id_start=len(ntn)))
    edges = assign_slice_edges(topology)
    slices, _ = routable_slices(build_slices(ntn, config.slice_policy, edges), topology)
    slices = [dataclasses.replace(s, id=i) for i, s in enumerate(slices)]
    weights = OptimizationWeights.from_traffic(pair[0], pair[1], flows_5g)
    model = build_model(slices, topology, weights)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_mps(model, out)


if __name__ == "__main__":
    sys.exit(main())
