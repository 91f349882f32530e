"""Slice-to-flow redistribution and satisfaction metrics.

Slice allocations are split among member NTN traffic records proportionally
to their demands, then among each record's 5G flows proportionally to flow
demands. Satisfaction is averaged per 5G flow against the ORIGINAL 5QI's
delay budget, not the mapped NQI's: a mapping that launders a 10 ms flow
into a 300 ms class still gets judged against 10 ms.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .constellation import Topology
from .milp.branch_bound import Solution, SolveStatus
from .milp.model import OptimizationWeights
from .slicing import Slice


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class TrafficOutcome:
    flow_id: int
    gnb_id: int
    slice_id: int | None
    allocated_bps: float   # b* for this 5G flow
    latency_s: float | None  # None when the carrying slice had no route
    requirement_bps: float
    pdb_s: float           # original 5QI budget

    @property
    def routed(self) -> bool:
        return self.latency_s is not None


@dataclass
class RunMetrics:
    sbar_f: float
    sbar_l: float
    J: float
    J_flow_term: float
    J_latency_term: float
    solve_time_s: float
    n_slices: int
    n_binaries: int
    status: str
    n_flows: int
    n_unrouted_flows: int


CSV_COLUMNS = [
    "condition",
    "flows_per_ue",
    "w_f",
    "w_l",
    "sbar_f",
    "sbar_l",
    "J",
    "J_flow_term",
    "J_latency_term",
    "solve_time_s",
    "n_slices",
    "n_binaries",
    "status",
    "seed",
]


def redistribute(
    solution: Solution,
    slices: list[Slice],
    unrouted: list[Slice] | None = None,
    end_to_end: bool = False,
    topology: Topology | None = None,
) -> list[TrafficOutcome]:
    """Per-5G-flow allocations and latencies from a solved slice allocation.

    Conservation is exact: each slice's member flows receive b_i in total.
    Flows of unrouted slices get zero allocation and no latency.
    """
    if solution.status is SolveStatus.INFEASIBLE:
        raise MetricsError("cannot redistribute an infeasible solution")
    if end_to_end and topology is None:
        raise MetricsError("end_to_end redistribution needs the topology")

    outcomes: list[TrafficOutcome] = []
    for s in slices:
        b = float(solution.allocated_bps[s.id])
        lat = float(solution.latency_s[s.id])
        r_s = sum(t.demand_bps for t in s.members)
        for t in s.members:
            share_t = b * (t.demand_bps / r_s)
            lat_t = lat
            if end_to_end:
                gnb_node = topology.gnb_ids()[t.gnb_id]
                lat_t += topology.user_link_of_gnb(gnb_node).latency_s
            member_total = sum(f.demand_bps for f in t.members)
            for f in t.members:
                outcomes.append(
                    TrafficOutcome(
                        flow_id=f.id,
                        gnb_id=f.gnb_id,
                        slice_id=s.id,
                        allocated_bps=share_t * (f.demand_bps / member_total),
                        latency_s=lat_t,
                        requirement_bps=f.demand_bps,
                        pdb_s=f.qos.pdb_s,
                    )
                )
    for s in unrouted or []:
        for t in s.members:
            for f in t.members:
                outcomes.append(
                    TrafficOutcome(
                        flow_id=f.id,
                        gnb_id=f.gnb_id,
                        slice_id=None,
                        allocated_bps=0.0,
                        latency_s=None,
                        requirement_bps=f.demand_bps,
                        pdb_s=f.qos.pdb_s,
                    )
                )
    outcomes.sort(key=lambda o: o.flow_id)
    return outcomes


def satisfaction(outcomes: list[TrafficOutcome]) -> tuple[float, float, int]:
    """(sbar_f, sbar_l, n_unrouted): user-averaged satisfaction ratios.

    sbar_f averages b*/r over every flow; sbar_l averages 1 - l*/pdb over
    routed flows only (unrouted flows are counted separately).
    """
    if not outcomes:
        raise MetricsError("no outcomes to average")
    sbar_f = sum(o.allocated_bps / o.requirement_bps for o in outcomes) / len(outcomes)
    routed = [o for o in outcomes if o.routed]
    n_unrouted = len(outcomes) - len(routed)
    if routed:
        sbar_l = sum(1.0 - o.latency_s / o.pdb_s for o in routed) / len(routed)
    else:
        sbar_l = 0.0
    return sbar_f, sbar_l, n_unrouted


def evaluate_cost(
    flow_gaps_bps, latency_gaps_s, weights: OptimizationWeights
) -> tuple[float, float, float]:
    """(J, flow term, latency term) recomputed from raw gaps; the double-entry
    check against the solver's objective."""
    n_s = len(flow_gaps_bps)
    if n_s == 0 or n_s != len(latency_gaps_s):
        raise MetricsError("gap arrays must be nonempty and equal length")
    term_f = weights.w_f / (n_s * weights.flow_normalizer_bps) * float(sum(flow_gaps_bps))
    term_l = weights.w_l / (n_s * weights.latency_normalizer_s) * float(sum(latency_gaps_s))
    return term_f + term_l, term_f, term_l


def run_metrics(
    solution: Solution,
    outcomes: list[TrafficOutcome],
    weights: OptimizationWeights,
    n_binaries: int,
) -> RunMetrics:
    sbar_f, sbar_l, n_unrouted = satisfaction(outcomes)
    if solution.flow_gap_bps is not None:
        J, term_f, term_l = evaluate_cost(
            solution.flow_gap_bps, solution.latency_gap_s, weights
        )
        n_slices = len(solution.flow_gap_bps)
    else:
        J = term_f = term_l = float("nan")
        n_slices = 0
    return RunMetrics(
        sbar_f=sbar_f,
        sbar_l=sbar_l,
        J=J,
        J_flow_term=term_f,
        J_latency_term=term_l,
        solve_time_s=solution.solve_time_s,
        n_slices=n_slices,
        n_binaries=n_binaries,
        status=solution.status.value,
        n_flows=len(outcomes),
        n_unrouted_flows=n_unrouted,
    )


def csv_row(
    condition, flows_per_ue: int, w_f: float, w_l: float, seed: int, m: RunMetrics
) -> dict[str, str]:
    return {
        "condition": str(condition),
        "flows_per_ue": str(flows_per_ue),
        "w_f": repr(float(w_f)),
        "w_l": repr(float(w_l)),
        "sbar_f": repr(m.sbar_f),
        "sbar_l": repr(m.sbar_l),
        "J": repr(m.J),
        "J_flow_term": repr(m.J_flow_term),
        "J_latency_term": repr(m.J_latency_term),
        "solve_time_s": repr(m.solve_time_s),
        "n_slices": str(m.n_slices),
        "n_binaries": str(m.n_binaries),
        "status": m.status,
        "seed": str(seed),
    }


def append_csv_rows(path: str | Path, rows: list[dict[str, str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists()
    with path.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if fresh:
            writer.writeheader()
        writer.writerows(rows)


def dump_flow_detail(path: str | Path, point_key: dict, outcomes: list[TrafficOutcome]) -> None:
    """One JSON line per flow, prefixed by the sweep-point key."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a") as fh:
        for o in outcomes:
            rec = dict(point_key)
            rec.update(
                flow_id=o.flow_id,
                gnb_id=o.gnb_id,
                slice_id=o.slice_id,
                allocated_bps=o.allocated_bps,
                latency_s=o.latency_s,
                requirement_bps=o.requirement_bps,
                pdb_s=o.pdb_s,
            )
            fh.write(json.dumps(rec) + "\n")
