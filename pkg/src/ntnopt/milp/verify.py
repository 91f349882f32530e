"""Independent solution checker.

Re-evaluates every constraint family from the raw slice and topology data
(never from the model matrices): link feasibility, shared capacity, flow
conservation with injection/absorption, route existence and balance,
no-loop degree caps, the single-feeder rule, demand caps, path-ness of the
active links, latency accounting, and exact gap tightness.
"""
from __future__ import annotations

from ..constellation import LinkKind, Topology
from ..slicing import Slice
from .branch_bound import Solution, SolveStatus


def verify_solution(
    solution: Solution,
    slices: list[Slice],
    topology: Topology,
    tol: float = 1e-6,
) -> list[str]:
    """All detected violations, formatted one per entry; empty means clean."""
    if solution.status is SolveStatus.INFEASIBLE or solution.routes is None:
        return ["solution carries no routes to verify"]

    v: list[str] = []
    link_by_id = {lk.id: lk for lk in topology.links}
    sat_ids = set(topology.satellite_ids())
    gs_ids = set(topology.ground_station_ids())

    def bad(msg: str):
        v.append(msg)

    total_link_flow: dict[int, float] = {}

    for s in slices:
        route = solution.routes[s.id]
        b = float(solution.allocated_bps[s.id])
        flows = solution.link_flows_bps[s.id]

        # Path-ness: consecutive directed links from the edge satellite to the
        # destination, ISLs between satellites, exactly one trailing feeder,
        # no node revisited.
        if not route:
            bad(f"slice {s.id}: empty route")
            continue
        visited = [s.edge_satellite]
        ok = True
        for k, e in enumerate(route):
            lk = link_by_id.get(e)
            if lk is None:
                bad(f"slice {s.id}: unknown link {e} in route")
                ok = False
                break
            if lk.src != visited[-1]:
                bad(f"slice {s.id}: route breaks at link {e} ({lk.src} != {visited[-1]})")
                ok = False
                break
            last = k == len(route) - 1
            if last and lk.kind is not LinkKind.FEEDER:
                bad(f"slice {s.id}: route does not end on a feeder link")
                ok = False
            if not last and lk.kind is not LinkKind.INTER_SATELLITE:
                bad(f"slice {s.id}: non-ISL link {e} inside the route")
                ok = False
            visited.append(lk.dst)
        if not ok:
            continue
        if visited[-1] != s.destination:
            bad(f"slice {s.id}: route ends at {visited[-1]}, not destination {s.destination}")
        if len(set(visited)) != len(visited):
            bad(f"slice {s.id}: route revisits a node")

        # Demand cap and flow bookkeeping.
        if b < -tol * max(1.0, s.demand_bps):
            bad(f"slice {s.id}: negative allocation {b}")
        if b > s.demand_bps * (1 + tol) + tol:
            bad(f"slice {s.id}: allocation {b} exceeds demand {s.demand_bps}")
        for e, f in flows.items():
            if e not in route:
                bad(f"slice {s.id}: flow on inactive link {e}")
            lk = link_by_id[e]
            if f > lk.capacity_bps * (1 + tol) + tol:  # (i) with x=1
                bad(f"slice {s.id}: flow {f} exceeds capacity on link {e}")
            total_link_flow[e] = total_link_flow.get(e, 0.0) + f

        # Conservation at every satellite, absorption at ground stations.
        flow_tol = tol * max(1.0, b)
        for j in sat_ids:
            fin = sum(f for e, f in flows.items() if link_by_id[e].dst == j)
            fout = sum(f for e, f in flows.items() if link_by_id[e].src == j)
            if j == s.edge_satellite:
                if abs(fin + b - fout) > flow_tol:
                    bad(f"slice {s.id}: conservation fails at edge satellite {j}")
            elif abs(fin - fout) > flow_tol:
                bad(f"slice {s.id}: conservation fails at satellite {j}")
        for g in gs_ids:
            fin = sum(f for e, f in flows.items() if link_by_id[e].dst == g)
            fout = sum(f for e, f in flows.items() if link_by_id[e].src == g)
            if fout > flow_tol:
                bad(f"slice {s.id}: ground station {g} transmits flow")
            want = b if g == s.destination else 0.0
            if abs(fin - want) > flow_tol:
                bad(f"slice {s.id}: destination flow at {g} is {fin}, expected {want}")

        # Route-balance (vi), no-loop (vii), single feeder (viii).
        for j in sat_ids:
            xin = sum(1 for e in route if link_by_id[e].dst == j
                      and link_by_id[e].kind is LinkKind.INTER_SATELLITE)
            xout = sum(1 for e in route if link_by_id[e].src == j)
            xout_isl = sum(1 for e in route if link_by_id[e].src == j
                           and link_by_id[e].kind is LinkKind.INTER_SATELLITE)
            if j == s.edge_satellite:
                if xout != xin + 1:
                    bad(f"slice {s.id}: route existence fails at edge satellite {j}")
            elif xin != xout:
                bad(f"slice {s.id}: link-usage balance fails at satellite {j}")
            if xin > 1 or xout_isl > 1:
                bad(f"slice {s.id}: no-loop degree cap exceeded at satellite {j}")
        feeders = [e for e in route if link_by_id[e].kind is LinkKind.FEEDER]
        if len(feeders) > 1:
            bad(f"slice {s.id}: {len(feeders)} feeder links active")
        for e in feeders:
            if link_by_id[e].dst != s.destination:
                bad(f"slice {s.id}: feeder into foreign ground station {link_by_id[e].dst}")

        # Eq. (2): the allocation equals the flow leaving the edge satellite.
        leaving = sum(f for e, f in flows.items() if link_by_id[e].src == s.edge_satellite)
        entering = sum(f for e, f in flows.items() if link_by_id[e].dst == s.edge_satellite)
        if abs(leaving - entering - b) > flow_tol:
            bad(f"slice {s.id}: b does not equal the net flow leaving the edge satellite")

        # Latency accounting and exact gap tightness.
        lat = sum(link_by_id[e].latency_s for e in route)
        if abs(lat - float(solution.latency_s[s.id])) > 1e-9 * max(1.0, lat):
            bad(f"slice {s.id}: reported latency mismatch")
        want_sf = max(0.0, s.demand_bps - b)
        if abs(float(solution.flow_gap_bps[s.id]) - want_sf) > 1e-9 * max(1.0, want_sf):
            bad(f"slice {s.id}: flow gap is not tight")
        want_sl = max(0.0, lat - s.governing_pdb_s)
        if abs(float(solution.latency_gap_s[s.id]) - want_sl) > 1e-9 * max(1.0, want_sl):
            bad(f"slice {s.id}: latency gap is not tight")

    # (ii) shared capacity.
    for e, f in sorted(total_link_flow.items()):
        cap = link_by_id[e].capacity_bps
        if f > cap * (1 + tol) + tol:
            bad(f"link {e}: total flow {f} exceeds capacity {cap}")

    return v
