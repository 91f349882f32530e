"""NTN slice construction: slice-edge satellites and traffic-to-slice grouping.

A slice collects the NTN traffic that enters the constellation at one
slice-edge satellite, belongs to one NQI group of the policy, and shares
one destination ground station. Its demand is the sum of member demands.
"""
from __future__ import annotations

from dataclasses import dataclass

from .constellation import LinkKind, Topology
from .qos import CATALOG_VALUES, NtnTraffic, pdb_s


class SlicingError(ValueError):
    pass


@dataclass(frozen=True)
class SlicePolicy:
    """Partition of the NQI set into groups; one slice per group per destination."""

    groups: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for g in self.groups:
            if not g:
                raise SlicingError("empty NQI group in slice policy")
            dup = seen & g
            if dup:
                raise SlicingError(f"NQI groups are not disjoint: {sorted(dup)}")
            seen |= g

    @staticmethod
    def per_nqi() -> "SlicePolicy":
        """Default policy: one group per catalog NQI (PDB order)."""
        return SlicePolicy(tuple(frozenset({v}) for v in CATALOG_VALUES))

    def group_index(self, nqi_value: int) -> int:
        for i, g in enumerate(self.groups):
            if nqi_value in g:
                return i
        raise SlicingError(f"NQI {nqi_value} is in no group of the slice policy")

    def governing_pdb_s(self, group_idx: int) -> float:
        return min(pdb_s(v) for v in self.groups[group_idx])


@dataclass(frozen=True)
class Slice:
    id: int
    edge_satellite: int  # node id
    nqi_group: frozenset[int]
    governing_pdb_s: float
    destination: int  # ground-station node id
    members: tuple[NtnTraffic, ...]
    demand_bps: float  # sum of member demands


def assign_slice_edges(topology: Topology) -> dict[int, int]:
    """gNB index -> slice-edge satellite node id (ingress of its user link)."""
    edges: dict[int, int] = {}
    for idx, gnb_node in enumerate(topology.gnb_ids()):
        edges[idx] = topology.user_link_of_gnb(gnb_node).dst
    return edges


def build_slices(
    ntn_traffic: list[NtnTraffic],
    policy: SlicePolicy,
    edges: dict[int, int],
) -> list[Slice]:
    """Group NTN traffic into slices keyed by (edge satellite, NQI group, destination).

    Only nonzero-demand slices are created; ids are dense in
    (edge satellite, destination, group index) order.
    """
    buckets: dict[tuple[int, int, int], list[NtnTraffic]] = {}
    for t in ntn_traffic:
        if t.gnb_id not in edges:
            raise SlicingError(f"NTN traffic {t.id}: gNB {t.gnb_id} has no slice-edge satellite")
        gidx = policy.group_index(t.qos.value)
        key = (edges[t.gnb_id], t.destination, gidx)
        buckets.setdefault(key, []).append(t)

    slices: list[Slice] = []
    for sat, dest, gidx in sorted(buckets):
        members = tuple(buckets[(sat, dest, gidx)])
        demand = sum(t.demand_bps for t in members)
        if demand <= 0:
            continue
        slices.append(
            Slice(
                id=len(slices),
                edge_satellite=sat,
                nqi_group=policy.groups[gidx],
                governing_pdb_s=policy.governing_pdb_s(gidx),
                destination=dest,
                members=members,
                demand_bps=demand,
            )
        )
    return slices


def routable_slices(
    slices: list[Slice], topology: Topology
) -> tuple[list[Slice], list[Slice]]:
    """Split slices into (routable, unroutable) by path existence to the destination.

    A slice is routable when its edge satellite reaches its destination over
    inter-satellite links plus feeder links into that destination.
    """
    ok: list[Slice] = []
    bad: list[Slice] = []
    reach_cache: dict[tuple[int, int], bool] = {}
    for s in slices:
        key = (s.edge_satellite, s.destination)
        if key not in reach_cache:
            reach_cache[key] = _reaches(topology, s.edge_satellite, s.destination)
        (ok if reach_cache[key] else bad).append(s)
    return ok, bad


def _reaches(topology: Topology, edge_sat: int, dest: int) -> bool:
    seen = {edge_sat}
    stack = [edge_sat]
    while stack:
        node = stack.pop()
        for lk in topology.out_links(node, (LinkKind.INTER_SATELLITE, LinkKind.FEEDER)):
            if lk.dst == dest:
                return True
            if lk.kind is LinkKind.INTER_SATELLITE and lk.dst not in seen:
                seen.add(lk.dst)
                stack.append(lk.dst)
    return False
