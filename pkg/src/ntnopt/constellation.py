"""Snapshot NTN topology: Walker LEO constellation, ground stations, gNB attachments.

All positions are Earth-centered Cartesian meters on a spherical,
non-rotating Earth frozen at a single epoch. Links are directed and carry
full capacity per direction; propagation latency is Euclidean distance
over the speed of light.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
SPEED_OF_LIGHT_M_S = 299_792_458.0
# Standard gravitational parameter, used for the circular mean motion when
# propagating to a nonzero epoch.
MU_EARTH_M3_S2 = 3.986_004_418e14


class TopologyError(ValueError):
    """Raised when a topology cannot be constructed as requested."""


class GnbVisibilityError(TopologyError):
    """A gNB has no satellite above the minimum elevation mask."""

    def __init__(self, gnb_ids: list):
        self.gnb_ids = list(gnb_ids)
        ids = ", ".join(str(g) for g in self.gnb_ids)
        super().__init__(f"no visible satellite for gNB site(s): {ids}")


@dataclass(frozen=True)
class GeoPoint:
    """Geodetic point on the spherical Earth model."""

    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg < 180.0:
            raise ValueError(f"longitude out of range: {self.longitude_deg}")
        if self.altitude_m < 0.0:
            raise ValueError(f"negative altitude: {self.altitude_m}")

    def to_ecef(self) -> np.ndarray:
        """Earth-centered Cartesian position in meters."""
        r = EARTH_RADIUS_M + self.altitude_m
        lat = math.radians(self.latitude_deg)
        lon = math.radians(self.longitude_deg)
        return np.array(
            [
                r * math.cos(lat) * math.cos(lon),
                r * math.cos(lat) * math.sin(lon),
                r * math.sin(lat),
            ]
        )


@dataclass(frozen=True)
class WalkerParams:
    """Walker-style constellation shell: planes x satellites per circular plane."""

    num_planes: int
    sats_per_plane: int
    altitude_m: float
    inclination_deg: float
    raan_spread_deg: float = 180.0
    phase_offset_deg: float = 0.0
    epoch_s: float = 0.0

    def __post_init__(self):
        if self.num_planes < 1 or self.sats_per_plane < 1:
            raise ValueError(
                f"constellation needs >=1 plane and >=1 satellite per plane, "
                f"got {self.num_planes}x{self.sats_per_plane}"
            )
        if not 0.0 < self.inclination_deg <= 180.0:
            raise ValueError(f"inclination out of (0, 180]: {self.inclination_deg}")
        if self.altitude_m <= 0.0:
            raise ValueError(f"non-positive altitude: {self.altitude_m}")

    @property
    def total_satellites(self) -> int:
        return self.num_planes * self.sats_per_plane


class NodeKind(Enum):
    SATELLITE = "satellite"
    GROUND_STATION = "ground_station"
    GNB = "gnb"


class LinkKind(Enum):
    USER = "user"
    INTER_SATELLITE = "isl"
    FEEDER = "feeder"


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind
    position: np.ndarray  # ECEF meters, shape (3,)


@dataclass(frozen=True)
class Link:
    """Directed capacitated link. `src` is the egress node, `dst` the ingress node."""

    id: int
    kind: LinkKind
    src: int
    dst: int
    capacity_bps: float
    latency_s: float


def propagate_walker(params: WalkerParams) -> np.ndarray:
    """Satellite ECEF positions at the epoch, shape (N, 3), plane-major order.

    Plane p sits at RAAN = p * raan_spread_deg / num_planes; satellite s in a
    plane sits at argument s * 360/sats_per_plane + p * phase_offset_deg, plus
    the circular mean motion accumulated over epoch_s.
    """
    r = EARTH_RADIUS_M + params.altitude_m
    mean_motion = math.sqrt(MU_EARTH_M3_S2 / r**3)  # rad/s
    inc = math.radians(params.inclination_deg)
    epoch_arg = mean_motion * params.epoch_s

    positions = np.empty((params.total_satellites, 3))
    k = 0
    for p in range(params.num_planes):
        raan = math.radians(p * params.raan_spread_deg / params.num_planes)
        cos_o, sin_o = math.cos(raan), math.sin(raan)
        for s in range(params.sats_per_plane):
            u = (
                math.radians(s * 360.0 / params.sats_per_plane + p * params.phase_offset_deg)
                + epoch_arg
            )
            cu, su = math.cos(u), math.sin(u)
            positions[k] = (
                r * (cos_o * cu - sin_o * su * math.cos(inc)),
                r * (sin_o * cu + cos_o * su * math.cos(inc)),
                r * su * math.sin(inc),
            )
            k += 1
    return positions


def link_latency(a: np.ndarray, b: np.ndarray) -> float:
    """Propagation latency: Euclidean distance over the speed of light."""
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
                 / SPEED_OF_LIGHT_M_S)


def elevation_deg(ground: np.ndarray, sat: np.ndarray) -> float:
    """Elevation of `sat` above the local horizon at `ground` (spherical Earth)."""
    ground = np.asarray(ground, dtype=float)
    los = np.asarray(sat, dtype=float) - ground
    rng = np.linalg.norm(los)
    up = ground / np.linalg.norm(ground)
    s = float(np.dot(up, los) / rng)
    return math.degrees(math.asin(max(-1.0, min(1.0, s))))


def _visible_satellites(
    ground_pos: np.ndarray, sat_positions: np.ndarray, min_elevation_deg: float
) -> list[tuple[float, int]]:
    """(slant_range, sat_index) for satellites above the elevation mask, sorted."""
    out = []
    for idx in range(sat_positions.shape[0]):
        if elevation_deg(ground_pos, sat_positions[idx]) >= min_elevation_deg:
            out.append((float(np.linalg.norm(sat_positions[idx] - ground_pos)), idx))
    out.sort()
    return out


@dataclass(frozen=True)
class Topology:
    """Immutable snapshot topology. Node ids are dense: satellites first,
    then ground stations, then gNBs. Link ids are dense: ISLs, feeders, user links."""

    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    num_satellites: int
    num_ground_stations: int
    num_gnbs: int
    _out: dict[int, tuple[int, ...]] = field(repr=False, default_factory=dict)
    _in: dict[int, tuple[int, ...]] = field(repr=False, default_factory=dict)

    @staticmethod
    def build(nodes: list[Node], links: list[Link]) -> "Topology":
        n_sat = sum(1 for n in nodes if n.kind is NodeKind.SATELLITE)
        n_gs = sum(1 for n in nodes if n.kind is NodeKind.GROUND_STATION)
        n_gnb = sum(1 for n in nodes if n.kind is NodeKind.GNB)
        out: dict[int, list[int]] = {n.id: [] for n in nodes}
        inc: dict[int, list[int]] = {n.id: [] for n in nodes}
        for lk in links:
            out[lk.src].append(lk.id)
            inc[lk.dst].append(lk.id)
        return Topology(
            nodes=tuple(nodes),
            links=tuple(links),
            num_satellites=n_sat,
            num_ground_stations=n_gs,
            num_gnbs=n_gnb,
            _out={k: tuple(v) for k, v in out.items()},
            _in={k: tuple(v) for k, v in inc.items()},
        )

    # -- node views -----------------------------------------------------
    def satellite_ids(self) -> range:
        return range(self.num_satellites)

    def ground_station_ids(self) -> range:
        return range(self.num_satellites, self.num_satellites + self.num_ground_stations)

    def gnb_ids(self) -> range:
        base = self.num_satellites + self.num_ground_stations
        return range(base, base + self.num_gnbs)

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    # -- link views -----------------------------------------------------
    def link(self, link_id: int) -> Link:
        return self.links[link_id]

    def links_of_kind(self, kind: LinkKind) -> list[Link]:
        return [lk for lk in self.links if lk.kind is kind]

    @property
    def isl_links(self) -> list[Link]:
        return self.links_of_kind(LinkKind.INTER_SATELLITE)

    @property
    def feeder_links(self) -> list[Link]:
        return self.links_of_kind(LinkKind.FEEDER)

    @property
    def user_links(self) -> list[Link]:
        return self.links_of_kind(LinkKind.USER)

    def out_links(self, node_id: int, kinds: tuple[LinkKind, ...] | None = None) -> list[Link]:
        ids = self._out.get(node_id, ())
        links = [self.links[i] for i in ids]
        if kinds is None:
            return links
        return [lk for lk in links if lk.kind in kinds]

    def in_links(self, node_id: int, kinds: tuple[LinkKind, ...] | None = None) -> list[Link]:
        ids = self._in.get(node_id, ())
        links = [self.links[i] for i in ids]
        if kinds is None:
            return links
        return [lk for lk in links if lk.kind in kinds]

    def user_link_of_gnb(self, gnb_node_id: int) -> Link:
        links = self.out_links(gnb_node_id, (LinkKind.USER,))
        if len(links) != 1:
            raise TopologyError(f"gNB node {gnb_node_id} has {len(links)} user links")
        return links[0]

    def to_json(self) -> str:
        doc = {
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind.value,
                    "x_m": n.position[0],
                    "y_m": n.position[1],
                    "z_m": n.position[2],
                }
                for n in self.nodes
            ],
            "links": [
                {
                    "id": lk.id,
                    "kind": lk.kind.value,
                    "u": lk.src,
                    "v": lk.dst,
                    "capacity_bps": lk.capacity_bps,
                    "latency_s": lk.latency_s,
                }
                for lk in self.links
            ],
        }
        return json.dumps(doc, indent=2)


def nearest_visible_satellite(
    gnb: GeoPoint,
    sat_positions: np.ndarray,
    min_elevation_deg: float,
    gnb_label: int | str = "?",
) -> int:
    """Index of the visible satellite with minimum slant range (ties: lowest index)."""
    visible = _visible_satellites(gnb.to_ecef(), sat_positions, min_elevation_deg)
    if not visible:
        raise GnbVisibilityError([gnb_label])
    best_range = visible[0][0]
    candidates = [idx for rng, idx in visible if rng <= best_range]
    return min(candidates)


def _isl_adjacency(params: WalkerParams, close_seam: bool) -> list[tuple[int, int]]:
    """Undirected ISL pairs (a < b) on the plane/index grid.

    Intra-plane: ring over satellite index. Inter-plane: same index in the
    adjacent plane, ring over planes when close_seam (torus). Degenerate
    rings of length 2 contribute a single edge, length 1 none.
    """
    P, S = params.num_planes, params.sats_per_plane
    sat_id = lambda p, s: p * S + s
    pairs: set[tuple[int, int]] = set()
    for p in range(P):
        for s in range(S):
            a = sat_id(p, s)
            if S >= 2:
                nxt = sat_id(p, (s + 1) % S)
                if nxt != a:
                    pairs.add((min(a, nxt), max(a, nxt)))
            if P >= 2:
                if p + 1 < P:
                    pairs.add((min(a, sat_id(p + 1, s)), max(a, sat_id(p + 1, s))))
                elif close_seam and P >= 3:
                    b = sat_id(0, s)
                    pairs.add((min(a, b), max(a, b)))
    return sorted(pairs)


def build_topology(
    walker: WalkerParams,
    ogs_sites: list[GeoPoint],
    gnb_sites: list[GeoPoint],
    user_capacity_bps: float = 500e6,
    isl_capacity_bps: float = 10e9,
    feeder_capacity_bps: float = 10e9,
    min_elevation_deg: float = 10.0,
    close_seam: bool = True,
) -> Topology:
    """Full snapshot topology.

    ISL grid gives each satellite up to four neighbors (ring intra-plane,
    same-index inter-plane); feeder links connect every satellite-OGS pair
    above the elevation mask; each gNB gets one user link to its nearest
    visible satellite.
    """
    if not ogs_sites:
        raise TopologyError("at least one ground station site is required")
    if not gnb_sites:
        raise TopologyError("at least one gNB site is required")

    sat_pos = propagate_walker(walker)
    n_sat = sat_pos.shape[0]

    nodes: list[Node] = [
        Node(i, NodeKind.SATELLITE, sat_pos[i]) for i in range(n_sat)
    ]
    ogs_ids = []
    for site in ogs_sites:
        nid = len(nodes)
        nodes.append(Node(nid, NodeKind.GROUND_STATION, site.to_ecef()))
        ogs_ids.append(nid)
    gnb_ids = []
    for site in gnb_sites:
        nid = len(nodes)
        nodes.append(Node(nid, NodeKind.GNB, site.to_ecef()))
        gnb_ids.append(nid)

    links: list[Link] = []

    def add_link(kind: LinkKind, src: int, dst: int, cap: float):
        links.append(
            Link(
                id=len(links),
                kind=kind,
                src=src,
                dst=dst,
                capacity_bps=cap,
                latency_s=link_latency(nodes[src].position, nodes[dst].position),
            )
        )

    for a, b in _isl_adjacency(walker, close_seam):
        add_link(LinkKind.INTER_SATELLITE, a, b, isl_capacity_bps)
        add_link(LinkKind.INTER_SATELLITE, b, a, isl_capacity_bps)

    for sat in range(n_sat):
        for ogs in ogs_ids:
            if elevation_deg(nodes[ogs].position, sat_pos[sat]) >= min_elevation_deg:
                add_link(LinkKind.FEEDER, sat, ogs, feeder_capacity_bps)

    blind = []
    for i, (gnb_node, site) in enumerate(zip(gnb_ids, gnb_sites)):
        try:
            sat = nearest_visible_satellite(site, sat_pos, min_elevation_deg, gnb_label=i)
        except GnbVisibilityError:
            blind.append(i)
            continue
        add_link(LinkKind.USER, gnb_node, sat, user_capacity_bps)
    if blind:
        raise GnbVisibilityError(blind)

    return Topology.build(nodes, links)
