"""QoS identifier catalogs, 5QI-to-NQI mapping, and per-gNB traffic aggregation.

The simulated catalog is the seven-identifier subset used throughout:
ids 80, 3, 65, 1, 2, 70, 4 in ascending packet-delay-budget order. NQIs
share the same identifier space and budgets.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class QosError(ValueError):
    """Unknown identifier or ill-formed mapping table."""


@dataclass(frozen=True)
class QosId:
    """A QoS identifier with its packet delay budget."""

    value: int
    pdb_s: float
    resource_type: str = ""  # GBR / Non-GBR, carried as metadata only

    def __post_init__(self):
        if self.pdb_s <= 0:
            raise QosError(f"non-positive PDB for QoS id {self.value}")


# Simulated identifiers, ascending PDB. Budgets in seconds; resource types
# from the standardized catalog.
_CATALOG_ROWS = (
    (80, 0.010, "Non-GBR"),
    (3, 0.050, "GBR"),
    (65, 0.075, "GBR"),
    (1, 0.100, "GBR"),
    (2, 0.150, "GBR"),
    (70, 0.200, "Non-GBR"),
    (4, 0.300, "GBR"),
)

CATALOG: tuple[QosId, ...] = tuple(QosId(v, p, r) for v, p, r in _CATALOG_ROWS)
CATALOG_VALUES: tuple[int, ...] = tuple(q.value for q in CATALOG)
_BY_VALUE: dict[int, QosId] = {q.value: q for q in CATALOG}


def qos_by_value(value: int) -> QosId:
    try:
        return _BY_VALUE[value]
    except KeyError:
        raise QosError(f"QoS id {value} is not in the simulated catalog") from None


def pdb_s(value: int) -> float:
    return qos_by_value(value).pdb_s


@dataclass(frozen=True)
class Flow5G:
    """One 5G traffic flow: (QoS id, demand, destination) plus its origin."""

    id: int
    gnb_id: int  # gNB index, 0-based
    ue_id: int   # UE index within the gNB
    qos: QosId
    demand_bps: float
    destination: int  # ground-station node id

    def __post_init__(self):
        if self.demand_bps <= 0:
            raise QosError(f"flow {self.id}: non-positive demand")


# Built-in mapping tables (condition id -> {5QI value: NQI value}).
# 1 and 2 collapse everything onto a single NQI (strict 100 ms / relaxed
# 300 ms); 3 and 4 group onto the largest-PDB member of each group; 5 is
# the identity; 6 reverses the PDB order.
_BUILTIN_TABLES: dict[int, dict[int, int]] = {
    1: {q: 1 for q in CATALOG_VALUES},
    2: {q: 4 for q in CATALOG_VALUES},
    3: {80: 65, 3: 65, 65: 65, 1: 2, 2: 2, 70: 4, 4: 4},
    4: {80: 80, 3: 65, 65: 65, 1: 1, 2: 70, 70: 70, 4: 4},
    5: {q: q for q in CATALOG_VALUES},
    6: {80: 4, 3: 70, 65: 2, 1: 1, 2: 65, 70: 3, 4: 80},
}

BUILTIN_CONDITION_IDS: tuple[int, ...] = tuple(sorted(_BUILTIN_TABLES))


@dataclass(frozen=True)
class MappingCondition:
    """A total 5QI -> NQI map over the simulated catalog."""

    condition_id: int | str
    table: dict[int, int] = field(hash=False)

    def __post_init__(self):
        missing = [v for v in CATALOG_VALUES if v not in self.table]
        if missing:
            raise QosError(
                f"mapping condition {self.condition_id} is not total: missing {missing}"
            )
        bad = [v for v in self.table.values() if v not in _BY_VALUE]
        if bad:
            raise QosError(
                f"mapping condition {self.condition_id} maps outside the catalog: {bad}"
            )

    @staticmethod
    def builtin(condition_id: int) -> "MappingCondition":
        try:
            table = _BUILTIN_TABLES[condition_id]
        except KeyError:
            raise QosError(f"no built-in mapping condition {condition_id}") from None
        return MappingCondition(condition_id, dict(table))

    @staticmethod
    def custom(name: str, pairs: dict[int, int]) -> "MappingCondition":
        return MappingCondition(name, dict(pairs))


def map_5qi_to_nqi(cond: MappingCondition, q_f: QosId | int) -> QosId:
    """Apply the condition's mapping function to a 5QI."""
    value = q_f.value if isinstance(q_f, QosId) else int(q_f)
    if value not in cond.table:
        raise QosError(f"5QI {value} is outside condition {cond.condition_id}'s domain")
    return qos_by_value(cond.table[value])


@dataclass(frozen=True)
class NtnTraffic:
    """Aggregated NTN traffic flow emitted by one gNB for one (NQI, destination).

    `demand_bps` is the effective demand after any user-link clipping;
    `requested_bps` is the raw sum of member flow demands.
    """

    id: int
    gnb_id: int
    qos: QosId  # NQI
    demand_bps: float
    destination: int
    members: tuple[Flow5G, ...]
    requested_bps: float
    clipped: bool = False


def generate_traffic(
    n_gnbs: int,
    ues_per_gnb: int,
    flows_per_ue: int,
    demand_per_flow_bps: float,
    destinations: list[int],
    rng_seed: int,
) -> list[Flow5G]:
    """Seeded 5G traffic: uniform 5QI from the catalog, uniform destination."""
    if n_gnbs < 1 or ues_per_gnb < 1 or flows_per_ue < 1:
        raise QosError("traffic counts must be positive")
    if not destinations:
        raise QosError("destination set is empty")
    dests = sorted(destinations)
    rng = np.random.default_rng(rng_seed)
    flows: list[Flow5G] = []
    for gnb in range(n_gnbs):
        for ue in range(ues_per_gnb):
            for _ in range(flows_per_ue):
                qos = CATALOG[int(rng.integers(0, len(CATALOG)))]
                dest = dests[int(rng.integers(0, len(dests)))]
                flows.append(
                    Flow5G(
                        id=len(flows),
                        gnb_id=gnb,
                        ue_id=ue,
                        qos=qos,
                        demand_bps=demand_per_flow_bps,
                        destination=dest,
                    )
                )
    return flows


def aggregate_at_gnb(
    flows: list[Flow5G],
    cond: MappingCondition,
    user_link_capacity_bps: float,
    id_start: int = 0,
) -> list[NtnTraffic]:
    """Aggregate one gNB's flows into NTN traffic per (NQI, destination).

    Demands sum within each group; when the gNB total exceeds the user-link
    capacity all groups are scaled proportionally so the total equals the
    capacity, and the records are marked clipped.
    """
    if not flows:
        return []
    gnbs = {f.gnb_id for f in flows}
    if len(gnbs) != 1:
        raise QosError(f"aggregate_at_gnb got flows from multiple gNBs: {sorted(gnbs)}")
    gnb_id = flows[0].gnb_id

    catalog_pos = {v: i for i, v in enumerate(CATALOG_VALUES)}
    groups: dict[tuple[int, int], list[Flow5G]] = {}
    for f in flows:
        nqi = map_5qi_to_nqi(cond, f.qos)
        groups.setdefault((nqi.value, f.destination), []).append(f)

    total_requested = sum(f.demand_bps for f in flows)
    scale = 1.0
    clipped = False
    if total_requested > user_link_capacity_bps:
        scale = user_link_capacity_bps / total_requested
        clipped = True

    records: list[NtnTraffic] = []
    order = sorted(groups, key=lambda k: (catalog_pos[k[0]], k[1]))
    for nqi_value, dest in order:
        members = tuple(groups[(nqi_value, dest)])
        requested = sum(f.demand_bps for f in members)
        records.append(
            NtnTraffic(
                id=id_start + len(records),
                gnb_id=gnb_id,
                qos=qos_by_value(nqi_value),
                demand_bps=requested * scale,
                destination=dest,
                members=members,
                requested_bps=requested,
                clipped=clipped,
            )
        )
    return records
