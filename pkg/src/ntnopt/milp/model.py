"""Joint flow-allocation and routing MILP over the slice set.

Per slice: a binary link-assignment variable and a continuous flow variable
on every inter-satellite link and every feeder link into the slice's own
destination (feeders toward other ground stations are fixed to zero by
omission), plus the allocated flow b, a flow-gap slack, and a latency-gap
slack. Constraint families:

  feasibility   f <= c*x per modeled link
  capacity      sum_i f <= c per link
  conservation  flow balance with b injected at the slice-edge satellite,
                zero elsewhere, absorbed at the destination
  route         x out-degree = x in-degree + 1 at the edge satellite,
                balanced at all other satellites
  no-loop       ISL x in/out degree <= 1 per satellite
  feeder        at most one feeder into the destination
  gaps          sf >= r - b and sl >= path latency - governing PDB

The matrices are assembled in Mbps / ms; the public interfaces stay in
bits/s and seconds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..constellation import LinkKind, NodeKind, Topology
from ..slicing import Slice

FLOW_UNIT_BPS = 1e6  # model flow unit: Mbps
TIME_UNIT_S = 1e-3   # model time unit: ms


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizationWeights:
    """Objective weights and normalizers: J = wf/(Ns*F) sum sf + wl/(Ns*L) sum sl."""

    w_f: float
    w_l: float
    flow_normalizer_bps: float
    latency_normalizer_s: float

    def __post_init__(self):
        if self.w_f < 0 or self.w_l < 0:
            raise ModelError("weights must be nonnegative")
        if abs(self.w_f + self.w_l - 1.0) > 1e-9:
            raise ModelError(f"weights must sum to 1, got {self.w_f} + {self.w_l}")
        if self.flow_normalizer_bps <= 0 or self.latency_normalizer_s <= 0:
            raise ModelError("normalizers must be positive")

    @staticmethod
    def from_traffic(w_f: float, w_l: float, flows) -> "OptimizationWeights":
        """Defaults: F = total required flow, L = total PDB, over all 5G flows."""
        total_flow = sum(f.demand_bps for f in flows)
        total_pdb = sum(f.qos.pdb_s for f in flows)
        return OptimizationWeights(w_f, w_l, total_flow, total_pdb)


@dataclass
class SliceVars:
    """Column indices for one slice's variables."""

    links: list[int]          # modeled link ids, ascending
    x: dict[int, int]         # link id -> binary column
    f: dict[int, int]         # link id -> flow column
    b: int
    sf: int
    sl: int


@dataclass
class MilpModel:
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer_mask: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    eq_names: list[str]
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    ub_names: list[str]
    col_names: list[str]
    slice_vars: list[SliceVars]
    slices: list[Slice]
    topology: Topology
    weights: OptimizationWeights
    capacity_rows: dict[int, int] = field(default_factory=dict)  # link id -> A_ub row

    @property
    def n_cols(self) -> int:
        return int(self.c.shape[0])

    @property
    def n_rows(self) -> int:
        return int(self.A_eq.shape[0] + self.A_ub.shape[0])

    @property
    def n_binaries(self) -> int:
        return int(self.integer_mask.sum())


def build_model(
    slices: list[Slice], topology: Topology, weights: OptimizationWeights
) -> MilpModel:
    if not slices:
        raise ModelError("no slices to optimize")
    if not topology.feeder_links:
        raise ModelError("topology has no feeder links")

    sat_ids = set(topology.satellite_ids())
    gs_ids = set(topology.ground_station_ids())
    for s in slices:
        if s.edge_satellite not in sat_ids:
            raise ModelError(f"slice {s.id}: edge satellite {s.edge_satellite} not in topology")
        if s.destination not in gs_ids:
            raise ModelError(f"slice {s.id}: destination {s.destination} not in topology")

    isl = sorted(topology.isl_links, key=lambda lk: lk.id)
    feeders_by_dest: dict[int, list] = {}
    for lk in sorted(topology.feeder_links, key=lambda lk: lk.id):
        feeders_by_dest.setdefault(lk.dst, []).append(lk)

    link_by_id = {lk.id: lk for lk in topology.links}
    cap_mbps = {lk.id: lk.capacity_bps / FLOW_UNIT_BPS for lk in topology.links}
    lat_ms = {lk.id: lk.latency_s / TIME_UNIT_S for lk in topology.links}

    n_slices = len(slices)
    f_norm = weights.flow_normalizer_bps / FLOW_UNIT_BPS
    l_norm = weights.latency_normalizer_s / TIME_UNIT_S
    coef_sf = weights.w_f / (n_slices * f_norm)
    coef_sl = weights.w_l / (n_slices * l_norm)

    col_names: list[str] = []
    c_list: list[float] = []
    lb_list: list[float] = []
    ub_list: list[float] = []
    int_list: list[bool] = []
    slice_vars: list[SliceVars] = []

    def add_col(name, cost, lo, hi, integer):
        col_names.append(name)
        c_list.append(cost)
        lb_list.append(lo)
        ub_list.append(hi)
        int_list.append(integer)
        return len(col_names) - 1

    for s in slices:
        modeled = [lk.id for lk in isl] + [lk.id for lk in feeders_by_dest.get(s.destination, [])]
        modeled.sort()
        x_idx = {e: add_col(f"x_{s.id}_{e}", 0.0, 0.0, 1.0, True) for e in modeled}
        f_idx = {e: add_col(f"f_{s.id}_{e}", 0.0, 0.0, cap_mbps[e], False) for e in modeled}
        r_mbps = s.demand_bps / FLOW_UNIT_BPS
        b = add_col(f"b_{s.id}", 0.0, 0.0, r_mbps, False)
        sf = add_col(f"sf_{s.id}", coef_sf, 0.0, np.inf, False)
        sl = add_col(f"sl_{s.id}", coef_sl, 0.0, np.inf, False)
        slice_vars.append(SliceVars(modeled, x_idx, f_idx, b, sf, sl))

    eq_rows: list[tuple[str, list[tuple[int, float]], float]] = []
    ub_rows: list[tuple[str, list[tuple[int, float]], float]] = []

    for s, sv in zip(slices, slice_vars):
        edge = s.edge_satellite
        dest = s.destination
        r_mbps = s.demand_bps / FLOW_UNIT_BPS

        in_isl: dict[int, list[int]] = {j: [] for j in sat_ids}
        out_mod: dict[int, list[int]] = {j: [] for j in sat_ids}
        out_isl: dict[int, list[int]] = {j: [] for j in sat_ids}
        fl_in_dest: list[int] = []
        for e in sv.links:
            lk = link_by_id[e]
            if lk.kind is LinkKind.INTER_SATELLITE:
                in_isl[lk.dst].append(e)
                out_isl[lk.src].append(e)
                out_mod[lk.src].append(e)
            else:  # feeder into this slice's destination
                out_mod[lk.src].append(e)
                fl_in_dest.append(e)

        # Flow conservation: b injected at the edge satellite, balance at the
        # other satellites, absorption at the destination.
        entries = [(sv.f[e], 1.0) for e in in_isl[edge]]
        entries += [(sv.f[e], -1.0) for e in out_mod[edge]]
        entries.append((sv.b, 1.0))
        eq_rows.append((f"cons_{s.id}_edge", entries, 0.0))

        for j in sorted(sat_ids):
            if j == edge:
                continue
            entries = [(sv.f[e], 1.0) for e in in_isl[j]]
            entries += [(sv.f[e], -1.0) for e in out_mod[j]]
            if entries:
                eq_rows.append((f"cons_{s.id}_{j}", entries, 0.0))

        eq_rows.append(
            (f"dest_{s.id}", [(sv.f[e], 1.0) for e in fl_in_dest] + [(sv.b, -1.0)], 0.0)
        )

        # Route existence and balance on the binaries.
        entries = [(sv.x[e], 1.0) for e in out_mod[edge]]
        entries += [(sv.x[e], -1.0) for e in in_isl[edge]]
        eq_rows.append((f"route_{s.id}", entries, 1.0))
        for j in sorted(sat_ids):
            if j == edge:
                continue
            entries = [(sv.x[e], 1.0) for e in in_isl[j]]
            entries += [(sv.x[e], -1.0) for e in out_mod[j]]
            if entries:
                eq_rows.append((f"xbal_{s.id}_{j}", entries, 0.0))

        # Link feasibility: flow only on assigned links. The activation
        # coefficient is min(c_e, r_i): no integral solution carries more than
        # the slice demand on one link, and the smaller constant keeps the
        # LP relaxation from hiding latency behind tiny fractional x.
        for e in sv.links:
            ub_rows.append(
                (f"feas_{s.id}_{e}",
                 [(sv.f[e], 1.0), (sv.x[e], -min(cap_mbps[e], r_mbps))], 0.0)
            )

        # No routing loops: ISL degree caps per satellite.
        for j in sorted(sat_ids):
            if in_isl[j]:
                ub_rows.append((f"loopin_{s.id}_{j}", [(sv.x[e], 1.0) for e in in_isl[j]], 1.0))
            if out_isl[j]:
                ub_rows.append((f"loopout_{s.id}_{j}", [(sv.x[e], 1.0) for e in out_isl[j]], 1.0))

        # At most one feeder link into the destination.
        if fl_in_dest:
            ub_rows.append((f"feeder_{s.id}", [(sv.x[e], 1.0) for e in fl_in_dest], 1.0))

        # Gap linearization: sf >= r - b, sl >= path latency - governing PDB.
        ub_rows.append((f"gapf_{s.id}", [(sv.b, -1.0), (sv.sf, -1.0)], -r_mbps))
        pdb_ms = s.governing_pdb_s / TIME_UNIT_S
        entries = [(sv.x[e], lat_ms[e]) for e in sv.links]
        entries.append((sv.sl, -1.0))
        ub_rows.append((f"gapl_{s.id}", entries, pdb_ms))

    # Shared capacity rows over links modeled by at least one slice.
    capacity_rows: dict[int, int] = {}
    used_links = sorted({e for sv in slice_vars for e in sv.links})
    for e in used_links:
        entries = [(sv.f[e], 1.0) for sv in slice_vars if e in sv.f]
        capacity_rows[e] = len(ub_rows)
        ub_rows.append((f"cap_{e}", entries, cap_mbps[e]))

    n_cols = len(col_names)

    def to_csr(rows):
        data, ri, ci, rhs, names = [], [], [], [], []
        for r, (name, entries, b) in enumerate(rows):
            names.append(name)
            rhs.append(b)
            for col, val in entries:
                ri.append(r)
                ci.append(col)
                data.append(val)
        mat = sp.csr_matrix(
            (data, (ri, ci)), shape=(len(rows), n_cols), dtype=float
        )
        return mat, np.array(rhs, dtype=float), names

    A_eq, b_eq, eq_names = to_csr(eq_rows)
    A_ub, b_ub, ub_names = to_csr(ub_rows)

    return MilpModel(
        c=np.array(c_list),
        lb=np.array(lb_list),
        ub=np.array(ub_list),
        integer_mask=np.array(int_list, dtype=bool),
        A_eq=A_eq,
        b_eq=b_eq,
        eq_names=eq_names,
        A_ub=A_ub,
        b_ub=b_ub,
        ub_names=ub_names,
        col_names=col_names,
        slice_vars=slice_vars,
        slices=list(slices),
        topology=topology,
        weights=weights,
        capacity_rows=capacity_rows,
    )
