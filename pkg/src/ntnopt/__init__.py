"""5G-NTN slice mapping and joint flow/routing optimization over LEO constellations.

Pipeline: build a snapshot Walker constellation topology, generate seeded
5G traffic, map 5QIs to NQIs and aggregate per gNB, group NTN traffic into
slices, solve the joint single-path routing + flow allocation MILP, then
redistribute slice allocations back to flows and score satisfaction.
"""
from .constellation import (
    EARTH_RADIUS_M,
    SPEED_OF_LIGHT_M_S,
    GeoPoint,
    GnbVisibilityError,
    Link,
    LinkKind,
    Node,
    NodeKind,
    Topology,
    TopologyError,
    WalkerParams,
    build_topology,
    elevation_deg,
    link_latency,
    nearest_visible_satellite,
    propagate_walker,
)
from .metrics import (
    CSV_COLUMNS,
    RunMetrics,
    TrafficOutcome,
    evaluate_cost,
    redistribute,
    satisfaction,
)
from .milp import (
    MilpModel,
    OptimizationWeights,
    Solution,
    SolveOptions,
    SolveStatus,
    build_model,
    export_mps,
    lp_solve,
    solve,
    verify_solution,
)
from .qos import (
    BUILTIN_CONDITION_IDS,
    CATALOG,
    CATALOG_VALUES,
    Flow5G,
    MappingCondition,
    NtnTraffic,
    QosError,
    QosId,
    aggregate_at_gnb,
    generate_traffic,
    map_5qi_to_nqi,
    pdb_s,
    qos_by_value,
)
from .scenario import (
    ConfigError,
    PointResult,
    RunRecord,
    ScenarioConfig,
    build_scenario_topology,
    load_config,
    run_point,
    run_sweep,
)
from .slicing import (
    Slice,
    SlicePolicy,
    SlicingError,
    assign_slice_edges,
    build_slices,
    routable_slices,
)

__version__ = "0.1.0"
