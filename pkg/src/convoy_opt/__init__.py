"""convoy-opt: train makespan optimization under headway constraints and
min-max disjoint paths on series-parallel graphs.

Solvers: uncrossing to convoy form, flow-over-time additive approximation,
gadget reduction, decomposition-tree dynamic programs, and brute-force
oracles validating every approximation guarantee at desk scale.
"""

from .dp import (
    PathProfile,
    balance_score,
    dp_solve,
    dp_solve_rounded,
    dp_table,
    greedy_parallel,
    greedy_series,
    harmonic,
    profile_trace,
)
from .errors import (
    BudgetExceededError,
    ConvoyOptError,
    GraphConstructionError,
    InfeasibleError,
    InsufficientFlowError,
    IntegerRangeError,
    InternalInvariantError,
    InvalidPathError,
    MaterializationCapError,
    NotSeriesParallelError,
    PreconditionError,
    RoutingStructureError,
    SchemaError,
    UnreachableSinkError,
    checked_i64,
)
from .flow import (
    TemporallyRepeatedFlow,
    flow_to_convoy,
    max_flow_over_time,
    min_total_paths,
    quickest_flow,
    solve_tmo_additive,
)
from .graph import (
    Arc,
    ArcPath,
    Digraph,
    are_arc_disjoint,
    max_disjoint_paths,
    path_length,
    shortest_path,
    to_dot,
)
from .oracles import (
    OracleBudget,
    exact_minmaxdp,
    exact_tmo_convoy,
    exact_tmo_full,
    time_expanded_maxflow,
    water_fill_sigma,
)
from .reduction import (
    build_gadget_graph,
    convoy_to_minmaxdp,
    gadget_arc_count,
    minmaxdp_to_convoy,
    solve_tmo_blackbox,
)
from .spdecomp import (
    ContractedTree,
    SPDecompTree,
    component_partition,
    contract,
    decompose,
    phi,
)
from .tmo import (
    ConvoyRouting,
    TmoInstance,
    TrainPlan,
    TrainRouting,
    convoy_makespan,
    expand_convoy,
    makespan,
    validate_routing,
)
from .uncross import UncrossState, compute_transition, uncross, uncross_step

__version__ = "0.1.0"
