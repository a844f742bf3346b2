"""TMO instances, train routings with entry functions, and convoy routings.

A train routing assigns every train a path and an integer entry time per
arc; feasibility means entry times are consistent with travel times along
each path and any two trains sharing an arc keep a temporal distance of at
least the headway.  A convoy routing is the compact optimal form: pairwise
arc-disjoint paths plus per-path train counts, dispatched in single file.
Waiting at nodes is represented implicitly by slack in the entry times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import (
    MaterializationCapError,
    RoutingStructureError,
    checked_i64,
)
from .graph import ArcId, ArcPath, Digraph, are_arc_disjoint, path_length

DEFAULT_MATERIALIZATION_CAP = 10**6


@dataclass(frozen=True)
class TmoInstance:
    """A (graph, headway, train count) instance."""

    graph: Digraph
    delta: int
    trains: int

    def __post_init__(self):
        if not isinstance(self.delta, int) or self.delta < 1:
            raise RoutingStructureError("delta must be an integer >= 1")
        if not isinstance(self.trains, int) or self.trains < 1:
            raise RoutingStructureError("trains must be an integer >= 1")
        checked_i64(self.trains)
        checked_i64(self.delta)


@dataclass(frozen=True)
class TrainPlan:
    """Path and entry function of a single train."""

    path: ArcPath
    entry: Mapping[ArcId, int]


@dataclass(frozen=True)
class TrainRouting:
    trains: tuple[TrainPlan, ...]

    def __init__(self, trains: Sequence[TrainPlan]):
        object.__setattr__(self, "trains", tuple(trains))

    def __len__(self) -> int:
        return len(self.trains)


@dataclass(frozen=True)
class ConvoyRouting:
    """Arc-disjoint paths with per-path train counts summing to d.

    The closed-form makespan max_i { tau(P_i) + (sigma_i - 1) * delta }
    makes this representation usable for astronomically many trains.
    """

    paths: tuple[ArcPath, ...]
    sigma: tuple[int, ...]

    def __init__(self, paths: Sequence[ArcPath], sigma: Sequence[int]):
        object.__setattr__(self, "paths", tuple(paths))
        object.__setattr__(self, "sigma", tuple(sigma))
        if len(self.paths) != len(self.sigma):
            raise RoutingStructureError("paths and sigma must have equal length")
        for s in self.sigma:
            if not isinstance(s, int) or s < 1:
                raise RoutingStructureError("every sigma entry must be >= 1")

    @property
    def total_trains(self) -> int:
        return sum(self.sigma)


@dataclass
class ValidationReport:
    """Outcome of validate_routing: structural errors are reported
    separately from feasibility violations."""

    structural: list[str] = field(default_factory=list)
    consistency: list[tuple[int, ArcId, ArcId]] = field(default_factory=list)
    headway: list[tuple[int, int, ArcId]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.structural or self.consistency or self.headway)

    def summary(self) -> str:
        if self.ok:
            return "ok"
        parts = []
        for s in self.structural:
            parts.append(f"structural: {s}")
        for (i, a, b) in self.consistency:
            parts.append(f"consistency: train {i} between arcs {a} and {b}")
        for (i, j, a) in self.headway:
            parts.append(f"headway: trains {i},{j} on arc {a}")
        return "\n".join(parts)


def validate_routing(
    inst: TmoInstance,
    r: TrainRouting,
    *,
    require_node_simple: bool = True,
) -> ValidationReport:
    """Check both feasibility constraints for every train and arc.

    Structural problems (wrong train count, path not s-t, unknown arcs,
    missing or negative entries) land in ``report.structural``; genuine
    feasibility violations are listed pair by pair.
    """
    g = inst.graph
    report = ValidationReport()
    if len(r.trains) != inst.trains:
        report.structural.append(
            f"routing has {len(r.trains)} trains, instance wants {inst.trains}"
        )
    for i, plan in enumerate(r.trains):
        try:
            plan.path.validate(
                g,
                source=g.source,
                sink=g.sink,
                require_node_simple=require_node_simple,
            )
        except Exception as e:  # InvalidPathError
            report.structural.append(f"train {i}: {e}")
            continue
        if set(plan.entry.keys()) != set(plan.path.arcs):
            report.structural.append(f"train {i}: entry keys do not match path arcs")
            continue
        for a in plan.path.arcs:
            t = plan.entry[a]
            if not isinstance(t, int) or t < 0:
                report.structural.append(f"train {i}: entry on arc {a} not an integer >= 0")
    if report.structural:
        return report

    for i, plan in enumerate(r.trains):
        arcs = plan.path.arcs
        for a, b in zip(arcs, arcs[1:]):
            if plan.entry[a] + g.arc(a).tau > plan.entry[b]:
                report.consistency.append((i, a, b))
    for i in range(len(r.trains)):
        for j in range(i + 1, len(r.trains)):
            shared = set(r.trains[i].path.arcs) & set(r.trains[j].path.arcs)
            for a in sorted(shared):
                gap = r.trains[i].entry[a] - r.trains[j].entry[a]
                if abs(gap) < inst.delta:
                    report.headway.append((i, j, a))
    return report


def makespan(inst: TmoInstance, r: TrainRouting) -> int:
    """Arrival time of the last train's nose at the sink."""
    g = inst.graph
    worst = 0
    for plan in r.trains:
        if not plan.path.arcs:
            raise RoutingStructureError("train with empty path")
        arrival = max(plan.entry[a] + g.arc(a).tau for a in plan.path.arcs)
        worst = max(worst, arrival)
    return checked_i64(worst)


def convoy_makespan(inst: TmoInstance, c: ConvoyRouting) -> int:
    """Closed-form makespan; never materializes trains."""
    _check_convoy(inst, c)
    worst = 0
    for p, s in zip(c.paths, c.sigma):
        term = checked_i64(path_length(inst.graph, p) + checked_i64((s - 1) * inst.delta))
        worst = max(worst, term)
    return worst


def _check_convoy(inst: TmoInstance, c: ConvoyRouting) -> None:
    g = inst.graph
    for p in c.paths:
        p.validate(g, source=g.source, sink=g.sink)
    if not are_arc_disjoint(c.paths):
        raise RoutingStructureError("convoy paths are not pairwise arc-disjoint")
    if c.total_trains != inst.trains:
        raise RoutingStructureError(
            f"sigma sums to {c.total_trains}, instance wants {inst.trains}"
        )


def expand_convoy(
    inst: TmoInstance,
    c: ConvoyRouting,
    cap: int = DEFAULT_MATERIALIZATION_CAP,
) -> TrainRouting:
    """Materialize the convoy as an explicit routing.

    Trains on path i depart the source at 0, delta, ..., (sigma_i-1)*delta
    and run without waiting at intermediate nodes.  The result always
    passes validate_routing and realizes the closed-form makespan.
    """
    _check_convoy(inst, c)
    if inst.trains > cap:
        raise MaterializationCapError(
            f"d={inst.trains} exceeds materialization cap {cap}"
        )
    g = inst.graph
    plans: list[TrainPlan] = []
    for p, s in zip(c.paths, c.sigma):
        offsets = []
        acc = 0
        for a in p.arcs:
            offsets.append(acc)
            acc += g.arc(a).tau
        for j in range(s):
            start = j * inst.delta
            entry = {a: start + off for a, off in zip(p.arcs, offsets)}
            plans.append(TrainPlan(p, entry))
    return TrainRouting(plans)
