"""Uncrossing: turn any feasible acyclic routing into a convoy routing.

Phase 1 repeatedly picks a leader (first train over some arc into the
sink) that still has a transition arc -- the last arc on its path where
the set or order of trains ahead of it differs from its final arc -- and
reroutes everything ahead of it there onto its own tail segment.  A
potential argument (sum over trains of the arc count from the source to
the transition arc) strictly decreases each iteration, forcing
termination.  Phase 2 assigns every train to the path of the leader of
its entering arc, in single file.

The makespan never increases along the way, which is the constructive
content of the convoy theorem; the implementation asserts this, the
potential decrease, and feasibility after every step, raising
InternalInvariantError on any failure since none is ever expected.

Input routings must be node-simple; intermediate reroutings may briefly
create node-revisiting (still arc-simple) paths, which is harmless for
every quantity involved, and any leftover loops are excised from the
final convoy paths (only ever shortening them).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import (
    InfeasibleError,
    InternalInvariantError,
    PreconditionError,
    RoutingStructureError,
)
from .graph import ArcId, ArcPath, Digraph, are_arc_disjoint
from .tmo import (
    ConvoyRouting,
    TmoInstance,
    TrainPlan,
    TrainRouting,
    convoy_makespan,
    makespan,
    validate_routing,
)

TraceFn = Callable[[dict], None]


def _ordered_ahead(paths, entries, arc: ArcId, x: int) -> tuple[int, ...]:
    """Trains entering ``arc`` before train x, in entry order, x appended."""
    ahead = [
        (entries[y][arc], y)
        for y in range(len(paths))
        if y != x and arc in entries[y] and entries[y][arc] < entries[x][arc]
    ]
    ahead.sort()
    return tuple(y for _, y in ahead) + (x,)


def _transition_index(paths, entries, x: int) -> Optional[int]:
    """Index on train x's path of its transition arc, None if in convoy."""
    path = paths[x]
    ref = _ordered_ahead(paths, entries, path[-1], x)
    for pos in range(len(path) - 2, -1, -1):
        if _ordered_ahead(paths, entries, path[pos], x) != ref:
            return pos
    return None


def compute_transition(r: TrainRouting, train: int) -> Optional[ArcId]:
    """Transition arc of a train, or None when it moves in a convoy.

    Scanning the path from the sink toward the source, this is the last
    arc whose ordered tuple of preceding trains differs from the one on
    the final arc.
    """
    paths = [list(p.path.arcs) for p in r.trains]
    entries = [dict(p.entry) for p in r.trains]
    pos = _transition_index(paths, entries, train)
    return None if pos is None else paths[train][pos]


@dataclass
class UncrossState:
    """Mutable working copy of a routing plus the cached uncrossing data."""

    inst: TmoInstance
    paths: list[list[ArcId]]
    entries: list[dict[ArcId, int]]
    leaders: dict[ArcId, int] = field(default_factory=dict)
    transitions: list[Optional[int]] = field(default_factory=list)  # positions
    potentials: list[int] = field(default_factory=list)
    iterations: int = 0

    def refresh(self) -> None:
        d = len(self.paths)
        self.leaders = {}
        for y in range(d):
            last = self.paths[y][-1]
            cur = self.leaders.get(last)
            if cur is None or self.entries[y][last] < self.entries[cur][last]:
                self.leaders[last] = y
        self.transitions = [_transition_index(self.paths, self.entries, y) for y in range(d)]
        self.potentials = [
            0 if t is None else t + 1 for t in self.transitions
        ]

    def routing(self) -> TrainRouting:
        return TrainRouting(
            [TrainPlan(ArcPath(p), dict(e)) for p, e in zip(self.paths, self.entries)]
        )

    def total_potential(self) -> int:
        return sum(self.potentials)


def _new_state(inst: TmoInstance, r: TrainRouting) -> UncrossState:
    state = UncrossState(
        inst,
        [list(p.path.arcs) for p in r.trains],
        [dict(p.entry) for p in r.trains],
    )
    state.refresh()
    return state


def uncross_step(state: UncrossState, leader: int) -> UncrossState:
    """One Phase-1 iteration: reroute everything ahead of ``leader``.

    Every train entering the transition arc before the leader (and the
    leader itself) now follows its own prefix through the transition arc
    and then the leader's tail segment, entering each successive arc as
    soon as the previous one is traversed.  Pairwise gaps on the tail
    equal the gaps held on the transition arc, so feasibility is
    preserved and the makespan cannot grow.
    """
    g = state.inst.graph
    pos = state.transitions[leader]
    if pos is None:
        raise PreconditionError(f"train {leader} has no transition arc")
    if state.leaders.get(state.paths[leader][-1]) != leader:
        raise PreconditionError(f"train {leader} is not a leader")
    before_makespan = makespan(state.inst, state.routing())
    before_potential = state.total_potential()

    a_tr = state.paths[leader][pos]
    tail = state.paths[leader][pos + 1:]  # Q_x: transition node -> sink
    group = _ordered_ahead(state.paths, state.entries, a_tr, leader)
    for y in group:
        ypos = state.paths[y].index(a_tr)
        prefix = state.paths[y][: ypos + 1]
        new_path = prefix + tail
        new_entry = {a: state.entries[y][a] for a in prefix}
        t = new_entry[a_tr]
        cur = a_tr
        for nxt in tail:
            t = t + g.arc(cur).tau
            new_entry[nxt] = t
            cur = nxt
        state.paths[y] = new_path
        state.entries[y] = new_entry

    state.iterations += 1
    state.refresh()

    report = validate_routing(state.inst, state.routing(), require_node_simple=False)
    if not report.ok:
        raise InternalInvariantError(f"routing infeasible after step: {report.summary()}")
    after_makespan = makespan(state.inst, state.routing())
    if after_makespan > before_makespan:
        raise InternalInvariantError(
            f"makespan grew from {before_makespan} to {after_makespan}"
        )
    if state.total_potential() >= before_potential:
        raise InternalInvariantError(
            f"potential did not decrease ({before_potential} -> {state.total_potential()})"
        )
    return state


def _excise_loops(g: Digraph, arcs: list[ArcId]) -> list[ArcId]:
    """Remove node-revisiting loops from an arc-simple walk."""
    out: list[ArcId] = []
    seen: dict[int, int] = {}
    if not arcs:
        return out
    seen[g.arc(arcs[0]).tail] = 0
    for a in arcs:
        head = g.arc(a).head
        if head in seen:
            out = out[: seen[head]]
            # drop bookkeeping for excised nodes
            seen = {v: i for v, i in seen.items() if i <= seen[head]}
        else:
            out.append(a)
            seen[head] = len(out)
    return out


def uncross(
    inst: TmoInstance,
    r: TrainRouting,
    trace: Optional[TraceFn] = None,
) -> ConvoyRouting:
    """Transform a feasible acyclic routing into a convoy routing.

    The result is a valid convoy whose makespan never exceeds the input's.
    Feasibility is required but optimality is not: the proofs only use
    feasibility, so this doubles as a schedule repair tool.
    """
    report = validate_routing(inst, r, require_node_simple=True)
    if report.structural:
        raise RoutingStructureError("; ".join(report.structural))
    if not report.ok:
        raise InfeasibleError(f"input routing infeasible: {report.summary()}")
    original_makespan = makespan(inst, r)

    state = _new_state(inst, r)
    max_iterations = state.total_potential() + 1  # potential strictly decreases

    while True:
        candidates = []
        for arc, x in state.leaders.items():
            pos = state.transitions[x]
            if pos is not None:
                tail_len = len(state.paths[x]) - 1 - pos
                candidates.append((tail_len, x))
        if not candidates:
            break
        if state.iterations >= max_iterations:  # pragma: no cover - potential argument
            raise InternalInvariantError("uncrossing failed to terminate")
        _, x = min(candidates)
        pot_before = state.total_potential()
        pos = state.transitions[x]
        arc_before = state.paths[x][pos]
        uncross_step(state, x)
        if trace is not None:
            trace(
                {
                    "iteration": state.iterations,
                    "leader": x,
                    "transition_arc": arc_before,
                    "potential_before": pot_before,
                    "potential_after": state.total_potential(),
                }
            )

    # Phase 2: every train follows the leader of its entering arc
    leader_paths: list[ArcPath] = []
    sigma: list[int] = []
    for arc in sorted(state.leaders):
        x = state.leaders[arc]
        users = sum(1 for y in range(len(state.paths)) if arc in state.entries[y])
        leader_paths.append(ArcPath(_excise_loops(inst.graph, state.paths[x])))
        sigma.append(users)
    if not are_arc_disjoint(leader_paths):
        raise InternalInvariantError("leader paths not arc-disjoint after phase 1")
    convoy = ConvoyRouting(leader_paths, sigma)
    value = convoy_makespan(inst, convoy)
    if value > original_makespan:
        raise InternalInvariantError(
            f"convoy makespan {value} exceeds input makespan {original_makespan}"
        )
    return convoy
