"""Directed multigraph with integer travel times plus path primitives.

Arcs are identified by dense integer ids (never by endpoint pair) because
parallel arcs are first-class citizens here: bundle graphs and the train
count gadget rely on them.  All length arithmetic is exact integer
arithmetic; derived quantities are range-checked against signed 64 bits.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import GraphConstructionError, InvalidPathError, checked_i64

NodeId = int
ArcId = int


@dataclass(frozen=True)
class Arc:
    """One directed arc with a nonnegative integer travel time."""

    id: ArcId
    tail: NodeId
    head: NodeId
    tau: int


class Digraph:
    """Immutable directed multigraph with designated source and sink.

    Node ids are exactly ``0..n-1`` and arc ids exactly ``0..m-1``; input
    formats with string names are remapped at ingestion.  Construction
    validates all structural invariants: endpoints declared, ids dense and
    unique, ``tau >= 0``, ``source != sink`` and the sink reachable from
    the source.
    """

    __slots__ = ("_nodes", "_arcs", "source", "sink", "_out", "_in")

    def __init__(
        self,
        nodes: Iterable[NodeId],
        arcs: Iterable[tuple[ArcId, NodeId, NodeId, int] | Arc],
        source: NodeId,
        sink: NodeId,
    ):
        node_list = sorted(set(nodes))
        if node_list != list(range(len(node_list))):
            raise GraphConstructionError("node ids must be dense 0..n-1")
        arc_objs = []
        for a in arcs:
            arc = a if isinstance(a, Arc) else Arc(*a)
            if not isinstance(arc.tau, int) or isinstance(arc.tau, bool):
                raise GraphConstructionError(f"arc {arc.id}: tau must be an integer")
            if arc.tau < 0:
                raise GraphConstructionError(f"arc {arc.id}: negative travel time")
            checked_i64(arc.tau)
            if arc.tail not in range(len(node_list)) or arc.head not in range(len(node_list)):
                raise GraphConstructionError(f"arc {arc.id}: undeclared endpoint")
            arc_objs.append(arc)
        arc_objs.sort(key=lambda a: a.id)
        if [a.id for a in arc_objs] != list(range(len(arc_objs))):
            raise GraphConstructionError("arc ids must be dense and unique 0..m-1")
        if source == sink:
            raise GraphConstructionError("source and sink must differ")
        if source not in range(len(node_list)) or sink not in range(len(node_list)):
            raise GraphConstructionError("source/sink must be declared nodes")
        self._nodes = tuple(node_list)
        self._arcs = tuple(arc_objs)
        self.source = source
        self.sink = sink
        out: list[list[Arc]] = [[] for _ in node_list]
        inn: list[list[Arc]] = [[] for _ in node_list]
        for arc in self._arcs:
            out[arc.tail].append(arc)
            inn[arc.head].append(arc)
        self._out = tuple(tuple(x) for x in out)
        self._in = tuple(tuple(x) for x in inn)
        if sink not in self.reachable_from(source):
            raise GraphConstructionError("sink not reachable from source")

    @property
    def n(self) -> int:
        return len(self._nodes)

    @property
    def m(self) -> int:
        return len(self._arcs)

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return self._nodes

    @property
    def arcs(self) -> tuple[Arc, ...]:
        return self._arcs

    def arc(self, arc_id: ArcId) -> Arc:
        if not 0 <= arc_id < len(self._arcs):
            raise InvalidPathError(f"unknown arc id {arc_id}")
        return self._arcs[arc_id]

    def out_arcs(self, v: NodeId) -> tuple[Arc, ...]:
        return self._out[v]

    def in_arcs(self, v: NodeId) -> tuple[Arc, ...]:
        return self._in[v]

    def reachable_from(self, v: NodeId) -> set[NodeId]:
        seen = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for arc in self._out[u]:
                if arc.head not in seen:
                    seen.add(arc.head)
                    stack.append(arc.head)
        return seen

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"Digraph(n={self.n}, m={self.m}, s={self.source}, t={self.sink})"


@dataclass(frozen=True)
class ArcPath:
    """An ordered sequence of arc ids forming a path.

    Validity (incidence, simplicity, endpoints) is checked against a graph
    via :meth:`validate`; the dataclass itself only freezes the sequence.
    """

    arcs: tuple[ArcId, ...] = field(default_factory=tuple)

    def __init__(self, arcs: Iterable[ArcId] = ()):
        object.__setattr__(self, "arcs", tuple(arcs))

    def __len__(self) -> int:
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    def validate(
        self,
        g: Digraph,
        *,
        source: Optional[NodeId] = None,
        sink: Optional[NodeId] = None,
        require_node_simple: bool = True,
    ) -> None:
        """Raise :class:`InvalidPathError` unless this is a valid path in ``g``.

        ``source``/``sink`` pin the required endpoints (pass ``g.source`` and
        ``g.sink`` for s-t paths).  Arc repetition is always rejected; node
        repetition only when ``require_node_simple`` is set (the uncrossing
        algorithm works with arc-simple intermediate paths).
        """
        if not self.arcs:
            if source is not None and sink is not None and source != sink:
                raise InvalidPathError("empty path cannot join distinct endpoints")
            return
        arcs = [g.arc(a) for a in self.arcs]
        for prev, nxt in zip(arcs, arcs[1:]):
            if prev.head != nxt.tail:
                raise InvalidPathError(
                    f"arcs {prev.id} and {nxt.id} are not incident"
                )
        if len(set(self.arcs)) != len(self.arcs):
            raise InvalidPathError("path repeats an arc")
        if require_node_simple:
            nodes = [arcs[0].tail] + [a.head for a in arcs]
            if len(set(nodes)) != len(nodes):
                raise InvalidPathError("path repeats a node")
        if source is not None and arcs[0].tail != source:
            raise InvalidPathError(f"path starts at {arcs[0].tail}, not {source}")
        if sink is not None and arcs[-1].head != sink:
            raise InvalidPathError(f"path ends at {arcs[-1].head}, not {sink}")

    def nodes(self, g: Digraph) -> list[NodeId]:
        """Node sequence visited by the path (empty path -> [])."""
        if not self.arcs:
            return []
        arcs = [g.arc(a) for a in self.arcs]
        return [arcs[0].tail] + [a.head for a in arcs]


def path_length(g: Digraph, p: ArcPath) -> int:
    """Exact integer sum of travel times along ``p``.

    Cheap structural checks (known arcs, incidence) are performed so a
    corrupted path cannot silently report a length.
    """
    total = 0
    prev_head = None
    for arc_id in p.arcs:
        arc = g.arc(arc_id)
        if prev_head is not None and arc.tail != prev_head:
            raise InvalidPathError(f"arc {arc_id} not incident to previous arc")
        prev_head = arc.head
        total += arc.tau
    return checked_i64(total)


def concat(p1: ArcPath, p2: ArcPath) -> ArcPath:
    return ArcPath(p1.arcs + p2.arcs)


def _dijkstra(g: Digraph, start: NodeId, reverse: bool = False) -> list[Optional[int]]:
    """Distances from ``start`` (or to it when ``reverse``); None = unreachable."""
    dist: list[Optional[int]] = [None] * g.n
    dist[start] = 0
    heap: list[tuple[int, int]] = [(0, start)]
    while heap:
        d, v = heapq.heappop(heap)
        if dist[v] is not None and d > dist[v]:
            continue
        arcs = g.in_arcs(v) if reverse else g.out_arcs(v)
        for arc in arcs:
            w = arc.tail if reverse else arc.head
            nd = d + arc.tau
            if dist[w] is None or nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def shortest_path(
    g: Digraph, src: NodeId, dst: NodeId
) -> Optional[tuple[ArcPath, int]]:
    """Minimum-travel-time simple path from ``src`` to ``dst``.

    Returns ``None`` when ``dst`` is unreachable.  Among all minimum-length
    simple paths the one with the lexicographically smallest arc-id
    sequence is returned, which makes every downstream consumer
    deterministic.
    """
    if src == dst:
        return ArcPath(()), 0
    dist_from = _dijkstra(g, src)
    dist_to = _dijkstra(g, dst, reverse=True)
    if dist_from[dst] is None:
        return None
    best = dist_from[dst]

    # Greedy walk over tight arcs (arcs on some optimal path), picking the
    # smallest arc id first and backtracking when the simplicity constraint
    # creates a dead end. Zero-length cycles make the backtracking necessary.
    path: list[ArcId] = []
    visited = {src}

    def extend(v: NodeId, remaining: int) -> bool:
        if v == dst:
            return remaining == 0
        for arc in sorted(g.out_arcs(v), key=lambda a: a.id):
            if arc.head in visited:
                continue
            dt = dist_to[arc.head]
            if dt is None or arc.tau + dt != remaining:
                continue
            visited.add(arc.head)
            path.append(arc.id)
            if extend(arc.head, remaining - arc.tau):
                return True
            path.pop()
            visited.remove(arc.head)
        return False

    if not extend(src, best):  # pragma: no cover - cannot happen: dst reachable
        raise AssertionError("tight-arc search failed despite reachability")
    return ArcPath(path), best


def are_arc_disjoint(paths: Sequence[ArcPath]) -> bool:
    """True iff no arc id occurs in two distinct paths of the list."""
    seen: set[ArcId] = set()
    for p in paths:
        for a in p.arcs:
            if a in seen:
                return False
            seen.add(a)
    return True


def max_disjoint_paths(g: Digraph) -> int:
    """Maximum number of pairwise arc-disjoint s-t paths (unit-capacity max flow).

    Plain augmenting-path max flow; graphs here are small and the value is
    needed as a feasibility certificate before any path search starts.
    """
    # residual: forward capacity 1 per arc, reverse tracks used arcs
    used = [False] * g.m
    value = 0
    while True:
        parent: dict[NodeId, tuple[Arc, bool]] = {}
        seen = {g.source}
        queue = [g.source]
        while queue:
            v = queue.pop(0)
            if v == g.sink:
                break
            for arc in g.out_arcs(v):
                if not used[arc.id] and arc.head not in seen:
                    seen.add(arc.head)
                    parent[arc.head] = (arc, True)
                    queue.append(arc.head)
            for arc in g.in_arcs(v):
                if used[arc.id] and arc.tail not in seen:
                    seen.add(arc.tail)
                    parent[arc.tail] = (arc, False)
                    queue.append(arc.tail)
        if g.sink not in seen:
            return value
        v = g.sink
        while v != g.source:
            arc, forward = parent[v]
            used[arc.id] = forward
            v = arc.tail if forward else arc.head
        value += 1


def to_dot(
    g: Digraph,
    paths: Optional[Sequence[ArcPath]] = None,
    labels: bool = True,
) -> str:
    """Graphviz DOT rendering; optional paths are colored per index."""
    palette = [
        "red", "blue", "green", "orange", "purple",
        "brown", "cyan", "magenta", "gold", "gray",
    ]
    color_of: dict[ArcId, str] = {}
    if paths:
        for i, p in enumerate(paths):
            for a in p.arcs:
                color_of[a] = palette[i % len(palette)]
    lines = ["digraph convoy {", "  rankdir=LR;"]
    for v in g.nodes:
        shape = "doublecircle" if v in (g.source, g.sink) else "circle"
        name = "s" if v == g.source else ("t" if v == g.sink else str(v))
        lines.append(f'  n{v} [label="{name}", shape={shape}];')
    for arc in g.arcs:
        attrs = []
        if labels:
            attrs.append(f'label="a{arc.id}:{arc.tau}"')
        if arc.id in color_of:
            attrs.append(f"color={color_of[arc.id]}")
            attrs.append("penwidth=2")
        attr_s = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  n{arc.tail} -> n{arc.head}{attr_s};")
    lines.append("}")
    return "\n".join(lines) + "\n"
