"""Series-parallel recognition, decomposition trees, contraction and phi.

Recognition works by iterative reduction: series nodes of in/out-degree 1
are contracted and parallel arc pairs merged until a single s-t arc
remains, recording the reduction history as a binary decomposition tree.
The contracted tree (adjacent same-label vertices merged) is unique per
graph, which makes it the canonical object for equality tests, and phi is
read off it as the maximum number of S-labeled internal vertices on any
root-to-leaf path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import NotSeriesParallelError
from .graph import ArcId, Digraph, NodeId

LEAF = "leaf"
SERIES = "S"
PARALLEL = "P"


@dataclass(frozen=True)
class SpNode:
    """One vertex of a binary decomposition tree.

    Leaves carry the arc id; compositions carry child indices.  Every
    vertex caches the (source, sink) pair of the subgraph it denotes.
    """

    kind: str
    arc: Optional[ArcId]
    left: Optional[int]
    right: Optional[int]
    source: NodeId
    sink: NodeId


@dataclass(frozen=True)
class SPDecompTree:
    nodes: tuple[SpNode, ...]
    root: int

    def node(self, idx: int) -> SpNode:
        return self.nodes[idx]

    def leaf_arcs(self) -> list[ArcId]:
        return [n.arc for n in self.nodes if n.kind == LEAF]

    def dump(self) -> str:
        """Indented text rendering for debugging and the CLI."""
        lines: list[str] = []

        def rec(idx: int, depth: int) -> None:
            n = self.nodes[idx]
            pad = "  " * depth
            if n.kind == LEAF:
                lines.append(f"{pad}arc a{n.arc} ({n.source}->{n.sink})")
            else:
                lines.append(f"{pad}{n.kind} ({n.source}->{n.sink})")
                rec(n.left, depth + 1)
                rec(n.right, depth + 1)

        rec(self.root, 0)
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        lines = ["digraph sptree {"]
        for i, n in enumerate(self.nodes):
            label = f"a{n.arc}" if n.kind == LEAF else n.kind
            lines.append(f'  t{i} [label="{label}"];')
        for i, n in enumerate(self.nodes):
            if n.kind != LEAF:
                lines.append(f"  t{i} -> t{n.left};")
                lines.append(f"  t{i} -> t{n.right};")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CNode:
    """Vertex of a contracted decomposition tree (arbitrary arity)."""

    kind: str
    arc: Optional[ArcId]
    children: tuple[int, ...]


class ContractedTree:
    """Alternating-label tree obtained by merging same-label neighbours.

    Unique for a given graph regardless of the binary bracketing, hence
    equality is defined through a canonical key: series children keep
    their left-to-right order (fixed by the graph), parallel children are
    an unordered multiset and get sorted.
    """

    def __init__(self, nodes: tuple[CNode, ...], root: int):
        self.nodes = nodes
        self.root = root
        self._key = self._canonical(root)

    def _canonical(self, idx: int):
        n = self.nodes[idx]
        if n.kind == LEAF:
            return (LEAF, n.arc, ())
        keys = [self._canonical(c) for c in n.children]
        if n.kind == PARALLEL:
            keys.sort()
        return (n.kind, -1, tuple(keys))

    @property
    def canonical_key(self):
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, ContractedTree) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def alternates(self) -> bool:
        """True iff no internal vertex has a same-label internal child."""
        for n in self.nodes:
            if n.kind == LEAF:
                continue
            for c in n.children:
                if self.nodes[c].kind == n.kind:
                    return False
        return True


def decompose(g: Digraph, *, order: str = "ascending") -> SPDecompTree:
    """Build a binary decomposition tree of ``g`` or fail.

    ``order`` picks which applicable reduction runs first ("ascending" is
    the canonical ascending (node id, arc id) rule; "descending" exists to
    produce a differently-bracketed tree of the same graph for the
    phi-invariance property tests).

    Raises :class:`NotSeriesParallelError` when the reduction gets stuck,
    which certifies the graph is outside the class.
    """
    if order not in ("ascending", "descending"):
        raise ValueError("order must be 'ascending' or 'descending'")
    for v in g.nodes:
        if not g.out_arcs(v) and not g.in_arcs(v):
            raise NotSeriesParallelError(f"isolated node {v}")

    tree_nodes: list[SpNode] = [
        SpNode(LEAF, arc.id, None, None, arc.tail, arc.head) for arc in g.arcs
    ]
    # working multigraph: arc key -> (tail, head, tree index)
    work: dict[int, tuple[NodeId, NodeId, int]] = {
        arc.id: (arc.tail, arc.head, arc.id) for arc in g.arcs
    }
    next_key = g.m

    def add_composite(kind: str, a: int, b: int) -> None:
        nonlocal next_key
        ta, ha, ia = work.pop(a)
        tb, hb, ib = work.pop(b)
        if kind == SERIES:
            node = SpNode(SERIES, None, ia, ib, ta, hb)
            ends = (ta, hb)
        else:
            node = SpNode(PARALLEL, None, ia, ib, ta, ha)
            ends = (ta, ha)
        tree_nodes.append(node)
        work[next_key] = (ends[0], ends[1], len(tree_nodes) - 1)
        next_key += 1

    while len(work) > 1:
        candidates: list[tuple[tuple[int, int], str, int, int]] = []
        by_pair: dict[tuple[NodeId, NodeId], list[int]] = {}
        in_deg: dict[NodeId, list[int]] = {}
        out_deg: dict[NodeId, list[int]] = {}
        for key, (tail, head, _) in work.items():
            by_pair.setdefault((tail, head), []).append(key)
            out_deg.setdefault(tail, []).append(key)
            in_deg.setdefault(head, []).append(key)
        for (tail, _), keys in by_pair.items():
            if len(keys) >= 2:
                a, b = sorted(keys)[:2]
                candidates.append(((tail, a), PARALLEL, a, b))
        for v in set(in_deg) & set(out_deg):
            if v in (g.source, g.sink):
                continue
            if len(in_deg[v]) == 1 and len(out_deg[v]) == 1:
                p, q = in_deg[v][0], out_deg[v][0]
                if p == q:
                    continue  # self loop, never reducible
                if work[p][0] == work[q][1]:
                    continue  # series merge would create a self loop
                candidates.append(((v, min(p, q)), SERIES, p, q))
        if not candidates:
            raise NotSeriesParallelError(
                f"reduction stuck with {len(work)} arcs remaining"
            )
        candidates.sort(key=lambda c: c[0], reverse=(order == "descending"))
        _, kind, a, b = candidates[0]
        add_composite(kind, a, b)

    (tail, head, root_idx) = next(iter(work.values()))
    if (tail, head) != (g.source, g.sink):
        raise NotSeriesParallelError(
            f"reduced to a single {tail}->{head} arc, expected {g.source}->{g.sink}"
        )
    return SPDecompTree(tuple(tree_nodes), root_idx)


def contract(t: SPDecompTree, root: Optional[int] = None) -> ContractedTree:
    """Merge adjacent same-label vertices into an alternating-label tree.

    Idempotent by construction and independent of the binary bracketing
    (parallel children are canonically sorted, series children keep the
    order dictated by the graph).  ``root`` restricts to a subtree.
    """
    nodes: list[CNode] = []

    def build(idx: int) -> int:
        n = t.nodes[idx]
        if n.kind == LEAF:
            nodes.append(CNode(LEAF, n.arc, ()))
            return len(nodes) - 1
        children: list[int] = []

        def gather(j: int) -> None:
            c = t.nodes[j]
            if c.kind == n.kind:
                gather(c.left)
                gather(c.right)
            else:
                children.append(build(j))

        gather(n.left)
        gather(n.right)
        nodes.append(CNode(n.kind, None, tuple(children)))
        return len(nodes) - 1

    r = build(t.root if root is None else root)
    return ContractedTree(tuple(nodes), r)


def phi(t: SPDecompTree, root: Optional[int] = None) -> int:
    """Maximum number of S-components crossed on any root-to-leaf path.

    Computed on the contracted form, where it is simply the maximum count
    of S-labeled internal vertices along a root-leaf path.
    """
    ct = contract(t, root)

    def rec(idx: int) -> int:
        n = ct.nodes[idx]
        if n.kind == LEAF:
            return 0
        bump = 1 if n.kind == SERIES else 0
        return bump + max(rec(c) for c in n.children)

    return rec(ct.root)


@dataclass(frozen=True)
class Component:
    """A maximal same-label connected set of internal tree vertices."""

    kind: str
    root: int
    members: tuple[int, ...]
    children: tuple[int, ...]


def component_partition(t: SPDecompTree) -> list[Component]:
    """Partition internal vertices into maximal same-label components.

    For each component the root (vertex closest to the tree root) and the
    component children (vertices outside the component whose parent is
    inside) are reported; the phi-strategy analysis works component by
    component.
    """
    parent: dict[int, int] = {}
    for i, n in enumerate(t.nodes):
        if n.kind != LEAF:
            parent[n.left] = i
            parent[n.right] = i
    comps: list[Component] = []
    for i, n in enumerate(t.nodes):
        if n.kind == LEAF:
            continue
        p = parent.get(i)
        if p is not None and t.nodes[p].kind == n.kind:
            continue  # not a component root
        members: list[int] = []
        children: list[int] = []
        stack = [i]
        while stack:
            j = stack.pop()
            members.append(j)
            for c in (t.nodes[j].left, t.nodes[j].right):
                if t.nodes[c].kind == n.kind:
                    stack.append(c)
                else:
                    children.append(c)
        comps.append(
            Component(n.kind, i, tuple(sorted(members)), tuple(sorted(children)))
        )
    comps.sort(key=lambda c: c.root)
    return comps
