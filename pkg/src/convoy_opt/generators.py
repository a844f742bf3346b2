"""Seeded instance generators: random series-parallel graphs, bundle
chains, the bundle-chain-with-bypass family, gadget demos, and random
TMO instances/routings for the test harnesses.

Every generator is deterministic for a fixed seed; all randomness flows
through one explicit ``random.Random``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .errors import PreconditionError
from .flow import min_total_paths
from .graph import Arc, ArcPath, Digraph, max_disjoint_paths, shortest_path
from .reduction import build_gadget_graph
from .spdecomp import LEAF, PARALLEL, SERIES, SpNode, SPDecompTree
from .tmo import ConvoyRouting, TmoInstance, TrainPlan, TrainRouting, validate_routing


@dataclass
class GenSpec:
    """What to generate; consumed by :func:`gen_instance` and the CLI."""

    kind: str  # sp-random | bundle-chain | fig5-family | gadget-demo
    seed: int = 0
    params: dict = field(default_factory=dict)


def _random_shape(rng: random.Random, m: int, tau_max: int, p_series: float):
    """Random composition shape with ``m`` leaves as nested tuples."""
    if m == 1:
        return (LEAF, rng.randint(0, tau_max))
    split = rng.randint(1, m - 1)
    kind = SERIES if rng.random() < p_series else PARALLEL
    return (
        kind,
        _random_shape(rng, split, tau_max, p_series),
        _random_shape(rng, m - split, tau_max, p_series),
    )


def realize_shape(shape) -> tuple[Digraph, SPDecompTree]:
    """Build the graph a composition shape denotes plus its decomposition tree.

    Arc ids are assigned in left-to-right leaf order, node ids start with
    source 0 and sink 1; series junctions allocate fresh nodes.  The
    returned tree's vertices are in post-order, children before parents.
    """
    arcs: list[Arc] = []
    tree_nodes: list[SpNode] = []
    next_node = 2

    def rec(sh, src: int, dst: int) -> int:
        nonlocal next_node
        if sh[0] == LEAF:
            arc_id = len(arcs)
            arcs.append(Arc(arc_id, src, dst, sh[1]))
            tree_nodes.append(SpNode(LEAF, arc_id, None, None, src, dst))
            return len(tree_nodes) - 1
        kind, left, right = sh
        if kind == SERIES:
            mid = next_node
            next_node += 1
            li = rec(left, src, mid)
            ri = rec(right, mid, dst)
        else:
            li = rec(left, src, dst)
            ri = rec(right, src, dst)
        tree_nodes.append(SpNode(kind, None, li, ri, src, dst))
        return len(tree_nodes) - 1

    root = rec(shape, 0, 1)
    g = Digraph(range(next_node), arcs, 0, 1)
    return g, SPDecompTree(tuple(tree_nodes), root)


def gen_sp_random(
    m: int,
    tau_max: int = 20,
    seed: int = 0,
    p_series: float = 0.55,
) -> tuple[Digraph, SPDecompTree]:
    """Random series-parallel graph with ``m`` arcs and its tree."""
    if m < 1:
        raise PreconditionError("m must be >= 1")
    rng = random.Random(seed)
    return realize_shape(_random_shape(rng, m, tau_max, p_series))


def gen_bundle_chain(
    bundles: int,
    width: int,
    long_tau: int = 1,
    short_tau: int = 0,
) -> Digraph:
    """Series chain of bundles, each one long arc plus width-1 short arcs."""
    if bundles < 1 or width < 1:
        raise PreconditionError("bundles and width must be >= 1")
    n = bundles + 1  # chain nodes: 0 = s, ..., bundles = t
    arcs: list[Arc] = []
    for j in range(bundles):
        tail, head = j, j + 1
        arcs.append(Arc(len(arcs), tail, head, long_tau))
        for _ in range(width - 1):
            arcs.append(Arc(len(arcs), tail, head, short_tau))
    return Digraph(range(n), arcs, 0, bundles)


def gen_fig5(k: int, bypass_tau: int) -> Digraph:
    """k bundles of width k (one unit arc, k-1 zero arcs) plus an s-t bypass."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    chain = gen_bundle_chain(k, k, long_tau=1, short_tau=0)
    arcs = list(chain.arcs)
    arcs.append(Arc(len(arcs), chain.source, chain.sink, bypass_tau))
    return Digraph(range(chain.n), arcs, chain.source, chain.sink)


def gen_fig5_series(copies: int, k: int, bypass_tau: int) -> Digraph:
    """``copies`` fig5 blocks composed in series (the local-vs-global trap)."""
    if copies < 1:
        raise PreconditionError("copies must be >= 1")
    arcs: list[Arc] = []
    # copy c occupies chain nodes c*k .. (c+1)*k; junctions are shared
    total_nodes = copies * k + 1
    for c in range(copies):
        base = c * k
        for j in range(k):
            tail, head = base + j, base + j + 1
            arcs.append(Arc(len(arcs), tail, head, 1))
            for _ in range(k - 1):
                arcs.append(Arc(len(arcs), tail, head, 0))
        arcs.append(Arc(len(arcs), base, base + k, bypass_tau))
    return Digraph(range(total_nodes), arcs, 0, copies * k)


def gen_gadget_demo(
    k: int, d: int, delta: int, seed: int = 0, inner_m: int = 6, tau_max: int = 5
) -> Digraph:
    """Gadget graph prepended to a small random series-parallel core."""
    core, _ = gen_sp_random(inner_m, tau_max, seed)
    return build_gadget_graph(core, k, d, delta)


def gen_instance(spec: GenSpec) -> Digraph | TmoInstance:
    """Dispatch a GenSpec; adds delta/trains wrapping when both are given."""
    p = dict(spec.params)
    delta = p.pop("delta", None)
    trains = p.pop("trains", None)
    if spec.kind == "sp-random":
        g, _ = gen_sp_random(
            p.pop("m", 12), p.pop("tau_max", 20), spec.seed, p.pop("p_series", 0.55)
        )
    elif spec.kind == "bundle-chain":
        g = gen_bundle_chain(
            p.pop("bundles", 3), p.pop("width", 3),
            p.pop("long_tau", 1), p.pop("short_tau", 0),
        )
    elif spec.kind == "fig5-family":
        copies = p.pop("copies", 1)
        k = p.pop("k", 3)
        bypass = p.pop("bypass_tau", k - 1)
        g = gen_fig5(k, bypass) if copies == 1 else gen_fig5_series(copies, k, bypass)
    elif spec.kind == "gadget-demo":
        g = gen_gadget_demo(
            p.pop("k", 2), p.pop("d", 4), p.pop("gadget_delta", 3),
            spec.seed, p.pop("inner_m", 6), p.pop("tau_max", 5),
        )
    else:
        raise PreconditionError(f"unknown generator kind {spec.kind!r}")
    if p:
        raise PreconditionError(f"unused generator parameters: {sorted(p)}")
    if delta is not None and trains is not None:
        return TmoInstance(g, delta, trains)
    return g


# ---------------------------------------------------------------------------
# random raw digraphs, TMO instances, routings and convoys for the harnesses


def random_digraph(
    seed: int,
    max_arcs: int = 12,
    tau_max: int = 5,
    sp: bool = False,
) -> Digraph:
    """Random digraph with a guaranteed s-t path (series-parallel if asked)."""
    rng = random.Random(seed)
    if sp:
        m = rng.randint(3, max_arcs)
        g, _ = gen_sp_random(m, tau_max, rng.randrange(2**32))
        return g
    n = rng.randint(4, 7)
    s, t = 0, n - 1
    arcs: list[Arc] = []
    # backbone path through a random node subset keeps t reachable
    middle = [v for v in range(1, n - 1)]
    rng.shuffle(middle)
    backbone = [s] + middle[: rng.randint(0, len(middle))] + [t]
    for u, v in zip(backbone, backbone[1:]):
        arcs.append(Arc(len(arcs), u, v, rng.randint(0, tau_max)))
    m = rng.randint(len(arcs), max_arcs)
    while len(arcs) < m:
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        arcs.append(Arc(len(arcs), u, v, rng.randint(0, tau_max)))
    return Digraph(range(n), arcs, s, t)


def random_tmo_instance(
    seed: int,
    max_arcs: int = 12,
    tau_max: int = 5,
    max_delta: int = 4,
    max_trains: int = 5,
    sp: bool = False,
) -> TmoInstance:
    rng = random.Random(seed ^ 0x5EED)
    g = random_digraph(seed, max_arcs, tau_max, sp=sp)
    return TmoInstance(g, rng.randint(1, max_delta), rng.randint(1, max_trains))


def _random_simple_path(g: Digraph, rng: random.Random) -> ArcPath:
    """Random node-simple s-t path (random walk with restarts)."""
    for _ in range(200):
        v = g.source
        visited = {v}
        arcs: list[int] = []
        ok = True
        while v != g.sink:
            candidates = [a for a in g.out_arcs(v) if a.head not in visited]
            if not candidates:
                ok = False
                break
            arc = rng.choice(candidates)
            arcs.append(arc.id)
            visited.add(arc.head)
            v = arc.head
        if ok:
            return ArcPath(arcs)
    sp = shortest_path(g, g.source, g.sink)
    assert sp is not None
    return sp[0]


def random_feasible_routing(inst: TmoInstance, seed: int) -> TrainRouting:
    """Random feasible acyclic routing: random paths, random waiting, then
    whole-train upward shifts until all headway constraints clear."""
    rng = random.Random(seed)
    g, delta = inst.graph, inst.delta
    plans: list[TrainPlan] = []
    for _ in range(inst.trains):
        path = _random_simple_path(g, rng)
        entry: dict[int, int] = {}
        t = rng.randint(0, 2 * delta)
        for a in path.arcs:
            entry[a] = t
            t += g.arc(a).tau + rng.randint(0, delta)
        # clear conflicts against already scheduled trains by shifting up
        for _ in range(10_000):
            shift = 0
            for prior in plans:
                for a in set(prior.path.arcs) & set(path.arcs):
                    gap = entry[a] - prior.entry[a]
                    if abs(gap) < delta:
                        shift = max(shift, prior.entry[a] + delta - entry[a])
            if shift == 0:
                break
            entry = {a: v + shift for a, v in entry.items()}
        plans.append(TrainPlan(path, entry))
    routing = TrainRouting(plans)
    report = validate_routing(inst, routing)
    assert report.ok, report.summary()
    return routing


def random_convoy(seed: int, max_arcs: int = 12, tau_max: int = 6,
                  max_sigma: int = 4, max_delta: int = 5) -> tuple[TmoInstance, ConvoyRouting]:
    """Random instance plus a valid convoy routing on it."""
    rng = random.Random(seed)
    g = random_digraph(rng.randrange(2**32), max_arcs, tau_max)
    kmax = max_disjoint_paths(g)
    k = rng.randint(1, min(kmax, 4))
    paths = min_total_paths(g, k)
    sigma = [rng.randint(1, max_sigma) for _ in range(k)]
    delta = rng.randint(1, max_delta)
    inst = TmoInstance(g, delta, sum(sigma))
    return inst, ConvoyRouting(paths, sigma)
