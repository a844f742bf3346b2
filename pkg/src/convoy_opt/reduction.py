"""Train-count gadget and the black-box approximation for TMO.

A convoy routing with k paths and d trains is equivalent to a k-path
min-max disjoint paths solution on the graph obtained by prepending a
chain of (d-k) bundles, each holding one arc of length delta and k-1
arcs of length zero: the number of delta-arcs a path picks up in the
gadget encodes how many extra trains follow it.  Gadget arc ids live in
the reserved range [m, m + (d-k)*k), so restricting a path to the
original graph is a plain id-range filter and round trips are bit exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from .dp import PathProfile
from .errors import InfeasibleError, PreconditionError, RoutingStructureError
from .flow import solve_tmo_additive
from .graph import Arc, ArcId, ArcPath, Digraph, path_length
from .tmo import ConvoyRouting, TmoInstance, convoy_makespan


def gadget_arc_count(k: int, d: int) -> int:
    return (d - k) * k


def build_gadget_graph(g: Digraph, k: int, d: int, delta: int) -> Digraph:
    """The auxiliary graph: fresh source, (d-k) bundles, then ``g``.

    Original node and arc ids are preserved; bundle j (0-based) owns arc
    ids m + j*k .. m + j*k + k - 1, the first of which is its delta-arc.
    For k = d the gadget is empty and ``g`` itself is returned.
    """
    if not 1 <= k <= d:
        raise PreconditionError(f"need 1 <= k <= d, got k={k}, d={d}")
    if delta < 1:
        raise PreconditionError("delta must be >= 1")
    bundles = d - k
    if bundles == 0:
        return g
    n, m = g.n, g.m
    nodes = list(g.nodes) + [n + j for j in range(bundles)]
    # chain: s' = n, n+1, ..., n+bundles-1, then g's source
    arcs: list[Arc] = list(g.arcs)
    for j in range(bundles):
        tail = n + j
        head = n + j + 1 if j + 1 < bundles else g.source
        base = m + j * k
        arcs.append(Arc(base, tail, head, delta))
        for i in range(1, k):
            arcs.append(Arc(base + i, tail, head, 0))
    return Digraph(nodes, arcs, n, g.sink)


def _is_gadget_delta_arc(arc_id: ArcId, m: int, k: int) -> bool:
    return arc_id >= m and (arc_id - m) % k == 0


def minmaxdp_to_convoy(
    g: Digraph,
    dprime_profile: PathProfile,
    k: int,
    d: int,
    delta: int,
) -> ConvoyRouting:
    """Read a convoy out of a k-path profile on the gadget graph.

    Each path is restricted to original arcs and carries one train plus
    one per delta-arc it used in the gadget; the convoy term of every
    path equals its profile length, so the objective value is preserved
    exactly.
    """
    if dprime_profile.k != k:
        raise PreconditionError(f"profile has {dprime_profile.k} paths, expected {k}")
    m = g.m
    gadget_arcs = gadget_arc_count(k, d)
    dprime = build_gadget_graph(g, k, d, delta)
    paths: list[ArcPath] = []
    sigma: list[int] = []
    for p in dprime_profile.paths:
        original = [a for a in p.arcs if a < m]
        extras = 0
        for a in p.arcs:
            if a >= m:
                if a >= m + gadget_arcs:
                    raise RoutingStructureError(
                        f"arc {a} outside gadget range for k={k}, d={d}"
                    )
                if _is_gadget_delta_arc(a, m, k):
                    extras += 1
        restricted = ArcPath(original)
        if path_length(g, restricted) + extras * delta != path_length(dprime, p):
            raise RoutingStructureError("profile length does not match convoy term")
        paths.append(restricted)
        sigma.append(extras + 1)
    if sum(sigma) != d:
        raise RoutingStructureError(
            f"gadget delta-arc count does not sum to d ({sum(sigma)} != {d})"
        )
    return ConvoyRouting(paths, sigma)


def convoy_to_minmaxdp(g: Digraph, c: ConvoyRouting, delta: int) -> PathProfile:
    """Extend a convoy's paths backwards through the gadget.

    Paths are processed in index order; walking the bundles front to
    back, a path takes the bundle's delta-arc while it still owes
    delta-arcs (sigma_i - 1 in total) and an unused zero-arc otherwise.
    The resulting k paths are arc-disjoint on the gadget graph and their
    max length equals the convoy makespan.
    """
    k = len(c.paths)
    d = c.total_trains
    dprime = build_gadget_graph(g, k, d, delta)
    m = g.m
    bundles = d - k
    used: set[ArcId] = set()
    full_paths: list[ArcPath] = []
    for i, (p, s) in enumerate(zip(c.paths, c.sigma)):
        need = s - 1
        gadget_part: list[ArcId] = []
        for j in range(bundles):
            base = m + j * k
            if need > 0 and base not in used:
                used.add(base)
                gadget_part.append(base)
                need -= 1
            else:
                zero = next(
                    (base + i2 for i2 in range(1, k) if base + i2 not in used), None
                )
                if zero is None:  # pragma: no cover - counting argument
                    raise RoutingStructureError("gadget bundle exhausted")
                used.add(zero)
                gadget_part.append(zero)
        if need != 0:  # pragma: no cover - sigma sums to d
            raise RoutingStructureError("could not place all delta-arcs")
        full_paths.append(ArcPath(tuple(gadget_part) + p.arcs))
    profile = PathProfile.from_graph(dprime, full_paths)
    return profile


def solve_tmo_blackbox(
    inst: TmoInstance,
    epsilon: Fraction | str | int,
    minmaxdp_solver: Callable[[Digraph, int], PathProfile],
) -> ConvoyRouting:
    """max{alpha, 1+epsilon}-approximation from any alpha-approximate solver.

    Large train counts (d > m*(1 + 1/epsilon), compared exactly) go to the
    flow-based additive algorithm, whose delta error is then a relative
    (1+epsilon); otherwise every usable path count k is tried through the
    gadget and the best resulting convoy is returned (ties to smaller k).
    """
    eps = epsilon if isinstance(epsilon, Fraction) else Fraction(epsilon)
    if eps <= 0:
        raise PreconditionError("epsilon must be positive")
    g, d, delta = inst.graph, inst.trains, inst.delta
    if d * eps > g.m * (eps + 1):  # d > m (1 + 1/eps) in exact arithmetic
        return solve_tmo_additive(inst)
    best: Optional[ConvoyRouting] = None
    best_value: Optional[int] = None
    for k in range(1, min(g.m, d) + 1):
        dprime = build_gadget_graph(g, k, d, delta)
        try:
            profile = minmaxdp_solver(dprime, k)
        except InfeasibleError:
            continue
        convoy = minmaxdp_to_convoy(g, profile, k, d, delta)
        value = convoy_makespan(inst, convoy)
        if best_value is None or value < best_value:
            best, best_value = convoy, value
    if best is None:
        raise InfeasibleError("no k admitted a feasible profile (sink unreachable?)")
    return best
