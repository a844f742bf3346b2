"""Exact brute-force solvers: ground truth for every approximation bound.

Everything here is written to be obviously correct rather than fast, with
explicit budgets enforced before any search starts.  Pruning only ever
discards branches whose admissible lower bound already matches or exceeds
the incumbent, so warm-starting with a known feasible value changes speed,
never results.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .dp import PathProfile
from .errors import BudgetExceededError, InfeasibleError
from .graph import (
    ArcId,
    ArcPath,
    Digraph,
    max_disjoint_paths,
    _dijkstra,
)
from .tmo import ConvoyRouting, TmoInstance, convoy_makespan


@dataclass(frozen=True)
class OracleBudget:
    """Hard caps checked before searching; exceeding any is an error."""

    max_arcs: int = 16
    max_k: int = 6
    max_d: int = 8
    max_horizon: int = 64
    max_paths: int = 20_000
    max_expansions: int = 5_000_000
    max_state_nodes: int = 200_000

    def __post_init__(self):
        for name in ("max_arcs", "max_k", "max_d", "max_horizon",
                     "max_paths", "max_expansions", "max_state_nodes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_BUDGET = OracleBudget()


class _ExpansionCounter:
    __slots__ = ("count", "limit")

    def __init__(self, limit: int):
        self.count = 0
        self.limit = limit

    def tick(self) -> None:
        self.count += 1
        if self.count > self.limit:
            raise BudgetExceededError(f"search exceeded {self.limit} expansions")


def all_simple_st_paths(g: Digraph, budget: OracleBudget = DEFAULT_BUDGET) -> list[tuple[ArcId, ...]]:
    """Every node-simple s-t path, in DFS order by ascending arc id."""
    out: list[tuple[ArcId, ...]] = []
    stack_arcs: list[ArcId] = []
    visited = {g.source}

    def rec(v: int) -> None:
        if v == g.sink:
            out.append(tuple(stack_arcs))
            if len(out) > budget.max_paths:
                raise BudgetExceededError(f"more than {budget.max_paths} simple paths")
            return
        for arc in sorted(g.out_arcs(v), key=lambda a: a.id):
            if arc.head in visited:
                continue
            visited.add(arc.head)
            stack_arcs.append(arc.id)
            rec(arc.head)
            stack_arcs.pop()
            visited.remove(arc.head)

    rec(g.source)
    return out


# ---------------------------------------------------------------------------
# MinMaxDP


def exact_minmaxdp(
    g: Digraph,
    k: int,
    budget: OracleBudget = DEFAULT_BUDGET,
    warm_start: Optional[PathProfile] = None,
) -> PathProfile:
    """Certified optimal k-path profile via exhaustive branch and bound.

    The search keeps k partial paths, always extends the currently
    shortest one, and prunes once the max of (length so far + shortest
    remaining distance) reaches the incumbent.  Two symmetry breaks keep
    bundle graphs tractable without losing completeness: paths are
    initiated with strictly increasing first-arc ids, and among unused
    parallel arcs with identical head and travel time only the lowest id
    is tried.
    """
    if g.m > budget.max_arcs:
        raise BudgetExceededError(f"{g.m} arcs exceed budget {budget.max_arcs}")
    if k > budget.max_k:
        raise BudgetExceededError(f"k={k} exceeds budget {budget.max_k}")
    if k < 1:
        raise InfeasibleError("k must be >= 1")
    if max_disjoint_paths(g) < k:
        raise InfeasibleError(f"graph supports fewer than {k} arc-disjoint s-t paths")

    dist_to_t = _dijkstra(g, g.sink, reverse=True)
    counter = _ExpansionCounter(budget.max_expansions)

    best_value: Optional[int] = None
    best_paths: Optional[list[tuple[ArcId, ...]]] = None
    if warm_start is not None:
        best_value = warm_start.value
        best_paths = [p.arcs for p in warm_start.paths]

    paths: list[list[ArcId]] = [[] for _ in range(k)]
    heads: list[int] = [g.source] * k
    lens: list[int] = [0] * k
    nodesets: list[set[int]] = [{g.source} for _ in range(k)]
    used: set[ArcId] = set()

    def lower_bound() -> Optional[int]:
        worst = 0
        for i in range(k):
            if heads[i] == g.sink and paths[i]:
                worst = max(worst, lens[i])
            else:
                d = dist_to_t[heads[i]]
                if d is None:
                    return None  # dead end
                worst = max(worst, lens[i] + d)
        return worst

    def rec() -> None:
        nonlocal best_value, best_paths
        counter.tick()
        lb = lower_bound()
        if lb is None or (best_value is not None and lb >= best_value):
            return
        # pick the shortest unfinished path (ties by index)
        pick = None
        for i in range(k):
            if heads[i] == g.sink and paths[i]:
                continue
            if pick is None or lens[i] < lens[pick]:
                pick = i
        if pick is None:
            value = max(lens)
            if best_value is None or value < best_value:
                best_value = value
                best_paths = [tuple(p) for p in paths]
            return
        # symmetry break: empty paths are initiated with increasing first arcs
        min_first = -1
        if not paths[pick]:
            for j in range(pick):
                min_first = max(min_first, paths[j][0] if paths[j] else -1)
        seen_shape: set[tuple[int, int]] = set()
        for arc in sorted(g.out_arcs(heads[pick]), key=lambda a: a.id):
            if arc.id in used or arc.head in nodesets[pick]:
                continue
            if not paths[pick] and arc.id <= min_first:
                continue
            shape = (arc.head, arc.tau)
            if shape in seen_shape:
                continue  # parallel twins are interchangeable
            seen_shape.add(shape)
            used.add(arc.id)
            paths[pick].append(arc.id)
            nodesets[pick].add(arc.head)
            old_head = heads[pick]
            heads[pick] = arc.head
            lens[pick] += arc.tau
            rec()
            lens[pick] -= arc.tau
            heads[pick] = old_head
            nodesets[pick].remove(arc.head)
            paths[pick].pop()
            used.remove(arc.id)

    rec()
    if best_paths is None:  # pragma: no cover - feasibility checked upfront
        raise InfeasibleError("no k-path profile found")
    return PathProfile.from_graph(g, [ArcPath(p) for p in best_paths])


# ---------------------------------------------------------------------------
# TMO over convoys


def water_fill_sigma(lengths: Sequence[int], d: int, delta: int) -> tuple[list[int], int]:
    """Optimal integer train split over fixed paths.

    Starts with one train per path and repeatedly assigns the next train
    to the path minimizing the resulting tau + sigma*delta; optimal for
    fixed paths by the standard exchange argument.
    """
    k = len(lengths)
    if k == 0 or k > d:
        raise InfeasibleError("need 1 <= k <= d paths for a convoy split")
    sigma = [1] * k
    import heapq

    heap = [(lengths[i] + delta, i) for i in range(k)]
    heapq.heapify(heap)
    for _ in range(d - k):
        nxt, i = heapq.heappop(heap)
        sigma[i] += 1
        heapq.heappush(heap, (lengths[i] + (sigma[i]) * delta, i))
    makespan = max(lengths[i] + (sigma[i] - 1) * delta for i in range(k))
    return sigma, makespan


def exact_tmo_convoy(
    inst: TmoInstance,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> ConvoyRouting:
    """Certified optimal convoy routing.

    Enumerates arc-disjoint path collections for every usable path count
    and water-fills the train split; optimal over all routings whatsoever
    once the convoy theorem is granted (which the full oracle cross-checks
    at desk scale).
    """
    g, d, delta = inst.graph, inst.trains, inst.delta
    if g.m > budget.max_arcs:
        raise BudgetExceededError(f"{g.m} arcs exceed budget {budget.max_arcs}")
    if d > budget.max_d:
        raise BudgetExceededError(f"d={d} exceeds budget {budget.max_d}")
    kmax = min(max_disjoint_paths(g), d)
    if kmax > budget.max_k:
        raise BudgetExceededError(f"needs exploring k up to {kmax} > budget {budget.max_k}")
    dist_to_t = _dijkstra(g, g.sink, reverse=True)
    counter = _ExpansionCounter(budget.max_expansions)

    best_value: Optional[int] = None
    best: Optional[ConvoyRouting] = None

    for k in range(1, kmax + 1):
        paths: list[list[ArcId]] = [[] for _ in range(k)]
        heads = [g.source] * k
        lens = [0] * k
        nodesets: list[set[int]] = [{g.source} for _ in range(k)]
        used: set[ArcId] = set()

        def optimistic() -> Optional[int]:
            opt_lengths = []
            for i in range(k):
                if heads[i] == g.sink and paths[i]:
                    opt_lengths.append(lens[i])
                else:
                    dd = dist_to_t[heads[i]]
                    if dd is None:
                        return None
                    opt_lengths.append(lens[i] + dd)
            _, ms = water_fill_sigma(opt_lengths, d, delta)
            return ms

        def rec() -> None:
            nonlocal best_value, best
            counter.tick()
            lb = optimistic()
            if lb is None or (best_value is not None and lb >= best_value):
                return
            pick = None
            for i in range(k):
                if heads[i] == g.sink and paths[i]:
                    continue
                if pick is None or lens[i] < lens[pick]:
                    pick = i
            if pick is None:
                sigma, ms = water_fill_sigma(lens, d, delta)
                if best_value is None or ms < best_value:
                    best_value = ms
                    best = ConvoyRouting([ArcPath(tuple(p)) for p in paths], sigma)
                return
            min_first = -1
            if not paths[pick]:
                for j in range(pick):
                    min_first = max(min_first, paths[j][0] if paths[j] else -1)
            seen_shape: set[tuple[int, int]] = set()
            for arc in sorted(g.out_arcs(heads[pick]), key=lambda a: a.id):
                if arc.id in used or arc.head in nodesets[pick]:
                    continue
                if not paths[pick] and arc.id <= min_first:
                    continue
                shape = (arc.head, arc.tau)
                if shape in seen_shape:
                    continue
                seen_shape.add(shape)
                used.add(arc.id)
                paths[pick].append(arc.id)
                nodesets[pick].add(arc.head)
                old_head = heads[pick]
                heads[pick] = arc.head
                lens[pick] += arc.tau
                rec()
                lens[pick] -= arc.tau
                heads[pick] = old_head
                nodesets[pick].remove(arc.head)
                paths[pick].pop()
                used.remove(arc.id)

        rec()

    if best is None:  # pragma: no cover - k=1 always feasible (sink reachable)
        raise InfeasibleError("no convoy routing found")
    assert convoy_makespan(inst, best) == best_value
    return best


# ---------------------------------------------------------------------------
# TMO over arbitrary routings (waiting allowed)


def _min_makespan_fixed_paths(
    chosen: list[tuple[ArcId, ...]],
    taus: dict[ArcId, int],
    delta: int,
    incumbent: Optional[int],
    counter: _ExpansionCounter,
) -> Optional[int]:
    """Exact minimum makespan for fixed train paths.

    Branches over the per-arc precedence order of the trains sharing each
    arc; for a fixed order all headway disjunctions become lower-bound
    difference constraints whose componentwise-minimal solution is found
    by longest-path relaxation.  Trains with identical paths are fixed in
    index order on every arc (an exchange argument makes this lossless).
    Returns the best value strictly below the incumbent, or None.
    """
    d = len(chosen)
    positions: dict[int, dict[ArcId, int]] = {
        i: {a: p for p, a in enumerate(path)} for i, path in enumerate(chosen)
    }
    users: dict[ArcId, list[int]] = {}
    for i, path in enumerate(chosen):
        for a in path:
            users.setdefault(a, []).append(i)
    shared = sorted(a for a, u in users.items() if len(u) >= 2)

    same_path = {
        (i, j)
        for i in range(d)
        for j in range(i + 1, d)
        if chosen[i] == chosen[j]
    }

    # difference-constraint solver: variables (train, position)
    base_edges: list[tuple[tuple[int, int], tuple[int, int], int]] = []
    for i, path in enumerate(chosen):
        for p in range(len(path) - 1):
            base_edges.append(((i, p), (i, p + 1), taus[path[p]]))

    nvars = sum(len(p) for p in chosen)

    def solve(order_edges) -> Optional[int]:
        lam = {(i, p): 0 for i, path in enumerate(chosen) for p in range(len(path))}
        edges = base_edges + order_edges
        for _ in range(nvars + 1):
            changed = False
            for (u, v, w) in edges:
                nv = lam[u] + w
                if nv > lam[v]:
                    lam[v] = nv
                    changed = True
            if not changed:
                break
        else:
            return None  # positive cycle: this order combination is impossible
        return max(
            lam[(i, len(path) - 1)] + taus[path[-1]] for i, path in enumerate(chosen)
        )

    best: Optional[int] = incumbent

    def rec(idx: int, order_edges: list) -> None:
        nonlocal best
        counter.tick()
        partial = solve(order_edges)
        if partial is None or (best is not None and partial >= best):
            return
        if idx == len(shared):
            best = partial
            return
        a = shared[idx]
        for perm in itertools.permutations(users[a]):
            ok = True
            for x in range(len(perm)):
                for y in range(x + 1, len(perm)):
                    if (perm[y], perm[x]) in same_path:
                        ok = False  # identical-path trains keep index order
                        break
                if not ok:
                    break
            if not ok:
                continue
            extra = [
                ((perm[x], positions[perm[x]][a]), (perm[x + 1], positions[perm[x + 1]][a]), delta)
                for x in range(len(perm) - 1)
            ]
            rec(idx + 1, order_edges + extra)

    rec(0, [])
    if best is not None and (incumbent is None or best < incumbent):
        return best
    return None


def exact_tmo_full(
    inst: TmoInstance,
    budget: OracleBudget = DEFAULT_BUDGET,
    upper_bound: Optional[int] = None,
) -> int:
    """True optimum over ALL feasible routings, waiting included.

    Enumerates path multisets (trains are identical, so assignments are
    nondecreasing index tuples) and solves each multiset exactly via the
    per-arc order search.  ``upper_bound`` must be the makespan of some
    feasible routing; it seeds pruning and is returned when nothing beats
    it.
    """
    g, d, delta = inst.graph, inst.trains, inst.delta
    if g.m > budget.max_arcs:
        raise BudgetExceededError(f"{g.m} arcs exceed budget {budget.max_arcs}")
    if d > budget.max_d:
        raise BudgetExceededError(f"d={d} exceeds budget {budget.max_d}")
    paths = all_simple_st_paths(g, budget)
    taus = {arc.id: arc.tau for arc in g.arcs}
    lengths = [sum(taus[a] for a in p) for p in paths]
    dist = min(lengths)
    horizon = dist + d * delta
    if horizon > budget.max_horizon:
        raise BudgetExceededError(f"horizon {horizon} exceeds budget {budget.max_horizon}")

    dist_s = _dijkstra(g, g.source)
    dist_t = _dijkstra(g, g.sink, reverse=True)
    counter = _ExpansionCounter(budget.max_expansions)

    # single file on one shortest path is always feasible
    best = dist + (d - 1) * delta
    if upper_bound is not None:
        best = min(best, upper_bound)

    counts: dict[ArcId, int] = {}
    chosen: list[int] = []

    def congestion_lb() -> int:
        worst = max((lengths[i] for i in chosen), default=0)
        for a, c in counts.items():
            if c >= 2:
                arc = g.arc(a)
                worst = max(
                    worst, dist_s[arc.tail] + (c - 1) * delta + arc.tau + dist_t[arc.head]
                )
        return worst

    def rec(start: int, remaining: int) -> None:
        nonlocal best
        counter.tick()
        if congestion_lb() >= best:
            return
        if remaining == 0:
            ms = _min_makespan_fixed_paths(
                [paths[i] for i in chosen], taus, delta, best, counter
            )
            if ms is not None:
                best = ms
            return
        for i in range(start, len(paths)):
            chosen.append(i)
            for a in paths[i]:
                counts[a] = counts.get(a, 0) + 1
            rec(i, remaining - 1)
            for a in paths[i]:
                counts[a] -= 1
                if counts[a] == 0:
                    del counts[a]
            chosen.pop()

    rec(0, d)
    return best


# ---------------------------------------------------------------------------
# time-expanded max flow


def time_expanded_maxflow(
    g: Digraph,
    horizon: int,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> int:
    """Exact max flow over time via a time-expanded static max flow.

    Time layers 0..horizon-1, one unit-capacity copy of every arc per
    entry time whose arrival still fits the horizon, free waiting at
    nodes.  Matches the fixed horizon convention value(T) =
    sum max(0, T - tau(P)).
    """
    if horizon > budget.max_horizon:
        raise BudgetExceededError(f"horizon {horizon} exceeds budget {budget.max_horizon}")
    if horizon <= 0:
        return 0
    if horizon * g.n > budget.max_state_nodes:
        raise BudgetExceededError("time-expanded graph exceeds the state budget")

    # node numbering: (v, theta) -> v*horizon + theta; SRC, SNK appended
    def nid(v: int, theta: int) -> int:
        return v * horizon + theta

    SRC = g.n * horizon
    SNK = SRC + 1
    INF = g.m * horizon + 1

    cap: dict[tuple[int, int], int] = {}
    adj: dict[int, list[int]] = {}

    def add(u: int, v: int, c: int) -> None:
        if (u, v) not in cap:
            cap[(u, v)] = 0
            cap.setdefault((v, u), cap.get((v, u), 0))
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        cap[(u, v)] += c

    add(SRC, nid(g.source, 0), INF)
    for v in g.nodes:
        for theta in range(horizon - 1):
            add(nid(v, theta), nid(v, theta + 1), INF)
    for arc in g.arcs:
        for theta in range(horizon - arc.tau):
            add(nid(arc.tail, theta), nid(arc.head, theta + arc.tau), 1)
    for theta in range(horizon):
        add(nid(g.sink, theta), SNK, INF)

    # Edmonds-Karp with deterministic adjacency order
    for u in adj:
        adj[u].sort()
    flow = 0
    while True:
        parent: dict[int, int] = {SRC: SRC}
        queue = [SRC]
        while queue:
            u = queue.pop(0)
            if u == SNK:
                break
            for v in adj.get(u, ()):
                if v not in parent and cap.get((u, v), 0) > 0:
                    parent[v] = u
                    queue.append(v)
        if SNK not in parent:
            return flow
        # unit bottleneck is enough (all paths cross a capacity-1 copy)
        v = SNK
        bottleneck = INF
        while v != SRC:
            u = parent[v]
            bottleneck = min(bottleneck, cap[(u, v)])
            v = u
        v = SNK
        while v != SRC:
            u = parent[v]
            cap[(u, v)] -= bottleneck
            cap[(v, u)] = cap.get((v, u), 0) + bottleneck
            v = u
        flow += bottleneck
