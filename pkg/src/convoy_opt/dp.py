"""Decomposition-tree dynamic program for MinMaxDP on series-parallel graphs.

Cells are keyed by (subgraph vertex of the decomposition tree, number of
paths, total length); each holds one path profile.  Profiles are combined
by greedy composition: a series step pairs the longest path of one profile
with the shortest of the other and so on, a parallel step takes the union.
Two candidate-selection strategies are offered: "balanced" minimizes the
prefix-average score (yields a harmonic-number guarantee) and "phi"
minimizes the length spread at series vertices and the longest path at
parallel vertices (yields a guarantee driven by how often the tree
alternates from series to parallel).

All comparisons are exact: the prefix-average score is scaled by
lcm(1..k) so candidate selection works on integers, and the public
balance_score returns a Fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .errors import InfeasibleError, PreconditionError
from .graph import ArcId, ArcPath, Digraph, are_arc_disjoint, max_disjoint_paths
from .spdecomp import LEAF, PARALLEL, SERIES, SPDecompTree

Strategy = str  # "balanced" | "phi"
STRATEGIES = ("balanced", "phi")


@dataclass(frozen=True)
class PathProfile:
    """A collection of pairwise arc-disjoint paths with cached lengths.

    Paths are kept in canonical order (length descending, then arc
    sequence ascending), so ``lengths`` is the sorted-descending length
    vector aligned with ``paths``.
    """

    paths: tuple[ArcPath, ...]
    lengths: tuple[int, ...]

    @staticmethod
    def build(paths: Iterable[ArcPath], length_of: Callable[[ArcPath], int]) -> "PathProfile":
        pairs = sorted(
            ((length_of(p), p) for p in paths),
            key=lambda t: (-t[0], t[1].arcs),
        )
        return PathProfile(
            tuple(p for _, p in pairs), tuple(length for length, _ in pairs)
        )

    @staticmethod
    def from_graph(g: Digraph, paths: Iterable[ArcPath]) -> "PathProfile":
        from .graph import path_length

        return PathProfile.build(paths, lambda p: path_length(g, p))

    @property
    def k(self) -> int:
        return len(self.paths)

    @property
    def total(self) -> int:
        return sum(self.lengths)

    @property
    def value(self) -> int:
        """Length of the longest path (0 for the empty profile)."""
        return self.lengths[0] if self.lengths else 0

    def arc_key(self) -> tuple[int, ...]:
        """Concatenated arc-id sequence in canonical path order."""
        out: list[int] = []
        for p in self.paths:
            out.extend(p.arcs)
        return tuple(out)


def balance_score(profile: PathProfile | Sequence[int]) -> Fraction:
    """Largest prefix-average-minus-next value of the length vector.

    Zero for profiles with at most one path.  Exact rational arithmetic;
    the value is integral whenever all prefix sums divide evenly.
    """
    lengths = profile.lengths if isinstance(profile, PathProfile) else tuple(profile)
    best = Fraction(0)
    prefix = 0
    for i in range(1, len(lengths)):
        prefix += lengths[i - 1]
        v = Fraction(prefix, i) - lengths[i]
        if v > best:
            best = v
    return best


def greedy_series(q: PathProfile, r: PathProfile) -> PathProfile:
    """Series composition pairing by opposite rank.

    The longest path of ``q`` is glued to the shortest of ``r``, the
    second-longest to the second-shortest, and so on.  Only defined for
    equal path counts.
    """
    if q.k != r.k:
        raise PreconditionError(f"series composition needs equal counts ({q.k} vs {r.k})")
    k = q.k
    paths = []
    for i in range(k):
        left = q.paths[i]
        right = r.paths[k - 1 - i]
        paths.append((q.lengths[i] + r.lengths[k - 1 - i], ArcPath(left.arcs + right.arcs)))
    paths.sort(key=lambda t: (-t[0], t[1].arcs))
    return PathProfile(tuple(p for _, p in paths), tuple(length for length, _ in paths))


def greedy_parallel(q: PathProfile, r: PathProfile) -> PathProfile:
    """Parallel composition: plain union of the two path collections."""
    pairs = sorted(
        list(zip(q.lengths, q.paths)) + list(zip(r.lengths, r.paths)),
        key=lambda t: (-t[0], t[1].arcs),
    )
    return PathProfile(tuple(p for _, p in pairs), tuple(length for length, _ in pairs))


def harmonic(k: int) -> Fraction:
    """k-th harmonic number as an exact fraction."""
    return sum((Fraction(1, j) for j in range(1, k + 1)), Fraction(0))


# ---------------------------------------------------------------------------
# DP table


@dataclass(frozen=True)
class CellEntry:
    """Stored candidate of one cell: length vector plus reconstruction keys."""

    lengths: tuple[int, ...]
    left: Optional[tuple[int, int, int]]
    right: Optional[tuple[int, int, int]]
    leaf_arc: Optional[ArcId]


def _series_lengths(q: tuple[int, ...], r: tuple[int, ...]) -> tuple[int, ...]:
    k = len(q)
    return tuple(sorted((q[i] + r[k - 1 - i] for i in range(k)), reverse=True))


def _merge_desc(q: tuple[int, ...], r: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(q + r, reverse=True))


class DpTable:
    """Write-once cell store with lazy profile materialization."""

    def __init__(self, g: Digraph, tree: SPDecompTree, k: int, strategy: Strategy,
                 lengths: Mapping[ArcId, int]):
        self.graph = g
        self.tree = tree
        self.k = k
        self.strategy = strategy
        self.lengths = lengths
        # node index -> k' -> theta -> CellEntry
        self.cells: dict[int, dict[int, dict[int, CellEntry]]] = {}
        self._profiles: dict[tuple[int, int, int], PathProfile] = {}

    def cell(self, node: int, kk: int, theta: int) -> Optional[CellEntry]:
        return self.cells.get(node, {}).get(kk, {}).get(theta)

    def profile(self, key: tuple[int, int, int]) -> PathProfile:
        """Materialize the stored profile of a cell (memoized)."""
        cached = self._profiles.get(key)
        if cached is not None:
            return cached
        node, kk, theta = key
        entry = self.cell(node, kk, theta)
        if entry is None:
            raise KeyError(f"empty cell {key}")
        if kk == 0:
            prof = PathProfile((), ())
        elif entry.leaf_arc is not None:
            prof = PathProfile((ArcPath((entry.leaf_arc,)),), (self.lengths[entry.leaf_arc],))
        else:
            left = self.profile(entry.left)
            right = self.profile(entry.right)
            kind = self.tree.nodes[node].kind
            prof = greedy_series(left, right) if kind == SERIES else greedy_parallel(left, right)
        if prof.lengths != entry.lengths:  # pragma: no cover - internal check
            raise AssertionError("materialized profile disagrees with stored lengths")
        self._profiles[key] = prof
        return prof


def _build_table(
    g: Digraph,
    tree: SPDecompTree,
    k: int,
    strategy: Strategy,
    lengths: Mapping[ArcId, int],
    deleted: frozenset[ArcId] = frozenset(),
) -> DpTable:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if k < 1:
        raise PreconditionError("k must be >= 1")
    table = DpTable(g, tree, k, strategy, lengths)
    lcm = math.lcm(*range(1, k + 1))

    def score_of(node_kind: str, vec: tuple[int, ...]) -> int:
        if len(vec) <= 1:
            if strategy == "phi" and node_kind == PARALLEL and vec:
                return vec[0]
            return 0
        if strategy == "balanced":
            best = 0
            prefix = 0
            for i in range(1, len(vec)):
                prefix += vec[i - 1]
                v = (lcm // i) * prefix - lcm * vec[i]
                if v > best:
                    best = v
            return best
        if node_kind == SERIES:
            return vec[0] - vec[-1]
        return vec[0]

    def cand_arc_key(kind: str, left_key, right_key) -> tuple[int, ...]:
        lp = table.profile(left_key)
        rp = table.profile(right_key)
        prof = greedy_series(lp, rp) if kind == SERIES else greedy_parallel(lp, rp)
        return prof.arc_key()

    for idx, node in enumerate(tree.nodes):
        if node.kind == LEAF:
            per_k: dict[int, dict[int, CellEntry]] = {0: {0: CellEntry((), None, None, None)}}
            if node.arc not in deleted:
                L = lengths[node.arc]
                per_k[1] = {L: CellEntry((L,), None, None, node.arc)}
            table.cells[idx] = per_k
            continue

        left_cells = table.cells[node.left]
        right_cells = table.cells[node.right]
        # per key: (score, lengths, entry); arc keys only on double ties
        best: dict[tuple[int, int], tuple[int, tuple[int, ...], CellEntry]] = {}

        def consider(kk: int, theta: int, score: int, vec: tuple[int, ...],
                     left_key, right_key) -> None:
            cur = best.get((kk, theta))
            if cur is not None:
                cs, cv, ce = cur
                if (score, vec) > (cs, cv):
                    return
                if (score, vec) == (cs, cv):
                    # full tie: smallest concatenated arc-id sequence wins
                    if kk == 0 or cand_arc_key(node.kind, left_key, right_key) >= \
                            cand_arc_key(node.kind, ce.left, ce.right):
                        return
            best[(kk, theta)] = (score, vec, CellEntry(vec, left_key, right_key, None))

        if node.kind == SERIES:
            for kk, lk in left_cells.items():
                rk = right_cells.get(kk)
                if rk is None:
                    continue
                for tl, el in lk.items():
                    for tr, er in rk.items():
                        vec = _series_lengths(el.lengths, er.lengths)
                        consider(kk, tl + tr, score_of(SERIES, vec), vec,
                                 (node.left, kk, tl), (node.right, kk, tr))
        else:
            for kl, lk in left_cells.items():
                for kr, rk in right_cells.items():
                    if kl + kr > k:
                        continue
                    for tl, el in lk.items():
                        for tr, er in rk.items():
                            vec = _merge_desc(el.lengths, er.lengths)
                            consider(kl + kr, tl + tr, score_of(PARALLEL, vec), vec,
                                     (node.left, kl, tl), (node.right, kr, tr))

        per_k = {}
        for (kk, theta), (_, _, entry) in best.items():
            per_k.setdefault(kk, {})[theta] = entry
        table.cells[idx] = per_k

    return table


def _pick_best(table: DpTable, keys: list[tuple[int, int, int]]) -> PathProfile:
    """Among root cells, minimize the longest path with deterministic ties."""
    ranked = sorted(
        keys, key=lambda key: (table.cell(*key).lengths, key[2])
    )
    # lengths tuples compare lexicographically: first component is the value
    best_key = ranked[0]
    best = table.profile(best_key)
    # resolve exact length-vector ties by arc key
    for key in ranked[1:]:
        if table.cell(*key).lengths != best.lengths:
            break
        cand = table.profile(key)
        if cand.arc_key() < best.arc_key():
            best = cand
    return best


def dp_solve(
    g: Digraph,
    tree: SPDecompTree,
    k: int,
    strategy: Strategy = "balanced",
    *,
    lengths: Optional[Mapping[ArcId, int]] = None,
    deleted: frozenset[ArcId] = frozenset(),
) -> PathProfile:
    """Run the DP and return the best k-path profile over all totals.

    With exact totals (the default lazily materialized theta set), the
    returned value is at most H_k * OPT under the "balanced" strategy and
    at most (phi(D)+1) * OPT under the "phi" strategy.
    """
    if lengths is None:
        lengths = {arc.id: arc.tau for arc in g.arcs}
        if max_disjoint_paths(g) < k:
            raise InfeasibleError(f"graph supports fewer than {k} arc-disjoint s-t paths")
    table = _build_table(g, tree, k, strategy, lengths, deleted)
    root_cells = table.cells[tree.root].get(k, {})
    if not root_cells:
        raise InfeasibleError(f"no {k}-path profile exists (after deletions)")
    keys = [(tree.root, k, theta) for theta in root_cells]
    prof = _pick_best(table, keys)
    if not are_arc_disjoint(prof.paths):  # pragma: no cover - structural guarantee
        raise AssertionError("DP produced overlapping paths")
    return prof


def dp_table(
    g: Digraph,
    tree: SPDecompTree,
    k: int,
    strategy: Strategy = "balanced",
    *,
    lengths: Optional[Mapping[ArcId, int]] = None,
    deleted: frozenset[ArcId] = frozenset(),
) -> DpTable:
    """Expose the filled table (used by the invariant property tests)."""
    if lengths is None:
        lengths = {arc.id: arc.tau for arc in g.arcs}
    return _build_table(g, tree, k, strategy, lengths, deleted)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def dp_solve_rounded(
    g: Digraph,
    tree: SPDecompTree,
    k: int,
    strategy: Strategy = "balanced",
    epsilon: Fraction | str | int = Fraction(1, 2),
    *,
    exact: bool = False,
) -> PathProfile:
    """Polynomial-size DP via guessing the longest used arc and rounding.

    For every distinct arc length tau_bar: arcs longer than tau_bar are
    deleted, the rest rescaled to ceil(tau / F) with F = eps*tau_bar/m,
    the DP runs on the rounded lengths, and the resulting profile is
    evaluated under the original lengths; the best evaluation wins.
    Guarantee: (1+eps) times the strategy's exact-theta guarantee.

    ``exact=True`` is the F=1 shortcut with no deletions: it simply runs
    the exact DP once and matches ``dp_solve`` bit for bit.
    """
    eps = epsilon if isinstance(epsilon, Fraction) else Fraction(epsilon)
    if eps <= 0:
        raise PreconditionError("epsilon must be positive")
    if exact:
        return dp_solve(g, tree, k, strategy)
    if max_disjoint_paths(g) < k:
        raise InfeasibleError(f"graph supports fewer than {k} arc-disjoint s-t paths")
    m = g.m
    theta_bound = m * (_ceil_div(m * eps.denominator, eps.numerator) + 1)
    best: Optional[PathProfile] = None
    for tau_bar in sorted({arc.tau for arc in g.arcs}):
        deleted = frozenset(a.id for a in g.arcs if a.tau > tau_bar)
        if tau_bar == 0:
            rounded = {a.id: 0 for a in g.arcs if a.id not in deleted}
        else:
            # tau / F = tau * m / (eps * tau_bar), rounded up exactly
            den = eps.numerator * tau_bar
            num_scale = m * eps.denominator
            rounded = {
                a.id: _ceil_div(a.tau * num_scale, den)
                for a in g.arcs
                if a.id not in deleted
            }
        if rounded and max(rounded.values()) * m > theta_bound:  # pragma: no cover
            raise AssertionError("rounded totals exceed the stated theta bound")
        try:
            rough = dp_solve(g, tree, k, strategy, lengths=rounded, deleted=deleted)
        except InfeasibleError:
            continue
        cand = PathProfile.from_graph(g, rough.paths)
        if best is None or (cand.lengths, cand.arc_key()) < (best.lengths, best.arc_key()):
            best = cand
    if best is None:
        raise InfeasibleError(f"no {k}-path profile exists")
    return best


def subgraph_arcsets(tree: SPDecompTree) -> dict[int, frozenset[ArcId]]:
    """Arc set of the subgraph denoted by every tree vertex."""
    sets: dict[int, frozenset[ArcId]] = {}
    for idx, node in enumerate(tree.nodes):
        if node.kind == LEAF:
            sets[idx] = frozenset((node.arc,))
        else:
            sets[idx] = sets[node.left] | sets[node.right]
    return sets


def profile_trace(
    tree: SPDecompTree,
    profile: PathProfile,
    lengths: Mapping[ArcId, int],
) -> dict[int, tuple[int, int, int]]:
    """Per tree vertex: (paths crossing it, their total length, their max).

    This is the cell trace of an externally supplied profile; feeding an
    oracle-optimal profile through it yields the keys along which the DP's
    balancedness and boundedness invariants are checked.
    """
    arcsets = subgraph_arcsets(tree)
    out: dict[int, tuple[int, int, int]] = {}
    for idx in range(len(tree.nodes)):
        arcs = arcsets[idx]
        kk = 0
        total = 0
        cmax = 0
        for p in profile.paths:
            inside = [a for a in p.arcs if a in arcs]
            if inside:
                kk += 1
                sub = sum(lengths[a] for a in inside)
                total += sub
                cmax = max(cmax, sub)
        out[idx] = (kk, total, cmax)
    return out
