"""Exact maximum-cardinality matching and fractional-matching checks.

Three independent solvers live here: Hopcroft-Karp for labelled bipartite
graphs, Edmonds' blossom algorithm for general graphs, and an exhaustive
branch-and-bound used as a test oracle. All of them accept either a
``Graph`` or an ``EdgeSubset`` and return a ``Matching`` over the parent
graph's edge ids.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Mapping, Union

from .graph import EdgeSubset, Graph, GraphError, Matching

__all__ = [
    "FractionalMatching",
    "BlossomCheckReport",
    "SolverCapExceeded",
    "max_matching_bipartite",
    "bipartite_matching_with_cover",
    "max_matching_general",
    "max_matching_bruteforce",
    "max_matching",
    "matching_number",
    "check_blossom_inequalities",
    "fractional_size",
]

GraphLike = Union[Graph, EdgeSubset]

BRUTEFORCE_EDGE_CAP = 40
BLOSSOM_SMAX_LIMIT = 9


class SolverCapExceeded(ValueError):
    """The exhaustive solver refused an instance above its edge cap."""


def _view(obj: GraphLike) -> tuple[Graph, list[list[tuple[int, int]]], list[int]]:
    """Parent graph, adjacency restricted to ``obj`` and its sorted edge ids."""
    if isinstance(obj, Graph):
        return obj, obj.adjacency, list(range(obj.num_edges))
    g = obj.graph
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.num_vertices)]
    for eid in obj.ids:
        u, v = g.edges[eid]
        adj[u].append((v, eid))
        adj[v].append((u, eid))
    return g, adj, list(obj.ids)


def _greedy(g: Graph, ids: Iterable[int], mate: list[int], mate_edge: list[int]) -> None:
    for eid in ids:
        u, v = g.edges[eid]
        if mate[u] < 0 and mate[v] < 0:
            mate[u], mate[v] = v, u
            mate_edge[u] = mate_edge[v] = eid


def _to_matching(g: Graph, mate_edge: list[int]) -> Matching:
    return Matching(g, {e for e in mate_edge if e >= 0})


# ---------------------------------------------------------------------------
# Hopcroft-Karp


def _hopcroft_karp(g: Graph, adj, ids) -> list[int]:
    if g.left is None:
        raise GraphError("bipartite solver needs bipartition labels")
    n = g.num_vertices
    left = sorted(g.left)
    mate = [-1] * n
    mate_edge = [-1] * n
    _greedy(g, ids, mate, mate_edge)
    INF = n + 1
    dist = [INF] * n

    def bfs() -> bool:
        q = deque()
        for u in left:
            if mate[u] < 0:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        found = False
        while q:
            u = q.popleft()
            for v, _ in adj[u]:
                w = mate[v]
                if w < 0:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(root: int) -> bool:
        # Iterative layered DFS; ``it`` keeps the per-vertex adjacency cursor.
        stack = [root]
        path: list[tuple[int, int, int]] = []
        while stack:
            u = stack[-1]
            advanced = False
            while it[u] < len(adj[u]):
                v, eid = adj[u][it[u]]
                it[u] += 1
                w = mate[v]
                if w < 0:
                    path.append((u, v, eid))
                    for a, b, e in path:
                        mate[a], mate[b] = b, a
                        mate_edge[a] = mate_edge[b] = e
                    return True
                if dist[w] == dist[u] + 1:
                    path.append((u, v, eid))
                    stack.append(w)
                    advanced = True
                    break
            if not advanced:
                dist[u] = INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        it = [0] * n
        for u in left:
            if mate[u] < 0:
                dfs(u)
    return mate_edge


def max_matching_bipartite(g: GraphLike) -> Matching:
    """Maximum matching of a graph carrying bipartition labels (Hopcroft-Karp)."""
    parent, adj, ids = _view(g)
    return _to_matching(parent, _hopcroft_karp(parent, adj, ids))


def bipartite_matching_with_cover(g: GraphLike) -> tuple[Matching, frozenset[int]]:
    """Maximum matching plus a minimum vertex cover of the same size (Konig)."""
    parent, adj, ids = _view(g)
    mate_edge = _hopcroft_karp(parent, adj, ids)
    matching = _to_matching(parent, mate_edge)
    mate = matching.mate
    left = parent.left
    assert left is not None
    # Alternating reachability from free left vertices.
    seen: set[int] = set()
    q = deque(u for u in sorted(left) if u not in mate and adj[u])
    seen.update(q)
    while q:
        u = q.popleft()
        for v, _ in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            w = mate.get(v)
            if w is not None and w not in seen:
                seen.add(w)
                q.append(w)
    touched = {v for v in range(parent.num_vertices) if adj[v]}
    cover = frozenset(
        v for v in touched if (v in left and v not in seen) or (v not in left and v in seen)
    )
    return matching, cover


# ---------------------------------------------------------------------------
# Edmonds' blossom algorithm


def _edmonds(g: Graph, adj, ids) -> list[int]:
    n = g.num_vertices
    mate = [-1] * n
    mate_edge = [-1] * n
    _greedy(g, ids, mate, mate_edge)
    # Vertices of a failed (Hungarian) search tree can never lie on a later
    # augmenting path, so they are skipped from then on.
    dead = [False] * n

    def search(root: int) -> bool:
        parent = [-1] * n
        base = list(range(n))
        queued = [False] * n
        queued[root] = True
        tree = [root]  # every vertex reached so far, odd or even
        members: dict[int, list[int]] = {}  # base -> vertices of its blossom
        q = deque([root])

        def lca(a: int, b: int) -> int:
            marked = set()
            while True:
                a = base[a]
                marked.add(a)
                if mate[a] < 0:
                    break
                a = parent[mate[a]]
            while True:
                b = base[b]
                if b in marked:
                    return b
                b = parent[mate[b]]

        def mark_path(v: int, b: int, child: int, blossom: set) -> None:
            while base[v] != b:
                blossom.add(base[v])
                blossom.add(base[mate[v]])
                parent[v] = child
                child = mate[v]
                v = parent[mate[v]]

        while q:
            v = q.popleft()
            for to, _ in adj[v]:
                if dead[to] or base[v] == base[to] or mate[v] == to:
                    continue
                if to == root or (mate[to] >= 0 and parent[mate[to]] >= 0):
                    cur = lca(v, to)
                    blossom: set[int] = set()
                    mark_path(v, cur, to, blossom)
                    mark_path(to, cur, v, blossom)
                    into = members.setdefault(cur, [cur])
                    for b in blossom:
                        if b == cur:
                            continue
                        for i in members.pop(b, (b,)):
                            base[i] = cur
                            into.append(i)
                            if not queued[i]:
                                queued[i] = True
                                q.append(i)
                elif parent[to] < 0:
                    parent[to] = v
                    if mate[to] < 0:
                        _augment(to, parent, mate, mate_edge, g)
                        return True
                    w = mate[to]
                    tree.append(to)
                    tree.append(w)
                    queued[w] = True
                    q.append(w)
        for i in tree:
            dead[i] = True
        return False

    for root in range(n):
        if mate[root] < 0 and adj[root]:
            search(root)
    return mate_edge


def _augment(v: int, parent, mate, mate_edge, g: Graph) -> None:
    while v >= 0:
        pv = parent[v]
        ppv = mate[pv]
        eid = g.edge_id(v, pv)
        mate[v], mate[pv] = pv, v
        mate_edge[v] = mate_edge[pv] = eid
        v = ppv


def max_matching_general(g: GraphLike) -> Matching:
    """Maximum matching of an arbitrary graph (Edmonds' blossom algorithm).

    Starts from the greedy matching in edge-id order and grows alternating
    trees from free vertices in increasing id, scanning neighbours in edge-id
    order, so the returned matching is a deterministic function of the input.
    """
    parent, adj, ids = _view(g)
    return _to_matching(parent, _edmonds(parent, adj, ids))


def max_matching(g: GraphLike) -> Matching:
    """Exact maximum matching, dispatching on the presence of bipartition labels."""
    parent = g if isinstance(g, Graph) else g.graph
    if parent.left is not None:
        return max_matching_bipartite(g)
    return max_matching_general(g)


def matching_number(g: GraphLike) -> int:
    return len(max_matching(g))


# ---------------------------------------------------------------------------
# Exhaustive oracle


def max_matching_bruteforce(g: GraphLike, cap: int = BRUTEFORCE_EDGE_CAP) -> Matching:
    """Optimal matching by branch-and-bound over edge inclusion.

    Starts from the greedy matching as incumbent and prunes a branch when the
    chosen edges plus half the free vertices still touched by undecided edges
    cannot beat it. Refuses inputs with more than ``cap`` edges.
    """
    parent, _, ids = _view(g)
    m = len(ids)
    if m > cap:
        raise SolverCapExceeded(f"{m} edges exceeds brute-force cap {cap}")
    masks = [(1 << parent.edges[e][0]) | (1 << parent.edges[e][1]) for e in ids]
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] | masks[i]

    best: list[int] = []
    used = 0
    for i, mask in enumerate(masks):
        if not used & mask:
            used |= mask
            best.append(i)

    chosen: list[int] = []

    def dfs(i: int, used: int) -> None:
        nonlocal best
        free = bin(suffix[i] & ~used).count("1") // 2
        if len(chosen) + min(free, m - i) <= len(best):
            return
        if i == m:
            best = list(chosen)
            return
        mask = masks[i]
        if not used & mask:
            chosen.append(i)
            dfs(i + 1, used | mask)
            chosen.pop()
        dfs(i + 1, used)

    dfs(0, 0)
    return Matching(parent, (ids[i] for i in best))


# ---------------------------------------------------------------------------
# Fractional matchings


class FractionalMatching:
    """Edge weights in [0, 1] over a parent graph, with per-vertex loads.

    Weights may be ``Fraction`` (exact bookkeeping) or floats. Zero weights
    are dropped from the support.
    """

    __slots__ = ("graph", "weights", "loads")

    def __init__(self, graph: Graph, weights: Mapping[int, Real]):
        w: dict[int, Real] = {}
        loads: dict[int, Real] = {}
        for eid, val in weights.items():
            if not 0 <= eid < graph.num_edges:
                raise GraphError(f"edge id {eid} not in parent graph")
            if val < 0 or val > 1:
                raise ValueError(f"weight {val} of edge {eid} outside [0, 1]")
            if val == 0:
                continue
            w[eid] = val
            u, v = graph.edges[eid]
            loads[u] = loads.get(u, 0) + val
            loads[v] = loads.get(v, 0) + val
        self.graph = graph
        self.weights = w
        self.loads = loads

    def __getitem__(self, eid: int) -> Real:
        return self.weights.get(eid, 0)

    def load(self, v: int) -> Real:
        return self.loads.get(v, 0)

    def support(self) -> EdgeSubset:
        return EdgeSubset(self.graph, self.weights)

    def is_feasible(self) -> bool:
        return all(val <= 1 for val in self.loads.values())

    @classmethod
    def indicator(cls, subset: EdgeSubset) -> FractionalMatching:
        return cls(subset.graph, {e: Fraction(1) for e in subset})

    def __repr__(self) -> str:
        return f"FractionalMatching(support={len(self.weights)}, size={float(fractional_size(self)):.4g})"


def fractional_size(x: FractionalMatching) -> Real:
    """Total weight."""
    return sum(x.weights.values(), start=0)


@dataclass
class BlossomCheckReport:
    s_max: int
    tolerance: Real
    violations: list[tuple[frozenset[int], Real]] = field(default_factory=list)
    sets_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def max_excess(self) -> Real:
        return max((exc for _, exc in self.violations), default=0)


def check_blossom_inequalities(
    x: FractionalMatching, s_max: int = 7, tolerance: Real = 0
) -> BlossomCheckReport:
    """Report odd vertex sets ``S`` (3 <= |S| <= s_max) with
    ``sum_{e in G[S]} x_e > floor(|S|/2) + tolerance``.

    Only sets that are connected in the support of ``x`` are enumerated. When
    every vertex load is at most 1 this loses nothing: the excess of an odd
    set is at most the largest excess among its odd support-components,
    since even components have non-positive excess and each extra pair of
    odd components raises the floor by one while contributing at most 1/2
    apiece.

    A subtree of the enumeration is cut once ``sum_{u in S} x_u`` falls to
    ``|S| - 1 + 2 * tolerance``: with loads at most 1 that deficit only
    grows, and no superset can then violate.
    """
    if not 3 <= s_max <= BLOSSOM_SMAX_LIMIT:
        raise ValueError(f"s_max must lie in [3, {BLOSSOM_SMAX_LIMIT}], got {s_max}")
    g = x.graph
    nbr: dict[int, dict[int, Real]] = {}
    for eid, val in x.weights.items():
        u, v = g.edges[eid]
        nbr.setdefault(u, {})[v] = val
        nbr.setdefault(v, {})[u] = val
    loads = x.loads
    can_prune = all(val <= 1 for val in loads.values())
    report = BlossomCheckReport(s_max=s_max, tolerance=tolerance)
    cut = 2 * tolerance - 1

    def extend(sub: list[int], subset: set[int], ext: list[int], root: int, inner, load_sum):
        size = len(sub)
        if size >= 3 and size % 2 == 1:
            report.sets_checked += 1
            excess = inner - size // 2
            if excess > tolerance:
                report.violations.append((frozenset(sub), excess))
        if size == s_max:
            return
        if can_prune and size >= 1 and load_sum - size <= cut:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            # Exclusive neighbourhood of w: not in S and not adjacent to S.
            new_ext = list(ext)
            seen_ext = set(ext)
            for u in nbr[w]:
                if u > root and u not in subset and u not in seen_ext:
                    if not any(s in nbr[u] for s in sub):
                        new_ext.append(u)
                        seen_ext.add(u)
            gain = sum((nbr[w][s] for s in sub if s in nbr[w]), start=0)
            sub.append(w)
            subset.add(w)
            extend(sub, subset, new_ext, root, inner + gain, load_sum + loads.get(w, 0))
            sub.pop()
            subset.discard(w)

    for v in sorted(nbr):
        ext = sorted((u for u in nbr[v] if u > v), reverse=True)
        extend([v], {v}, ext, v, 0, loads.get(v, 0))
    report.violations.sort(key=lambda item: (sorted(item[0])))
    return report
