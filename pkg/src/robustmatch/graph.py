"""Immutable simple graphs, edge subsets and matchings.

Edges are stored once in canonical ``(min, max)`` orientation. An edge id is
the position of the edge in ``Graph.edges``; ids are therefore stable for a
given input order, which keeps seeded experiments reproducible.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from typing import Optional

import numpy as np

__all__ = [
    "Graph",
    "EdgeSubset",
    "Matching",
    "GraphError",
    "degree_in",
    "remove_vertices",
    "is_vertex_cover",
]


class GraphError(ValueError):
    """Raised when an edge list violates the simple-graph invariants."""


class Graph:
    """An undirected simple graph on vertices ``0 .. num_vertices - 1``.

    ``left`` optionally labels one side of a bipartition; every edge must then
    have exactly one endpoint in ``left``.
    """

    __slots__ = ("num_vertices", "edges", "left", "_index", "_adj", "_array")

    def __init__(
        self,
        num_vertices: int,
        edges: Iterable[tuple[int, int]],
        left: Optional[Iterable[int]] = None,
    ):
        n = int(num_vertices)
        if n < 0:
            raise GraphError(f"negative vertex count {n}")
        canon: list[tuple[int, int]] = []
        index: dict[tuple[int, int], int] = {}
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
            e = (u, v) if u < v else (v, u)
            if e in index:
                raise GraphError(f"parallel edge {e} (first seen as edge id {index[e]})")
            index[e] = len(canon)
            canon.append(e)
        self.num_vertices = n
        self.edges: tuple[tuple[int, int], ...] = tuple(canon)
        self._index = index
        self._adj: Optional[list[list[tuple[int, int]]]] = None
        self._array: Optional[np.ndarray] = None
        if left is not None:
            lset = frozenset(int(v) for v in left)
            for v in lset:
                if not 0 <= v < n:
                    raise GraphError(f"bipartition label for unknown vertex {v}")
            for u, v in canon:
                if (u in lset) == (v in lset):
                    raise GraphError(f"edge ({u}, {v}) does not cross the bipartition")
            self.left: Optional[frozenset[int]] = lset
        else:
            self.left = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def is_bipartite_labeled(self) -> bool:
        return self.left is not None

    def __len__(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        tag = ", bipartite" if self.left is not None else ""
        return f"Graph(n={self.num_vertices}, m={self.num_edges}{tag})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_vertices == other.num_vertices
            and self.edges == other.edges
            and self.left == other.left
        )

    def __hash__(self) -> int:
        return hash((self.num_vertices, self.edges, self.left))

    def edge_id(self, u: int, v: int) -> int:
        """Id of edge ``{u, v}``; raises ``KeyError`` if absent."""
        return self._index[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._index

    @property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per-vertex list of ``(neighbour, edge_id)`` in increasing edge id."""
        if self._adj is None:
            adj: list[list[tuple[int, int]]] = [[] for _ in range(self.num_vertices)]
            for eid, (u, v) in enumerate(self.edges):
                adj[u].append((v, eid))
                adj[v].append((u, eid))
            self._adj = adj
        return self._adj

    def edge_array(self) -> np.ndarray:
        """Edges as a read-only ``(m, 2)`` int64 array."""
        if self._array is None:
            arr = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
            arr.flags.writeable = False
            self._array = arr
        return self._array

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def all_edges(self) -> EdgeSubset:
        return EdgeSubset(self, range(self.num_edges))

    def subset(self, edge_ids: Iterable[int]) -> EdgeSubset:
        return EdgeSubset(self, edge_ids)


class EdgeSubset:
    """A set of edge ids of a parent graph.

    Iteration yields edge ids in increasing order. Adjacency restricted to
    the subset is built lazily, after which ``incident`` runs in O(degree).
    """

    __slots__ = ("graph", "ids", "_members", "_adj")

    def __init__(self, graph: Graph, edge_ids: Iterable[int] = ()):
        members = frozenset(int(e) for e in edge_ids)
        m = graph.num_edges
        for e in members:
            if not 0 <= e < m:
                raise GraphError(f"edge id {e} not in parent graph with {m} edges")
        self.graph = graph
        self._members = members
        self.ids: tuple[int, ...] = tuple(sorted(members))
        self._adj: Optional[dict[int, list[int]]] = None

    def __contains__(self, eid: object) -> bool:
        return eid in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeSubset):
            return NotImplemented
        return self.graph is other.graph and self._members == other._members

    def __hash__(self) -> int:
        return hash(self._members)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({len(self)} of {self.graph.num_edges} edges)"

    @property
    def members(self) -> frozenset[int]:
        return self._members

    def endpoints(self, eid: int) -> tuple[int, int]:
        return self.graph.edges[eid]

    def pairs(self) -> list[tuple[int, int]]:
        edges = self.graph.edges
        return [edges[e] for e in self.ids]

    def incident(self, v: int) -> list[int]:
        """Edge ids of the subset incident to ``v``."""
        if self._adj is None:
            adj: dict[int, list[int]] = {}
            edges = self.graph.edges
            for e in self.ids:
                u, w = edges[e]
                adj.setdefault(u, []).append(e)
                adj.setdefault(w, []).append(e)
            self._adj = adj
        return self._adj.get(v, [])

    def degrees(self) -> np.ndarray:
        """Degree of every parent vertex within the subset."""
        deg = np.zeros(self.graph.num_vertices, dtype=np.int64)
        if self.ids:
            arr = self.graph.edge_array()[list(self.ids)]
            np.add.at(deg, arr.ravel(), 1)
        return deg

    def vertices(self) -> frozenset[int]:
        edges = self.graph.edges
        return frozenset(v for e in self.ids for v in edges[e])

    def _check_same(self, other: EdgeSubset) -> None:
        if other.graph is not self.graph:
            raise GraphError("edge subsets belong to different graphs")

    def union(self, *others: EdgeSubset) -> EdgeSubset:
        members = set(self._members)
        for o in others:
            self._check_same(o)
            members |= o._members
        return EdgeSubset(self.graph, members)

    def difference(self, other: EdgeSubset) -> EdgeSubset:
        self._check_same(other)
        return EdgeSubset(self.graph, self._members - other._members)

    def intersection(self, other: EdgeSubset) -> EdgeSubset:
        self._check_same(other)
        return EdgeSubset(self.graph, self._members & other._members)

    __or__ = union
    __sub__ = difference
    __and__ = intersection

    def to_graph(self) -> tuple[Graph, list[int]]:
        """Standalone graph on the same vertex set plus the local-to-parent id map."""
        g = self.graph
        sub = Graph(g.num_vertices, self.pairs())
        if g.left is not None:
            sub = _with_left(sub, g.left)
        return sub, list(self.ids)


def _with_left(g: Graph, left: frozenset[int]) -> Graph:
    # Subgraph of an already-validated bipartite graph: skip re-validation.
    g.left = left
    return g


class Matching(EdgeSubset):
    """An edge subset whose edges are pairwise vertex-disjoint."""

    __slots__ = ("mate",)

    def __init__(self, graph: Graph, edge_ids: Iterable[int] = ()):
        super().__init__(graph, edge_ids)
        mate: dict[int, int] = {}
        for e in self.ids:
            u, v = graph.edges[e]
            if u in mate or v in mate:
                w = u if u in mate else v
                raise GraphError(f"edges share vertex {w}; not a matching")
            mate[u] = v
            mate[v] = u
        self.mate = mate

    def covers(self, v: int) -> bool:
        return v in self.mate

    @classmethod
    def from_subset(cls, subset: EdgeSubset) -> Matching:
        return cls(subset.graph, subset.ids)


def degree_in(subset: EdgeSubset, v: int) -> int:
    """Number of edges of ``subset`` incident to ``v``."""
    if not 0 <= v < subset.graph.num_vertices:
        raise GraphError(f"vertex {v} out of range")
    return len(subset.incident(v))


def remove_vertices(g: Graph, removed: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Induced subgraph on ``V \\ removed`` with vertices renumbered compactly.

    Returns the new graph and the map old id -> new id for surviving
    vertices. Bipartition labels are carried over.
    """
    gone = set(int(v) for v in removed)
    for v in gone:
        if not 0 <= v < g.num_vertices:
            raise GraphError(f"vertex {v} out of range")
    mapping: dict[int, int] = {}
    for v in range(g.num_vertices):
        if v not in gone:
            mapping[v] = len(mapping)
    edges = [(mapping[u], mapping[v]) for u, v in g.edges if u not in gone and v not in gone]
    left = None
    if g.left is not None:
        left = [mapping[v] for v in g.left if v not in gone]
    return Graph(len(mapping), edges, left), mapping


def is_vertex_cover(subset: EdgeSubset | Graph, cover: Iterable[int]) -> bool:
    """True iff every edge of ``subset`` has an endpoint in ``cover``."""
    s = set(cover)
    if isinstance(subset, Graph):
        pairs: Iterable[tuple[int, int]] = subset.edges
    else:
        pairs = subset.pairs()
    return all(u in s or v in s for u, v in pairs)
