"""Instance families: the layered tight examples and random benchmark graphs.

Layered graphs are bipartite. Left groups ``A_1 .. A_g`` and right groups
``B_1 .. B_g`` all have ``m`` vertices; ``A_i``-``B_i`` carries a perfect
matching ``M_i`` and ``A_i``-``B_{i+1}`` is a complete bipartite block
``K_i``. Groups are 1-indexed in names and 0-indexed in code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import EdgeSubset, Graph

__all__ = [
    "LayeredSpec",
    "gen_three_layer",
    "gen_four_layer",
    "gen_layered",
    "adversarial_h",
    "gen_random",
    "RANDOM_FAMILIES",
]

RANDOM_FAMILIES = ("gnp", "bipartite-gnp", "planted-matching")


@dataclass(frozen=True)
class LayeredSpec:
    groups: int
    m: int

    @property
    def num_vertices(self) -> int:
        return 2 * self.groups * self.m

    def a(self, i: int) -> range:
        """Vertices of left group ``A_{i+1}``."""
        return range(i * self.m, (i + 1) * self.m)

    def b(self, i: int) -> range:
        """Vertices of right group ``B_{i+1}``."""
        off = self.groups * self.m
        return range(off + i * self.m, off + (i + 1) * self.m)

    @property
    def left(self) -> range:
        return range(0, self.groups * self.m)

    def matching_pairs(self, i: int) -> list[tuple[int, int]]:
        return list(zip(self.a(i), self.b(i)))

    def block_pairs(self, i: int) -> list[tuple[int, int]]:
        return [(u, v) for u in self.a(i) for v in self.b(i + 1)]

    def matching(self, g: Graph, i: int) -> EdgeSubset:
        """``M_{i+1}`` as an edge subset of ``g``."""
        return EdgeSubset(g, (g.edge_id(u, v) for u, v in self.matching_pairs(i)))

    def block(self, g: Graph, i: int) -> EdgeSubset:
        """``K_{i+1}`` as an edge subset of ``g``."""
        return EdgeSubset(g, (g.edge_id(u, v) for u, v in self.block_pairs(i)))

    def to_dict(self) -> dict:
        return {
            "family": f"{self.groups}-layer",
            "groups": self.groups,
            "m": self.m,
            "A": [list(self.a(i)) for i in range(self.groups)],
            "B": [list(self.b(i)) for i in range(self.groups)],
            "matchings": [f"A{i + 1}-B{i + 1}" for i in range(self.groups)],
            "blocks": [f"A{i + 1}-B{i + 2}" for i in range(self.groups - 1)],
        }


def gen_layered(groups: int, m: int) -> tuple[Graph, LayeredSpec]:
    if groups < 2:
        raise ValueError(f"need at least 2 groups, got {groups}")
    if m < 1:
        raise ValueError(f"group size must be positive, got {m}")
    spec = LayeredSpec(groups, m)
    edges: list[tuple[int, int]] = []
    for i in range(groups):
        edges.extend(spec.matching_pairs(i))
    for i in range(groups - 1):
        edges.extend(spec.block_pairs(i))
    return Graph(spec.num_vertices, edges, left=spec.left), spec


def gen_three_layer(m: int) -> tuple[Graph, LayeredSpec]:
    """Three groups per side: ``M_1, M_2, M_3`` plus blocks ``K_1, K_2``."""
    return gen_layered(3, m)


def gen_four_layer(m: int) -> tuple[Graph, LayeredSpec]:
    """Four groups per side: ``M_1 .. M_4`` plus blocks ``K_1, K_2, K_3``."""
    return gen_layered(4, m)


def adversarial_h(
    g: Graph,
    spec: LayeredSpec,
    beta: int,
    rng: Optional[np.random.Generator] = None,
    k: Optional[int] = None,
) -> EdgeSubset:
    """A ``(beta/2)``-regular subgraph of every complete block.

    Block ``A_i x B_{i+1}`` contributes the circulant edges
    ``(A_i[j], B_{i+1}[(j + s) mod m])`` for ``s < beta/2``. With ``rng`` the
    right side of each block is relabelled by a random permutation first,
    which keeps the subgraph exactly regular. When ``k`` is given on a
    three-layer instance, ``beta <= |V| / (12 k)`` is enforced.
    """
    if beta % 2:
        raise ValueError(f"beta must be even, got {beta}")
    half = beta // 2
    if half > spec.m:
        raise ValueError(f"beta/2 = {half} exceeds group size {spec.m}")
    if half < 1:
        raise ValueError("beta must be at least 2")
    if k is not None and spec.groups == 3 and beta * 12 * k > g.num_vertices:
        raise ValueError(f"beta = {beta} exceeds |V|/(12k) = {g.num_vertices / (12 * k):.3g}")
    ids = []
    for i in range(spec.groups - 1):
        a = list(spec.a(i))
        b = list(spec.b(i + 1))
        if rng is not None:
            b = [b[j] for j in rng.permutation(spec.m)]
        for j, u in enumerate(a):
            for s in range(half):
                ids.append(g.edge_id(u, b[(j + s) % spec.m]))
    return EdgeSubset(g, ids)


def _tri_decode(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Inverse of the row-major enumeration of pairs u < v.
    i = idx.astype(np.float64)
    u = n - 2 - np.floor(np.sqrt(-8 * i + 4 * n * (n - 1) - 7) / 2.0 - 0.5)
    u = u.astype(np.int64)
    v = idx + u + 1 - n * (n - 1) // 2 + (n - u) * ((n - u) - 1) // 2
    return u, v


def _sample_indices(rng: np.random.Generator, total: int, density: float) -> np.ndarray:
    if total == 0 or density <= 0:
        return np.zeros(0, dtype=np.int64)
    if density >= 1:
        return np.arange(total, dtype=np.int64)
    count = int(rng.binomial(total, density))
    return np.sort(rng.choice(total, size=count, replace=False)).astype(np.int64)


def gen_random(family: str, n: int, density: float, seed: int) -> Graph:
    """Reproducible random graph.

    ``gnp``: each pair independently with probability ``density``.
    ``bipartite-gnp``: sides ``[0, n//2)`` and ``[n//2, n)``, each cross pair
    with probability ``density``.
    ``planted-matching``: a uniformly random perfect (or near-perfect)
    matching, followed by ``gnp`` noise edges.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if not 0 <= density <= 1:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    rng = np.random.default_rng(seed)
    if family == "gnp":
        u, v = _tri_decode(_sample_indices(rng, n * (n - 1) // 2, density), n)
        return Graph(n, zip(u.tolist(), v.tolist()))
    if family == "bipartite-gnp":
        nl = n // 2
        nr = n - nl
        idx = _sample_indices(rng, nl * nr, density)
        u, v = idx // nr, nl + idx % nr
        return Graph(n, zip(u.tolist(), v.tolist()), left=range(nl))
    if family == "planted-matching":
        perm = rng.permutation(n)
        planted = [(int(perm[2 * i]), int(perm[2 * i + 1])) for i in range(n // 2)]
        seen = {(a, b) if a < b else (b, a) for a, b in planted}
        u, v = _tri_decode(_sample_indices(rng, n * (n - 1) // 2, density), n)
        noise = [(a, b) for a, b in zip(u.tolist(), v.tolist()) if (a, b) not in seen]
        return Graph(n, planted + noise)
    raise ValueError(f"unknown family {family!r}; choose from {RANDOM_FAMILIES}")
