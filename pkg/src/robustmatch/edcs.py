"""Bounded edge-degree subgraphs and underfull edges.

For a subgraph ``H`` the edge-degree of ``(u, v)`` is ``d_H(u) + d_H(v)``.
``H`` has bounded edge-degree ``beta`` when every edge of ``H`` has
edge-degree at most ``beta``; an edge outside ``H`` is underfull when its
edge-degree is strictly below ``(1 - lam) * beta``.

Thresholds are compared as exact rationals. Float parameters are read via
their shortest decimal repr, so ``lam=0.1`` means exactly 1/10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Optional, Union

import numpy as np

from .graph import EdgeSubset, GraphError

__all__ = [
    "EdcsParams",
    "BoundedSubgraph",
    "ParameterError",
    "build_bounded_subgraph",
    "underfull_edges",
    "verify_bounded_degree",
    "edge_degrees",
    "exact",
]

THEORY = "theory"
PRACTICAL = "practical"


class ParameterError(ValueError):
    pass


def exact(value: Real) -> Fraction:
    """Exact rational for a parameter; floats go through their repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class EdcsParams:
    """The ``(epsilon, lam, beta)`` bundle.

    ``mode="theory"`` enforces ``lam <= epsilon/384`` and
    ``beta >= 50 lam^-2 ln(1/lam)``, the regime in which ``H`` plus its
    underfull edges is guaranteed to hold a (2/3 - epsilon)-approximate
    matching. ``mode="practical"`` only asks for ``0 < lam < 1``,
    ``beta >= 4`` and ``lam * beta >= 1``; results there are heuristic.
    """

    epsilon: float
    lam: float
    beta: int
    mode: str = PRACTICAL

    def __post_init__(self) -> None:
        eps, lam = exact(self.epsilon), exact(self.lam)
        if not 0 < eps <= Fraction(1, 2):
            raise ParameterError(f"epsilon must lie in (0, 1/2], got {self.epsilon}")
        if int(self.beta) != self.beta:
            raise ParameterError(f"beta must be an integer, got {self.beta}")
        if self.mode == THEORY:
            if not 0 < lam <= eps / 384:
                raise ParameterError(f"theory mode needs 0 < lam <= epsilon/384, got lam={self.lam}")
            need = 50 * float(lam) ** -2 * math.log(1 / float(lam))
            if self.beta < need:
                raise ParameterError(f"theory mode needs beta >= {need:.6g}, got {self.beta}")
        elif self.mode == PRACTICAL:
            if not 0 < lam < 1:
                raise ParameterError(f"lam must lie in (0, 1), got {self.lam}")
            if self.beta < 4:
                raise ParameterError(f"beta must be at least 4, got {self.beta}")
            # Keeps the add threshold at most beta - 1, which the
            # termination argument of the fixing loop needs.
            if lam * self.beta < 1:
                raise ParameterError(f"practical mode needs lam * beta >= 1, got {float(lam * self.beta)}")
        else:
            raise ParameterError(f"unknown mode {self.mode!r}")

    @property
    def heuristic(self) -> bool:
        return self.mode != THEORY

    @property
    def underfull_threshold(self) -> Fraction:
        return (1 - exact(self.lam)) * self.beta

    def as_dict(self) -> dict:
        return {"epsilon": self.epsilon, "lam": self.lam, "beta": self.beta, "mode": self.mode}


@dataclass(frozen=True)
class BoundedSubgraph:
    h: EdgeSubset
    beta: int
    max_edge_degree: int
    steps: int = 0

    def __len__(self) -> int:
        return len(self.h)


def _max_sum_below(threshold: Real) -> int:
    """Largest integer edge-degree that is strictly below ``threshold``."""
    return math.ceil(exact(threshold)) - 1


def edge_degrees(edges: EdgeSubset, h: EdgeSubset) -> np.ndarray:
    """``d_H(u) + d_H(v)`` for each edge of ``edges``, in id order."""
    if not len(edges):
        return np.zeros(0, dtype=np.int64)
    deg = h.degrees()
    arr = edges.graph.edge_array()[list(edges.ids)]
    return deg[arr[:, 0]] + deg[arr[:, 1]]


def build_bounded_subgraph(
    sample: EdgeSubset, params: EdcsParams, rng: np.random.Generator
) -> BoundedSubgraph:
    """Local fixing over a seeded random order of ``sample``.

    Each pass visits the sample edges in one fixed shuffled order, dropping
    any ``H`` edge whose edge-degree exceeds ``beta`` and adding any other
    edge whose edge-degree is below ``(1 - lam) * beta``; passes repeat until
    nothing changes. The potential ``(2 beta - 1)|H| - sum_v d_H(v)^2``
    rises by at least one per change and never exceeds
    ``(2 beta - 1) |sample|``, which bounds the number of changes.
    """
    g = sample.graph
    beta = int(params.beta)
    add_max = _max_sum_below(params.underfull_threshold)
    ids = list(sample.ids)
    order = [ids[i] for i in rng.permutation(len(ids))]
    edges = g.edges
    deg = [0] * g.num_vertices
    in_h: set[int] = set()
    steps = 0
    changed = True
    while changed:
        changed = False
        for eid in order:
            u, v = edges[eid]
            s = deg[u] + deg[v]
            if eid in in_h:
                if s > beta:
                    in_h.discard(eid)
                    deg[u] -= 1
                    deg[v] -= 1
                    steps += 1
                    changed = True
            elif s <= add_max:
                in_h.add(eid)
                deg[u] += 1
                deg[v] += 1
                steps += 1
                changed = True
    h = EdgeSubset(g, in_h)
    worst = max((deg[edges[e][0]] + deg[edges[e][1]] for e in in_h), default=0)
    return BoundedSubgraph(h=h, beta=beta, max_edge_degree=worst, steps=steps)


def underfull_edges(
    candidates: EdgeSubset,
    h: Union[BoundedSubgraph, EdgeSubset],
    params: EdcsParams,
    threshold: Optional[Real] = None,
) -> EdgeSubset:
    """Candidate edges whose ``H``-edge-degree is strictly below ``threshold``.

    The default threshold is ``(1 - lam) * beta``. Pass ``beta - 1`` for the
    variant used by the four-layer construction.
    """
    hs = h.h if isinstance(h, BoundedSubgraph) else h
    if hs.graph is not candidates.graph:
        raise GraphError("candidates and H belong to different graphs")
    if not candidates.members.isdisjoint(hs.members):
        raise GraphError("candidate edges overlap H")
    thr = params.underfull_threshold if threshold is None else threshold
    sums = edge_degrees(candidates, hs)
    keep = np.flatnonzero(sums <= _max_sum_below(thr))
    ids = candidates.ids
    return EdgeSubset(candidates.graph, (ids[i] for i in keep))


def verify_bounded_degree(h: Union[BoundedSubgraph, EdgeSubset], beta: int) -> bool:
    hs = h.h if isinstance(h, BoundedSubgraph) else h
    sums = edge_degrees(hs, hs)
    return bool(np.all(sums <= beta))
