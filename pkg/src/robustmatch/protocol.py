"""The k-party one-way robust communication model and the EDCS protocol.

Every edge goes to one of ``k`` parties independently and uniformly. Party 0
subsamples its edges into ``E_s``, builds a bounded edge-degree subgraph
``H`` of the sample and sends ``H`` together with its underfull edges.
Each middle party appends its own underfull edges. The last party outputs a
maximum matching of its edges plus the message.

One edge is one word. Byte counts assume two fixed-width vertex ids per
edge, each ``ceil(bits(n - 1) / 8)`` bytes wide.

Randomness: a run with seed ``s`` draws the partition, the subsample and the
fixing order from ``SeedSequence([s, 0])``, ``[s, 1]`` and ``[s, 2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .edcs import EdcsParams, ParameterError, build_bounded_subgraph, exact, underfull_edges
from .graph import EdgeSubset, Graph, Matching
from .matchers import matching_number, max_matching

__all__ = [
    "EdgePartition",
    "ProtocolConfig",
    "Transcript",
    "CommunicationCost",
    "partition_edges",
    "run_two_party",
    "run_k_party",
    "communication_cost",
    "SelfBoundingFunction",
    "STREAM_PARTITION",
    "STREAM_SAMPLE",
    "STREAM_FIXING",
]

STREAM_PARTITION = 0
STREAM_SAMPLE = 1
STREAM_FIXING = 2

SeedLike = Union[int, np.random.SeedSequence]


def stream(seed: int, tag: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), tag])


@dataclass(frozen=True)
class EdgePartition:
    graph: Graph
    owner: np.ndarray
    k: int
    seed: Optional[int] = None

    def party_edges(self, i: int) -> EdgeSubset:
        return EdgeSubset(self.graph, np.flatnonzero(self.owner == i).tolist())

    def counts(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.k)

    def fractions(self) -> np.ndarray:
        m = len(self.owner)
        return self.counts() / m if m else np.zeros(self.k)


def partition_edges(g: Graph, k: int, seed: SeedLike) -> EdgePartition:
    """Assign each edge to a uniformly random party in ``[0, k)``."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    rng = np.random.default_rng(seed)
    owner = rng.integers(0, k, size=g.num_edges)
    owner.flags.writeable = False
    return EdgePartition(g, owner, k, seed if isinstance(seed, int) else None)


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol settings.

    ``p`` defaults to ``1/k``; the first party samples its edges at rate
    ``epsilon / (1 - p)``. ``fallback_edge_threshold=None`` means the
    default rule ``fallback_c * n * log2(n)``; when the first party holds at
    most that many edges, every non-last party forwards all of its edges.
    ``injected_h`` replaces the constructed ``H`` (tightness experiments).
    """

    params: EdcsParams
    k: int = 2
    p: Optional[float] = None
    fallback_edge_threshold: Optional[int] = None
    fallback_c: float = 4.0
    injected_h: Optional[EdgeSubset] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ParameterError(f"k must be at least 2, got {self.k}")
        p = self.p_effective
        if not 0 < p <= 0.5:
            raise ParameterError(f"p must lie in (0, 1/2], got {p}")
        if self.sample_rate > 1:
            raise ParameterError(f"sampling rate epsilon/(1-p) = {self.sample_rate} exceeds 1")
        if self.fallback_edge_threshold is not None and self.fallback_edge_threshold < 0:
            raise ParameterError("fallback_edge_threshold must be non-negative")

    @property
    def p_effective(self) -> float:
        return 1.0 / self.k if self.p is None else float(self.p)

    @property
    def sample_rate(self) -> float:
        return float(exact(self.params.epsilon) / (1 - exact(self.p_effective)))

    def fallback_threshold_for(self, n: int) -> int:
        if self.fallback_edge_threshold is not None:
            return self.fallback_edge_threshold
        return math.ceil(self.fallback_c * n * math.log2(n)) if n > 1 else 0


@dataclass
class Transcript:
    config: ProtocolConfig
    partition: EdgePartition
    sample: EdgeSubset
    h: EdgeSubset
    underfull: list[EdgeSubset]
    message_words: list[int]
    message_bytes: list[int]
    accessible: EdgeSubset
    output: Matching
    mu: int
    fallback_used: bool
    h_steps: int = 0

    @property
    def graph(self) -> Graph:
        return self.partition.graph

    @property
    def ratio(self) -> float:
        return len(self.output) / self.mu if self.mu else 1.0

    @property
    def injected_h(self) -> bool:
        return self.config.injected_h is not None

    def last_party_edges(self) -> EdgeSubset:
        return self.partition.party_edges(self.partition.k - 1)

    def underfull_all(self) -> EdgeSubset:
        return EdgeSubset(self.graph, set().union(*(u.members for u in self.underfull)))

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "seed": cfg.seed,
            "k": cfg.k,
            "p": cfg.p_effective,
            "params": cfg.params.as_dict(),
            "n": self.graph.num_vertices,
            "m": self.graph.num_edges,
            "sample_size": len(self.sample),
            "h_size": len(self.h),
            "underfull_sizes": [len(u) for u in self.underfull],
            "message_sizes": list(self.message_words),
            "message_bytes": list(self.message_bytes),
            "output_size": len(self.output),
            "mu": self.mu,
            "ratio": self.ratio,
            "fallback_used": self.fallback_used,
            "injected_H": self.injected_h,
        }


class CommunicationCost(NamedTuple):
    max_words: int
    per_hop: list[int]
    max_bytes: int


def communication_cost(t: Transcript) -> CommunicationCost:
    return CommunicationCost(
        max(t.message_words, default=0), list(t.message_words), max(t.message_bytes, default=0)
    )


def _bytes_per_word(n: int) -> int:
    bits = max(1, (n - 1).bit_length())
    return 2 * math.ceil(bits / 8)


def run_k_party(g: Graph, cfg: ProtocolConfig, mu: Optional[int] = None) -> Transcript:
    """Simulate one run. ``mu`` may carry a precomputed ``mu(G)``."""
    k = cfg.k
    seed = cfg.seed
    part = partition_edges(g, k, stream(seed, STREAM_PARTITION))
    parties = [part.party_edges(i) for i in range(k)]
    first = parties[0]
    bpw = _bytes_per_word(g.num_vertices)
    fallback = len(first) <= cfg.fallback_threshold_for(g.num_vertices)
    empty = EdgeSubset(g)
    steps = 0

    if fallback:
        sample, h = empty, empty
        underfull = parties[:-1]
    else:
        rng = np.random.default_rng(stream(seed, STREAM_SAMPLE))
        keep = rng.random(len(first)) < cfg.sample_rate
        sample = EdgeSubset(g, (e for e, kept in zip(first.ids, keep) if kept))
        if cfg.injected_h is not None:
            if cfg.injected_h.graph is not g:
                raise ValueError("injected H belongs to a different graph")
            h = cfg.injected_h
        else:
            built = build_bounded_subgraph(
                sample, cfg.params, np.random.default_rng(stream(seed, STREAM_FIXING))
            )
            h, steps = built.h, built.steps
        underfull = []
        for i in range(k - 1):
            cand = parties[i] - h
            if i == 0:
                cand = cand - sample
            underfull.append(underfull_edges(cand, h, cfg.params))

    words = []
    total = len(h)
    for u in underfull:
        total += len(u)
        words.append(total)
    message = h.union(*underfull)
    accessible = parties[-1] | message
    output = max_matching(accessible)
    assert output.members <= accessible.members
    if mu is None:
        mu = matching_number(g)
    return Transcript(
        config=cfg,
        partition=part,
        sample=sample,
        h=h,
        underfull=list(underfull),
        message_words=words,
        message_bytes=[w * bpw for w in words],
        accessible=accessible,
        output=output,
        mu=mu,
        fallback_used=fallback,
        h_steps=steps,
    )


def run_two_party(g: Graph, cfg: ProtocolConfig, mu: Optional[int] = None) -> Transcript:
    """Alice samples, builds ``H``, sends ``H`` and ``U_A``; Bob matches."""
    if cfg.k != 2:
        raise ParameterError(f"two-party run needs k = 2, got {cfg.k}")
    return run_k_party(g, cfg, mu)


class SelfBoundingFunction:
    """``f(x) = mu(base + {e_i : x_i = 1})`` over a fixed list of free edges.

    With ``base = H + U`` and the free edges ``E_r \\ U``, ``x`` records which
    free edges reach the last party; ``f`` is then the output size.
    """

    def __init__(self, base: EdgeSubset, free: Sequence[int]):
        self.base = base
        self.free = list(free)

    def __len__(self) -> int:
        return len(self.free)

    def edges(self, x: Sequence[int]) -> EdgeSubset:
        chosen = [e for e, bit in zip(self.free, x) if bit]
        return EdgeSubset(self.base.graph, self.base.members.union(chosen))

    def __call__(self, x: Sequence[int]) -> int:
        return matching_number(self.edges(x))

    def drop(self, x: Sequence[int], i: int) -> int:
        """``f_i(x^(i))``: the value with coordinate ``i`` forced to 0."""
        y = list(x)
        y[i] = 0
        return self(y)
