"""Executable analysis objects for the EDCS protocol.

* ``build_x`` peels maximum matchings off ``H + U`` and averages them into a
  fractional matching ``x``.
* ``sample_y`` draws the random matching ``M'`` and derives ``yhat`` and the
  scaled, zeroed-out fractional matching ``y`` supported on the last party's
  edges.
* ``expected_yhat_load`` is the closed form for ``E[yhat_u]``;
  ``enumerate_yhat_expectation`` computes the same quantity by summing over
  all outcomes of ``M'``.
* ``verify_augment_bound`` maximises ``|M| + mu(G - V(M)) / 2`` over the
  matchings ``M`` of ``H + U``.

Exact rationals are used wherever the inputs are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Optional

import numpy as np

from .edcs import exact, underfull_edges
from .graph import EdgeSubset, Graph, Matching
from .matchers import (
    FractionalMatching,
    check_blossom_inequalities,
    fractional_size,
    matching_number,
    max_matching,
)
from .protocol import ProtocolConfig, Transcript, run_k_party

__all__ = [
    "PeelingTrace",
    "YSample",
    "AugmentBoundResult",
    "AnalysisRun",
    "build_x",
    "yhat_for",
    "sample_y",
    "expected_yhat_load",
    "enumerate_yhat_expectation",
    "overflow_probability",
    "verify_augment_bound",
    "analyze_run",
    "default_iterations",
    "AUGMENT_EDGE_CAP",
    "ENUMERATION_CAP",
]

AUGMENT_EDGE_CAP = 64
ENUMERATION_CAP = 16


def default_iterations(lam: Real, beta: int) -> int:
    return max(1, int(exact(lam) * beta))


@dataclass
class PeelingTrace:
    graph: Graph
    h: EdgeSubset
    u: EdgeSubset
    e_r: EdgeSubset
    t: int
    m_star: Matching
    m_in: EdgeSubset
    m_out: EdgeSubset
    matchings: list[Matching]
    h_sizes: list[int]
    u_sizes: list[int]
    x: FractionalMatching

    def invariant_violations(self) -> list[str]:
        problems = []
        m_in = self.m_in.members
        for (i, a), (j, b) in itertools.combinations(enumerate(self.matchings), 2):
            stray = (a.members & b.members) - m_in
            if stray:
                problems.append(f"M_{i + 1} and M_{j + 1} share non-M_in edges {sorted(stray)}")
        unit = Fraction(1, self.t)
        for eid, val in self.x.weights.items():
            if eid not in m_in and val != unit:
                problems.append(f"x[{eid}] = {val} off M_in")
            if eid in m_in and (val * self.t).denominator != 1:
                problems.append(f"x[{eid}] = {val} not a multiple of 1/t")
        for v, load in self.x.loads.items():
            if load > 1:
                problems.append(f"vertex {v} has load {load}")
        return problems

    def cover_indicator(self, v: int) -> int:
        return 1 if self.m_star.covers(v) else 0


def build_x(h: EdgeSubset, u: EdgeSubset, e_r: EdgeSubset, t: int) -> PeelingTrace:
    """Peel ``t`` maximum matchings off ``H + U``.

    ``M*`` is the (deterministic) maximum matching of ``e_r``; edges of
    ``M_in = M* & (H + U)`` are never removed, every other edge is removed
    once a matching has used it. ``x_e`` counts uses divided by ``t``.
    """
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    g = h.graph
    m_star = max_matching(e_r)
    hu = h | u
    m_in = m_star & hu
    m_out = m_star - m_in
    hi, ui = h, u
    counts: dict[int, int] = {}
    matchings, h_sizes, u_sizes = [], [], []
    for _ in range(t):
        h_sizes.append(len(hi))
        u_sizes.append(len(ui))
        mi = max_matching(hi | ui)
        matchings.append(mi)
        for e in mi:
            counts[e] = counts.get(e, 0) + 1
        drop = mi - m_in
        hi, ui = hi - drop, ui - drop
    x = FractionalMatching(g, {e: Fraction(c, t) for e, c in counts.items()})
    return PeelingTrace(g, h, u, e_r, t, m_star, m_in, m_out, matchings, h_sizes, u_sizes, x)


@dataclass
class YSample:
    trace: PeelingTrace
    p: Real
    epsilon: Real
    m_prime: EdgeSubset
    p_e: dict[int, Real]
    yhat: dict[int, Real]
    y: FractionalMatching
    e_b: Optional[EdgeSubset] = None

    def yhat_load(self, v: int) -> Real:
        g = self.trace.graph
        return sum((val for e, val in self.yhat.items() if v in g.edges[e]), start=0)


def _mstar_adjacency(trace: PeelingTrace, eid: int) -> int:
    u, v = trace.graph.edges[eid]
    return trace.m_star.covers(u) + trace.m_star.covers(v)


def yhat_for(trace: PeelingTrace, m_prime: EdgeSubset, p: Real) -> tuple[dict[int, Real], dict[int, Real]]:
    """``(yhat, p_e)`` for a fixed outcome ``M'`` of the random matching.

    ``p_e = (1 - p) ** c`` where ``c`` counts the edges of ``M*`` adjacent to
    ``e``; ``yhat`` follows the four cases: 1 on ``M'``, ``x_e`` on
    ``M* \\ M'``, 0 next to ``M'``, and ``(1 - p) x_e / p_e`` otherwise.
    """
    g = trace.graph
    x = trace.x.weights
    star = trace.m_star.members
    covered = set()
    for e in m_prime:
        covered.update(g.edges[e])
    yhat: dict[int, Real] = {}
    p_e: dict[int, Real] = {}
    for e in trace.m_star:
        if e in m_prime:
            yhat[e] = 1
        elif x.get(e, 0):
            yhat[e] = x[e]
    q = 1 - p
    for e, xe in x.items():
        if e in star:
            continue
        pe = q ** _mstar_adjacency(trace, e)
        p_e[e] = pe
        a, b = g.edges[e]
        if a in covered or b in covered:
            continue
        yhat[e] = q * xe / pe
    return yhat, p_e


def _loads(g: Graph, weights: dict[int, Real]) -> dict[int, Real]:
    loads: dict[int, Real] = {}
    for e, val in weights.items():
        a, b = g.edges[e]
        loads[a] = loads.get(a, 0) + val
        loads[b] = loads.get(b, 0) + val
    return loads


def _scale_and_zero(g: Graph, yhat: dict[int, Real], epsilon: Real) -> FractionalMatching:
    scale = 1 + epsilon
    loads = _loads(g, yhat)
    y = {}
    for e, val in yhat.items():
        a, b = g.edges[e]
        if loads[a] / scale > 1 or loads[b] / scale > 1:
            continue
        y[e] = val / scale
    return FractionalMatching(g, y)


def sample_y(
    trace: PeelingTrace,
    e_b: EdgeSubset,
    p: Real,
    epsilon: Real,
    rng: np.random.Generator,
    m_prime: Optional[EdgeSubset] = None,
) -> YSample:
    """Draw ``M'`` and build ``yhat`` and ``y``.

    ``M'`` keeps each ``M_in`` edge with probability ``p`` and each edge of
    ``M_out`` owned by the last party with probability ``1 - epsilon``.
    Passing ``m_prime`` skips the draw.
    """
    p_x, eps_x = exact(p), exact(epsilon)
    if not 0 < p_x <= Fraction(1, 2):
        raise ValueError(f"p must lie in (0, 1/2], got {p}")
    if m_prime is None:
        draws = rng.random(len(trace.m_star))
        keep = []
        for e, r in zip(trace.m_star.ids, draws):
            if e in trace.m_in:
                if r < float(p_x):
                    keep.append(e)
            elif e in e_b and r < 1 - float(eps_x):
                keep.append(e)
        m_prime = EdgeSubset(trace.graph, keep)
    elif not m_prime.members <= trace.m_star.members:
        raise ValueError("M' must be a subset of M*")
    yhat, p_e = yhat_for(trace, m_prime, p_x)
    y = _scale_and_zero(trace.graph, yhat, eps_x)
    return YSample(trace, p_x, eps_x, m_prime, p_e, yhat, y, e_b)


def expected_yhat_load(trace: PeelingTrace, p: Real, v: int) -> Fraction:
    """Closed form ``p * chi_{M*}(v) + (1 - p) * x_v``."""
    p_x = exact(p)
    return p_x * trace.cover_indicator(v) + (1 - p_x) * exact(trace.x.load(v))


def enumerate_yhat_expectation(trace: PeelingTrace, p: Real) -> dict[int, Fraction]:
    """``E[yhat_v]`` for every vertex by summing over all ``2^|M*|`` outcomes of ``M'``."""
    star = list(trace.m_star.ids)
    if len(star) > ENUMERATION_CAP:
        raise ValueError(f"|M*| = {len(star)} exceeds enumeration cap {ENUMERATION_CAP}")
    p_x = exact(p)
    g = trace.graph
    expect = {v: Fraction(0) for v in range(g.num_vertices)}
    for mask in range(1 << len(star)):
        chosen = [e for i, e in enumerate(star) if mask >> i & 1]
        prob = p_x ** len(chosen) * (1 - p_x) ** (len(star) - len(chosen))
        yhat, _ = yhat_for(trace, EdgeSubset(g, chosen), p_x)
        for v, load in _loads(g, yhat).items():
            expect[v] += prob * load
    return expect


def overflow_probability(
    trace: PeelingTrace, p: float, epsilon: float, trials: int, rng: np.random.Generator
) -> dict[int, float]:
    """Monte Carlo frequency of ``yhat_v > 1 + epsilon`` for each touched vertex.

    ``M'`` includes every ``M*`` edge independently with probability ``p``.
    Float arithmetic throughout.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    g = trace.graph
    p, epsilon = float(p), float(epsilon)
    star = list(trace.m_star.ids)
    slot = {e: i for i, e in enumerate(star)}
    cover_slot = np.full(g.num_vertices, -1, dtype=np.int64)
    for e in star:
        a, b = g.edges[e]
        cover_slot[a] = cover_slot[b] = slot[e]
    x = trace.x.weights
    others = [e for e in x if e not in slot]
    ends_o = np.array([g.edges[e] for e in others], dtype=np.int64).reshape(-1, 2)
    xo = np.array([float(x[e]) for e in others])
    cu, cv = cover_slot[ends_o[:, 0]], cover_slot[ends_o[:, 1]]
    count = (cu >= 0).astype(int) + (cv >= 0)
    val_o = (1 - p) * xo / (1 - p) ** count
    ends_s = np.array([g.edges[e] for e in star], dtype=np.int64).reshape(-1, 2)
    xs = np.array([float(x.get(e, 0)) for e in star])
    touched = sorted(set(ends_o.ravel().tolist()) | set(ends_s.ravel().tolist()))
    over = np.zeros(g.num_vertices, dtype=np.int64)
    for _ in range(trials):
        in_mp = rng.random(len(star)) < p
        hit = np.zeros(len(others), dtype=bool)
        if len(others):
            hit = ((cu >= 0) & in_mp[np.maximum(cu, 0)]) | ((cv >= 0) & in_mp[np.maximum(cv, 0)])
        load = np.zeros(g.num_vertices)
        wo = np.where(hit, 0.0, val_o)
        np.add.at(load, ends_o[:, 0], wo)
        np.add.at(load, ends_o[:, 1], wo)
        ws = np.where(in_mp, 1.0, xs)
        np.add.at(load, ends_s[:, 0], ws)
        np.add.at(load, ends_s[:, 1], ws)
        over += load > 1 + epsilon
    return {v: over[v] / trials for v in touched}


@dataclass
class AugmentBoundResult:
    max_value: Fraction
    witness: Matching
    mu: int
    bound: Optional[Real] = None
    nodes: int = 0

    @property
    def holds(self) -> Optional[bool]:
        return None if self.bound is None else self.max_value <= self.bound

    def to_dict(self) -> dict:
        return {
            "max_value": float(self.max_value),
            "max_value_exact": str(self.max_value),
            "mu": self.mu,
            "ratio": float(self.max_value / self.mu) if self.mu else None,
            "bound": None if self.bound is None else float(self.bound),
            "holds": self.holds,
            "witness": sorted(self.witness.ids),
            "nodes": self.nodes,
        }


def verify_augment_bound(
    g: Graph,
    h: EdgeSubset,
    u: EdgeSubset,
    bound: Optional[Real] = None,
    cap: int = AUGMENT_EDGE_CAP,
) -> AugmentBoundResult:
    """Exact ``max_M |M| + mu(G - V(M)) / 2`` over matchings ``M`` of ``H + U``.

    Branch-and-bound over edge inclusion. ``U`` edges are branched first and
    inclusion is tried before exclusion, which finds strong incumbents early;
    correctness never depends on that order. A node with partial matching
    ``M`` is cut when ``|M| + (min(r, mu') + mu') / 2`` cannot beat the
    incumbent, where ``mu' = mu(G - V(M))`` and ``r`` counts undecided edges
    with both ends free. The value depends only on ``V(M)``, so ``mu'`` is
    memoised by vertex set.
    """
    cand = list(u.ids) + [e for e in h.ids if e not in u]
    if len(cand) > cap:
        raise ValueError(f"|H + U| = {len(cand)} exceeds cap {cap}")
    masks = [(1 << g.edges[e][0]) | (1 << g.edges[e][1]) for e in cand]
    all_edges = [(e, (1 << a) | (1 << b)) for e, (a, b) in enumerate(g.edges)]
    memo: dict[int, int] = {}

    def rest_mu(used: int) -> int:
        if used not in memo:
            memo[used] = matching_number(EdgeSubset(g, [e for e, mk in all_edges if not mk & used]))
        return memo[used]

    best_val = Fraction(rest_mu(0), 2)
    best: list[int] = []
    chosen: list[int] = []
    nodes = 0

    def dfs(i: int, used: int) -> None:
        nonlocal best_val, best, nodes
        nodes += 1
        mu_rest = rest_mu(used)
        here = Fraction(2 * len(chosen) + mu_rest, 2)
        if here > best_val:
            best_val, best = here, list(chosen)
        r = sum(1 for mk in masks[i:] if not mk & used)
        if Fraction(2 * len(chosen) + min(r, mu_rest) + mu_rest, 2) <= best_val:
            return
        for j in range(i, len(cand)):
            if not masks[j] & used:
                chosen.append(cand[j])
                dfs(j + 1, used | masks[j])
                chosen.pop()

    dfs(0, 0)
    return AugmentBoundResult(best_val, Matching(g, best), matching_number(g), bound, nodes)


@dataclass
class AnalysisRun:
    """One protocol run together with the analysis objects built on it."""

    transcript: Transcript
    e_r: EdgeSubset
    u: EdgeSubset
    trace: PeelingTrace
    ysample: YSample
    blossom_ok: Optional[bool] = None
    mu_accessible: int = 0

    @property
    def y_size(self) -> Real:
        return fractional_size(self.ysample.y)

    def to_dict(self) -> dict:
        eps = self.ysample.epsilon
        return {
            "seed": self.transcript.config.seed,
            "t": self.trace.t,
            "mu_E_r": len(self.trace.m_star),
            "x_size": float(fractional_size(self.trace.x)),
            "y_size": float(self.y_size),
            "y_feasible": self.ysample.y.is_feasible(),
            "blossom_ok": self.blossom_ok,
            "mu_accessible": self.mu_accessible,
            "extraction_ok": self.mu_accessible >= (1 - 3 * eps) * self.y_size,
            "peeling_violations": len(self.trace.invariant_violations()),
        }


def analyze_run(
    g: Graph,
    cfg: ProtocolConfig,
    t: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    s_max: Optional[int] = 7,
    mu: Optional[int] = None,
) -> AnalysisRun:
    """Run the protocol, then build ``x`` over ``H + U`` and sample ``y``.

    ``U`` here holds the underfull edges of all of ``E_r``, as in the
    analysis, not only the ones that were sent. ``y`` is checked against the
    odd-set inequalities at tolerance ``epsilon`` unless ``s_max`` is None.
    """
    tr = run_k_party(g, cfg, mu)
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 3]))
    e_r = g.all_edges() - tr.sample
    u = underfull_edges(e_r - tr.h, tr.h, cfg.params)
    if t is None:
        t = default_iterations(cfg.params.lam, cfg.params.beta)
    trace = build_x(tr.h, u, e_r, t)
    ys = sample_y(trace, tr.last_party_edges(), exact(cfg.p_effective), cfg.params.epsilon, rng)
    run = AnalysisRun(tr, e_r, u, trace, ys)
    run.mu_accessible = len(tr.output)
    if s_max is not None:
        report = check_blossom_inequalities(ys.y, s_max=s_max, tolerance=exact(cfg.params.epsilon))
        run.blossom_ok = report.ok
    return run
