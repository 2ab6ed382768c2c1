import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_graph
from robustmatch.edcs import EdcsParams, exact, underfull_edges
from robustmatch.graph import EdgeSubset, Graph
from robustmatch.instances import adversarial_h, gen_four_layer, gen_random, gen_three_layer
from robustmatch.matchers import (
    FractionalMatching,
    check_blossom_inequalities,
    fractional_size,
    matching_number,
    max_matching_bruteforce,
)
from robustmatch.oracles import (
    analyze_run,
    build_x,
    default_iterations,
    enumerate_yhat_expectation,
    expected_yhat_load,
    overflow_probability,
    sample_y,
    verify_augment_bound,
    yhat_for,
)
from robustmatch.protocol import ProtocolConfig, run_k_party

HALF = Fraction(1, 2)


def perfect_matching(n_pairs):
    return Graph(2 * n_pairs, [(2 * i, 2 * i + 1) for i in range(n_pairs)])


def small_trace(seed, n=14, density=0.35, t=3):
    g = gen_random("gnp", n, density, seed)
    params = EdcsParams(0.3, 0.25, 4)
    tr = run_k_party(g, ProtocolConfig(params, fallback_edge_threshold=0, seed=seed))
    e_r = g.all_edges() - tr.sample
    u = underfull_edges(e_r - tr.h, tr.h, params)
    return build_x(tr.h, u, e_r, t)


def three_layer_run(seed, m=40, beta=10, t=5, eps=0.05, k=2):
    g, spec = gen_three_layer(m)
    h = adversarial_h(g, spec, beta, k=k)
    cfg = ProtocolConfig(EdcsParams(eps, 0.1, beta), k=k, fallback_edge_threshold=0, injected_h=h, seed=seed)
    return g, analyze_run(g, cfg, t=t)


def reference_yhat(trace, m_prime, p):
    """Four-case definition written out edge by edge."""
    g = trace.graph
    star = trace.m_star.members
    covered = {v for e in m_prime for v in g.edges[e]}
    out = {}
    for e in range(g.num_edges):
        xe = trace.x[e]
        if e in m_prime.members:
            out[e] = Fraction(1)
        elif e in star:
            out[e] = xe
        elif set(g.edges[e]) & covered:
            out[e] = 0
        else:
            c = sum(1 for v in g.edges[e] if trace.m_star.covers(v))
            out[e] = (1 - p) * xe / (1 - p) ** c
    return {e: v for e, v in out.items() if v}


# --- peeling ----------------------------------------------------------------


def test_default_iterations():
    assert default_iterations(0.1, 10) == 1
    assert default_iterations(0.25, 8) == 2
    assert default_iterations(0.1, 5) == 1


def test_peeling_on_a_single_perfect_matching():
    g = perfect_matching(6)
    for t in (1, 3, 7):
        trace = build_x(g.all_edges(), EdgeSubset(g), g.all_edges(), t)
        assert trace.x.weights == {e: 1 for e in range(6)}
        assert fractional_size(trace.x) == 6 == len(trace.m_star)
        assert trace.m_in == g.all_edges() and len(trace.m_out) == 0


def test_peeling_requires_positive_t():
    g = perfect_matching(2)
    with pytest.raises(ValueError):
        build_x(g.all_edges(), EdgeSubset(g), g.all_edges(), 0)


def test_peeling_matchings_are_maximum_per_round():
    for seed in range(40):
        trace = small_trace(seed, n=12, t=4)
        hi, ui = trace.h, trace.u
        for i, mi in enumerate(trace.matchings):
            assert (len(hi), len(ui)) == (trace.h_sizes[i], trace.u_sizes[i])
            cur = hi | ui
            assert mi.members <= cur.members
            assert len(mi) == len(max_matching_bruteforce(cur))
            drop = mi - trace.m_in
            hi, ui = hi - drop, ui - drop


@pytest.mark.parametrize("seed", range(25))
def test_peeling_invariants_on_random_runs(seed):
    trace = small_trace(seed, n=int(10 + seed % 10), t=1 + seed % 5)
    assert trace.invariant_violations() == []
    assert trace.x.is_feasible()
    for (i, a) in enumerate(trace.matchings):
        for b in trace.matchings[i + 1:]:
            assert (a.members & b.members) <= trace.m_in.members
    assert trace.m_in.members | trace.m_out.members == trace.m_star.members


def test_invariant_checker_flags_bad_traces():
    trace = small_trace(3, t=2)
    if not trace.matchings[0]:
        pytest.skip("degenerate instance")
    e = trace.matchings[0].ids[0]
    trace.x = FractionalMatching(trace.graph, {e: Fraction(1, 3)})
    assert trace.invariant_violations()


def test_three_layer_x_is_large():
    for seed in range(10):
        g, run = three_layer_run(seed)
        trace = run.trace
        assert trace.invariant_violations() == []
        assert fractional_size(trace.x) >= (Fraction(2, 3) - Fraction(1, 20)) * len(trace.m_star)


# --- yhat / y ---------------------------------------------------------------


def test_injected_m_prime_equal_to_m_star_gives_indicator():
    # every x edge touches M*, so with M' = M* all non-M* weight is wiped
    g = Graph(4, [(0, 1), (2, 3), (1, 2)])
    trace = build_x(g.all_edges(), EdgeSubset(g), g.all_edges(), 2)
    assert trace.m_star.ids == (0, 1)
    ys = sample_y(trace, g.all_edges(), HALF, Fraction(1, 10), None, m_prime=trace.m_star)
    assert ys.yhat == {0: 1, 1: 1}


def test_isolated_edge_outside_m_star():
    # edge 1 = (2, 3) lives in H but not in E_r, so M* never touches it
    g = Graph(4, [(0, 1), (2, 3)])
    h = g.all_edges()
    e_r = g.subset([0])
    trace = build_x(h, EdgeSubset(g), e_r, 1)
    p = Fraction(1, 3)
    yhat, p_e = yhat_for(trace, EdgeSubset(g), p)
    assert p_e[1] == 1
    assert yhat[1] == (1 - p) * trace.x[1]


def test_m_prime_must_lie_in_m_star():
    trace = small_trace(1)
    non_star = [e for e in range(trace.graph.num_edges) if e not in trace.m_star.members]
    with pytest.raises(ValueError):
        sample_y(trace, trace.graph.all_edges(), HALF, 0.1, None, m_prime=EdgeSubset(trace.graph, non_star[:1]))
    with pytest.raises(ValueError):
        sample_y(trace, trace.graph.all_edges(), 0.7, 0.1, np.random.default_rng(0))


@pytest.mark.parametrize("seed", range(20))
def test_yhat_matches_four_case_definition(seed):
    trace = small_trace(seed, t=1 + seed % 4)
    rng = np.random.default_rng(seed)
    p = Fraction(1, 2) if seed % 2 else Fraction(1, 3)
    eps = Fraction(1, 10)
    for _ in range(5):
        ys = sample_y(trace, trace.graph.all_edges(), p, eps, rng)
        assert ys.yhat == reference_yhat(trace, ys.m_prime, p)
        assert ys.y.is_feasible()
        for e, val in ys.y.weights.items():
            assert val <= ys.yhat[e] / (1 + eps)


def test_expected_load_trivial_cases():
    g = Graph(4, [(0, 1)])
    trace = build_x(g.all_edges(), EdgeSubset(g), g.all_edges(), 1)
    assert expected_yhat_load(trace, HALF, 3) == 0  # unmatched, no load
    assert expected_yhat_load(trace, HALF, 0) == 1  # 1/2 + 1/2 * 1


@pytest.mark.parametrize("seed", range(25))
def test_expectation_identity_exact(seed):
    trace = small_trace(seed, t=1 + seed % 3)
    if len(trace.m_star) > 10:
        pytest.skip("M* too large for enumeration")
    for p in (Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)):
        enum = enumerate_yhat_expectation(trace, p)
        for v in range(trace.graph.num_vertices):
            assert enum[v] == expected_yhat_load(trace, p, v)


def test_enumeration_cap():
    g = perfect_matching(17)
    trace = build_x(g.all_edges(), EdgeSubset(g), g.all_edges(), 1)
    with pytest.raises(ValueError):
        enumerate_yhat_expectation(trace, HALF)


def test_size_chain_statistical():
    g, run = three_layer_run(3)
    trace, tr = run.trace, run.transcript
    p, eps = Fraction(1, 2), Fraction(1, 20)
    rng = np.random.default_rng(0)
    sizes = np.array([
        float(fractional_size(sample_y(trace, tr.last_party_edges(), p, eps, rng).y)) for _ in range(500)
    ])
    sigma = sizes.std(ddof=1) / math.sqrt(len(sizes))
    mu_r = len(trace.m_star)
    bound = (1 - 3 * eps) * p * mu_r + (1 - 3 * eps) * (1 - p) * fractional_size(trace.x) - 2 * eps * tr.mu
    assert sizes.mean() >= float(bound) - 3 * sigma


# --- overflow ---------------------------------------------------------------


def test_overflow_safe_vertices_never_overflow():
    for seed in range(10):
        trace = small_trace(seed, t=2)
        freq = overflow_probability(trace, 0.5, 0.1, 300, np.random.default_rng(seed))
        for v, f in freq.items():
            if not trace.m_star.covers(v) or trace.x.load(v) <= HALF:
                assert f == 0


def high_load_trace(t):
    # v = 0 is matched in M* to w = 1 through an edge outside H + U, and is
    # the centre of a t-star in H whose leaves a_j are M*-matched to b_j.
    # Peeling uses one star edge per round, so x_v = 1 built from t edges of 1/t.
    edges = [(0, 1)]
    star = []
    for j in range(t):
        a, b = 2 + 2 * j, 3 + 2 * j
        edges.append((a, b))
        star.append((0, a))
    g = Graph(2 + 2 * t, edges + star)
    h = g.subset(range(t + 1, 2 * t + 1))
    trace = build_x(h, EdgeSubset(g), g.all_edges(), t)
    assert trace.m_star.ids == tuple(range(t + 1))
    assert trace.x.load(0) == 1
    return trace


def test_overflow_on_high_load_vertex():
    t, eps, trials = 400, 0.1, 4000
    trace = high_load_trace(t)
    freq = overflow_probability(trace, 0.5, eps, trials, np.random.default_rng(1))
    sigma = math.sqrt(eps * (1 - eps) / trials)
    assert freq[0] <= eps + 3 * sigma


def test_overflow_requires_trials():
    with pytest.raises(ValueError):
        overflow_probability(small_trace(0), 0.5, 0.1, 0, np.random.default_rng(0))


# --- augmentation bound -----------------------------------------------------


def test_augment_bound_single_perfect_matching():
    g = perfect_matching(5)
    res = verify_augment_bound(g, g.all_edges(), EdgeSubset(g))
    assert res.max_value == 5 == res.mu


def test_augment_bound_four_layer():
    g, spec = gen_four_layer(3)
    h = adversarial_h(g, spec, 4)
    params = EdcsParams(0.05, 0.25, 4)
    u = underfull_edges(g.all_edges() - h, h, params, threshold=3)
    assert u == spec.matching(g, 0) | spec.matching(g, 3)
    res = verify_augment_bound(g, h, u, bound=Fraction(9))
    assert res.mu == 12 and res.max_value == 9 and res.holds
    assert res.max_value == Fraction(3, 4) * res.mu
    w = res.witness
    assert w.members <= (h | u).members
    from robustmatch.graph import remove_vertices
    rest, _ = remove_vertices(g, w.vertices())
    assert len(w) + Fraction(matching_number(rest), 2) == res.max_value


def test_augment_bound_three_layer():
    g, spec = gen_three_layer(3)
    h = adversarial_h(g, spec, 4)
    u = underfull_edges(g.all_edges() - h, h, EdcsParams(0.05, 0.25, 4), threshold=3)
    res = verify_augment_bound(g, h, u)
    assert res.max_value == Fraction(5, 6) * 9


def test_augment_bound_matches_plain_enumeration(rng):
    from itertools import combinations
    from robustmatch.graph import Matching, remove_vertices
    for _ in range(15):
        g = random_graph(rng, 9, 0.4)
        hu = [e for e in range(g.num_edges) if rng.random() < 0.5][:12]
        res = verify_augment_bound(g, g.subset(hu), EdgeSubset(g))
        best = Fraction(-1)
        for r in range(len(hu) + 1):
            for combo in combinations(hu, r):
                verts = [v for e in combo for v in g.edges[e]]
                if len(set(verts)) != len(verts):
                    continue
                rest, _ = remove_vertices(g, verts)
                best = max(best, r + Fraction(matching_number(rest), 2))
        assert res.max_value == best


def test_augment_bound_cap():
    g, spec = gen_four_layer(5)
    with pytest.raises(ValueError):
        verify_augment_bound(g, g.all_edges(), EdgeSubset(g))


# --- full pipeline ----------------------------------------------------------


def test_pipeline_y_on_thirty_vertices():
    for seed in range(10):
        g = gen_random("gnp", 30, 0.4, seed)
        cfg = ProtocolConfig(EdcsParams(0.3, 0.25, 8), fallback_edge_threshold=0, seed=seed)
        run = analyze_run(g, cfg)
        assert run.blossom_ok
        assert check_blossom_inequalities(run.ysample.y, s_max=7, tolerance=exact(0.3)).ok
        assert run.ysample.y.support().members <= run.transcript.accessible.members
        assert run.mu_accessible >= (1 - 3 * Fraction(3, 10)) * run.y_size


def test_pipeline_record():
    g, run = three_layer_run(0)
    d = run.to_dict()
    assert d["peeling_violations"] == 0 and d["y_feasible"] and d["extraction_ok"] and d["blossom_ok"]
    assert d["mu_E_r"] == len(run.trace.m_star)
