import json
import math

import numpy as np
import pytest

from conftest import random_graph
from robustmatch.edcs import EdcsParams, ParameterError, underfull_edges
from robustmatch.graph import EdgeSubset, Graph
from robustmatch.instances import adversarial_h, gen_random, gen_three_layer
from robustmatch.matchers import matching_number, max_matching, max_matching_bruteforce
from robustmatch.protocol import (
    ProtocolConfig,
    SelfBoundingFunction,
    communication_cost,
    partition_edges,
    run_k_party,
    run_two_party,
)

PARAMS = EdcsParams(0.2, 0.25, 8)


def test_partition_single_party():
    g = gen_random("gnp", 30, 0.3, 0)
    part = partition_edges(g, 1, 5)
    assert (part.owner == 0).all()
    assert part.party_edges(0) == g.all_edges()


def test_partition_is_deterministic():
    g = gen_random("gnp", 50, 0.3, 0)
    assert np.array_equal(partition_edges(g, 3, 9).owner, partition_edges(g, 3, 9).owner)
    assert not np.array_equal(partition_edges(g, 3, 9).owner, partition_edges(g, 3, 10).owner)


def test_partition_two_parties_half_half():
    g = gen_random("gnp", 1000, 0.21, 1)
    assert g.num_edges >= 10**5
    frac = partition_edges(g, 2, 3).fractions()[0]
    assert abs(frac - 0.5) <= 0.01


@pytest.mark.parametrize("k", [2, 3, 5])
def test_partition_fractions_within_five_sigma(k):
    g = gen_random("gnp", 600, 0.2, 2)
    m = g.num_edges
    part = partition_edges(g, k, 11)
    sigma = math.sqrt((1 / k) * (1 - 1 / k) / m)
    assert np.all(np.abs(part.fractions() - 1 / k) <= 5 * sigma)
    assert part.counts().sum() == m
    # every edge owned by exactly one party
    owned = sorted(e for i in range(k) for e in part.party_edges(i))
    assert owned == list(range(m))


def test_config_validation():
    with pytest.raises(ParameterError):
        ProtocolConfig(PARAMS, k=1)
    with pytest.raises(ParameterError):
        ProtocolConfig(PARAMS, p=0.6)
    with pytest.raises(ParameterError):
        ProtocolConfig(PARAMS, p=0.0)
    with pytest.raises(ParameterError):
        ProtocolConfig(PARAMS, fallback_edge_threshold=-1)
    cfg = ProtocolConfig(EdcsParams(0.05, 0.1, 10), k=3)
    assert cfg.p_effective == pytest.approx(1 / 3)
    assert cfg.sample_rate == pytest.approx(0.05 / (1 - 1 / 3))


def test_perfect_matching_graph_always_ratio_one():
    g = Graph(40, [(2 * i, 2 * i + 1) for i in range(20)])
    for seed in range(20):
        for thr in (0, None):
            t = run_two_party(g, ProtocolConfig(PARAMS, fallback_edge_threshold=thr, seed=seed))
            assert t.ratio == 1.0


def test_output_is_maximum_on_accessible_edges(rng):
    for seed in range(60):
        g = random_graph(rng, 12, 0.35)
        t = run_k_party(g, ProtocolConfig(PARAMS, fallback_edge_threshold=0, seed=seed))
        if len(t.accessible) <= 40:
            assert len(t.output) == len(max_matching_bruteforce(t.accessible))
        assert t.output.members <= t.accessible.members


def test_two_party_equals_k_party():
    g, _ = gen_three_layer(10)
    cfg = ProtocolConfig(PARAMS, k=2, fallback_edge_threshold=0, seed=4)
    a, b = run_two_party(g, cfg), run_k_party(g, cfg)
    assert a.to_dict() == b.to_dict()
    assert a.output == b.output and a.h == b.h and a.sample == b.sample
    with pytest.raises(ParameterError):
        run_two_party(g, ProtocolConfig(PARAMS, k=3))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_transcript_structure(k, rng):
    g = gen_random("gnp", 120, 0.15, 3)
    mu = matching_number(g)
    t = run_k_party(g, ProtocolConfig(PARAMS, k=k, fallback_edge_threshold=0, seed=8), mu)
    part = t.partition
    assert t.sample.members <= part.party_edges(0).members
    assert t.h.members <= t.sample.members
    assert len(t.underfull) == k - 1
    # recount message sizes from the transcript
    running = len(t.h)
    for i, u in enumerate(t.underfull):
        assert u.members <= part.party_edges(i).members
        assert not u.members & t.h.members
        if i == 0:
            assert not u.members & t.sample.members
        running += len(u)
        assert t.message_words[i] == running
    # each contribution is exactly the underfull part of the candidates
    for i, u in enumerate(t.underfull):
        cand = part.party_edges(i) - t.h
        if i == 0:
            cand = cand - t.sample
        assert u == underfull_edges(cand, t.h, PARAMS)
    assert t.accessible == t.last_party_edges() | t.h | t.underfull_all()
    assert 0 <= t.ratio <= 1 and t.mu == mu
    assert t.message_bytes == [w * 2 for w in t.message_words]  # 120 vertices: 1 byte per id


def test_bob_keeps_his_share_of_a_maximum_matching():
    g = gen_random("gnp", 200, 0.05, 6)
    m_star = max_matching(g)
    for seed in range(20):
        t = run_two_party(g, ProtocolConfig(PARAMS, fallback_edge_threshold=0, seed=seed))
        share = len(m_star & t.last_party_edges())
        assert len(t.output) >= share
        assert t.ratio >= 0.5 * share / t.mu


def test_determinism_byte_for_byte():
    g = gen_random("planted-matching", 300, 0.03, 2)
    cfg = ProtocolConfig(PARAMS, k=3, fallback_edge_threshold=0, seed=77)
    a = json.dumps(run_k_party(g, cfg).to_dict(), sort_keys=True)
    b = json.dumps(run_k_party(g, cfg).to_dict(), sort_keys=True)
    assert a == b


def test_fallback_on_tiny_graph():
    g = gen_random("gnp", 30, 0.3, 1)
    for seed in range(10):
        t = run_two_party(g, ProtocolConfig(PARAMS, seed=seed))
        assert t.fallback_used and t.ratio == 1.0
        alice = t.partition.party_edges(0)
        assert communication_cost(t).max_words == len(alice)
        assert t.accessible == g.all_edges()


def test_fallback_threshold_rule():
    cfg = ProtocolConfig(PARAMS)
    assert cfg.fallback_threshold_for(1024) == 4 * 1024 * 10
    assert ProtocolConfig(PARAMS, fallback_edge_threshold=7).fallback_threshold_for(1024) == 7


def test_empty_graph_costs_nothing():
    g = Graph(5, [])
    t = run_two_party(g, ProtocolConfig(PARAMS, fallback_edge_threshold=0))
    cost = communication_cost(t)
    assert cost.max_words == 0 and cost.max_bytes == 0 and t.ratio == 1.0


def test_sample_is_an_epsilon_sample_of_all_edges():
    # With k = 2, an edge lands in E_s with probability 1/2 * eps / (1 - 1/2) = eps.
    g = gen_random("gnp", 400, 0.2, 0)
    eps = 0.2
    cfg = ProtocolConfig(EdcsParams(eps, 0.25, 8), fallback_edge_threshold=0, seed=1)
    sizes = [len(run_k_party(g, ProtocolConfig(cfg.params, fallback_edge_threshold=0, seed=s), 1).sample)
             for s in range(10)]
    m = g.num_edges * 10
    sd = math.sqrt(m * eps * (1 - eps))
    assert abs(sum(sizes) - eps * m) <= 5 * sd


def test_injected_h_is_used_and_flagged():
    g, spec = gen_three_layer(40)
    h = adversarial_h(g, spec, 10, k=2)
    t = run_two_party(g, ProtocolConfig(EdcsParams(0.05, 0.1, 10), fallback_edge_threshold=0, injected_h=h))
    assert t.h is h and t.injected_h and t.to_dict()["injected_H"]
    assert t.underfull[0].members <= (spec.matching(g, 0) | spec.matching(g, 2)).members
    other, _ = gen_three_layer(40)
    with pytest.raises(ValueError):
        run_two_party(other, ProtocolConfig(EdcsParams(0.05, 0.1, 10), fallback_edge_threshold=0, injected_h=h))


def test_transcript_json_keys():
    g = gen_random("gnp", 50, 0.2, 0)
    d = run_two_party(g, ProtocolConfig(PARAMS, fallback_edge_threshold=0)).to_dict()
    for key in ("seed", "k", "params", "message_sizes", "output_size", "mu", "ratio", "fallback_used", "injected_H"):
        assert key in d
    json.dumps(d)


def test_concentration_of_output_size():
    g = gen_random("planted-matching", 4200, 0.001, 1)
    mu = matching_number(g)
    assert mu >= 2000
    sizes = np.array([
        len(run_k_party(g, ProtocolConfig(PARAMS, fallback_edge_threshold=0, seed=s), mu).output)
        for s in range(300)
    ])
    low = sizes.mean() - math.sqrt(2 * mu * math.log(g.num_vertices))
    assert np.mean(sizes <= low) <= 2 / g.num_vertices


def test_self_bounding_small_instance(rng):
    g = gen_random("gnp", 40, 0.2, 3)
    t = run_two_party(g, ProtocolConfig(PARAMS, fallback_edge_threshold=0, seed=2))
    base = t.h | t.underfull_all()
    free = [e for e in range(g.num_edges) if e not in base.members]
    f = SelfBoundingFunction(base, free)
    assert len(f) == len(free)
    for _ in range(5):
        x = (rng.random(len(free)) < 0.5).astype(int).tolist()
        fx = f(x)
        drops = [fx - f.drop(x, i) for i in range(len(free))]
        assert all(0 <= d <= 1 for d in drops)
        assert sum(drops) <= fx
        assert fx == matching_number(f.edges(x))
