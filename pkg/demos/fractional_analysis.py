"""The analysis objects, made concrete on a small instance.

1. Peel t maximum matchings off H + U and average them into x.
2. Check E[yhat_v] = p * chi_{M*}(v) + (1 - p) * x_v by summing over all
   2^|M*| outcomes of M' in exact rational arithmetic.
3. Sample y, verify it is a fractional matching that respects the odd-set
   inequalities up to epsilon, and compare its size with what the last party
   actually extracts.
"""

from fractions import Fraction

import numpy as np

from robustmatch.edcs import EdcsParams, underfull_edges
from robustmatch.instances import gen_random
from robustmatch.matchers import check_blossom_inequalities, fractional_size
from robustmatch.oracles import build_x, enumerate_yhat_expectation, expected_yhat_load, sample_y
from robustmatch.protocol import ProtocolConfig, run_two_party


def main() -> None:
    g = gen_random("gnp", 14, 0.35, 4)
    params = EdcsParams(0.3, 0.25, 4)
    t = run_two_party(g, ProtocolConfig(params, fallback_edge_threshold=0, seed=4))
    e_r = g.all_edges() - t.sample
    u = underfull_edges(e_r - t.h, t.h, params)
    trace = build_x(t.h, u, e_r, 3)
    print(f"{g}: |H| = {len(t.h)}, |U| = {len(u)}, |M*| = {len(trace.m_star)}, |M_in| = {len(trace.m_in)}")
    for i, m in enumerate(trace.matchings, 1):
        print(f"  round {i}: |H_i| = {trace.h_sizes[i - 1]}, |U_i| = {trace.u_sizes[i - 1]}, |M_i| = {len(m)}")
    print(f"sum x = {fractional_size(trace.x)}; invariant problems: {trace.invariant_violations() or 'none'}")

    p = Fraction(1, 2)
    enum = enumerate_yhat_expectation(trace, p)
    exact_hits = sum(enum[v] == expected_yhat_load(trace, p, v) for v in range(g.num_vertices))
    print(f"E[yhat_v] closed form == enumeration at {exact_hits}/{g.num_vertices} vertices")
    for v in range(4):
        print(f"  v = {v}: {enum[v]}")

    eps = Fraction(3, 10)
    ys = sample_y(trace, t.last_party_edges(), p, eps, np.random.default_rng(0))
    rep = check_blossom_inequalities(ys.y, s_max=7, tolerance=eps)
    print(f"y: size {float(fractional_size(ys.y)):.3f}, feasible {ys.y.is_feasible()}, "
          f"odd-set check at tolerance eps: {'ok' if rep.ok else rep.violations} "
          f"({rep.sets_checked} candidate sets left after pruning)")
    print(f"last party extracts {len(t.output)} >= (1 - 3 eps) sum y = "
          f"{float((1 - 3 * eps) * fractional_size(ys.y)):.3f}")


if __name__ == "__main__":
    main()
