"""Build a bounded edge-degree subgraph and watch what it sends.

One run of the two-party protocol on a random graph, with the pieces laid
out: how many edges Alice samples, how large H is, how many of her remaining
edges are underfull (and therefore sent), and how close Bob gets to mu(G).
"""

import argparse

import numpy as np

from robustmatch.edcs import EdcsParams, build_bounded_subgraph, underfull_edges, verify_bounded_degree
from robustmatch.instances import gen_random
from robustmatch.protocol import ProtocolConfig, communication_cost, run_two_party


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--density", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    g = gen_random("gnp", args.n, args.density, args.seed)
    params = EdcsParams(epsilon=0.2, lam=0.25, beta=8)
    print(f"{g}; params {params.as_dict()}")

    # The construction on its own: local fixing over a shuffled order.
    b = build_bounded_subgraph(g.all_edges(), params, np.random.default_rng(0))
    print(f"H on all of E: {len(b.h)} edges, max edge-degree {b.max_edge_degree}, "
          f"{b.steps} fixing steps (bound {(2 * params.beta - 1) * g.num_edges})")
    print(f"  bounded: {verify_bounded_degree(b, params.beta)}, "
          f"underfull leftovers: {len(underfull_edges(g.all_edges() - b.h, b, params))}")

    t = run_two_party(g, ProtocolConfig(params, fallback_edge_threshold=0, seed=args.seed))
    alice = t.partition.party_edges(0)
    print(f"Alice holds {len(alice)} edges, samples {len(t.sample)}, builds |H| = {len(t.h)}")
    print(f"she sends H plus {len(t.underfull[0])} underfull edges "
          f"({communication_cost(t).max_words} words, {communication_cost(t).max_bytes} bytes)")
    print(f"Bob outputs {len(t.output)} of mu(G) = {t.mu}: ratio {t.ratio:.4f}")


if __name__ == "__main__":
    main()
