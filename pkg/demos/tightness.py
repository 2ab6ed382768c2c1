"""Why the protocol cannot beat 2/3 + 1/(3k) in the worst case.

Builds the three-layer instance, plants a (beta/2)-regular H inside the two
complete blocks, and shows that the underfull edges are exactly the outer
matchings M_1 and M_3. Everything the last party receives is then covered by
A_1 + B_3, so the message alone holds at most 2/3 of a maximum matching; the
last party's own share of M_2 supplies the rest.

    python demos/tightness.py --m 40 --trials 200
"""

import argparse
from robustmatch.edcs import EdcsParams, underfull_edges
from robustmatch.graph import is_vertex_cover
from robustmatch.harness import ExperimentConfig, run_experiment
from robustmatch.instances import adversarial_h, gen_three_layer
from robustmatch.matchers import matching_number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--m", type=int, default=40)
    ap.add_argument("--beta", type=int, default=10)
    ap.add_argument("--trials", type=int, default=200)
    args = ap.parse_args()

    g, spec = gen_three_layer(args.m)
    h = adversarial_h(g, spec, args.beta, k=2)
    params = EdcsParams(0.05, 0.1, args.beta)
    u = underfull_edges(g.all_edges() - h, h, params)
    outer = spec.matching(g, 0) | spec.matching(g, 2)
    print(f"instance: {g}, mu(G) = {matching_number(g)}")
    print(f"|H| = {len(h)}, every H edge has edge-degree {args.beta}")
    print(f"underfull edges == M_1 + M_3: {u == outer}")
    cover = set(spec.a(0)) | set(spec.b(2))
    print(f"A_1 + B_3 covers H + U: {is_vertex_cover(h | u, cover)}  -> mu(H + U) = {matching_number(h | u)}")

    # beta <= |V| / (12 k) with |V| = 6m means m >= 2 k beta.
    for k, m in ((2, max(args.m, 4 * args.beta)), (3, max(args.m, 6 * args.beta))):
        cfg = ExperimentConfig(
            instance={"family": "three-layer", "m": m},
            protocol={"k": k, "epsilon": 0.05, "lam": 0.1, "beta": args.beta,
                      "fallback_edge_threshold": 0, "inject_adversarial_h": True},
            trials=args.trials,
        )
        s = run_experiment(cfg)["summary"]["ratio"]
        target = 2 / 3 + 1 / (3 * k)
        print(f"k = {k}, m = {m}: mean ratio {s['mean']:.4f} "
              f"(99% CI {s['ci99'][0]:.4f}..{s['ci99'][1]:.4f}), 2/3 + 1/(3k) = {target:.4f}")


if __name__ == "__main__":
    main()
