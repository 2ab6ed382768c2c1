"""Augmenting H + U cannot reach beyond 3/4 on the four-layer instance.

With four groups of three vertices per side and a 2-regular H in the three
complete blocks, the underfull edges at threshold beta - 1 are M_1 and M_4.
Exhaustive search over every matching M of H + U finds the best value of
|M| + mu(G - V(M)) / 2: it is 9, exactly 3/4 of mu(G) = 12.
"""

from robustmatch.edcs import EdcsParams, underfull_edges
from robustmatch.graph import remove_vertices
from robustmatch.instances import adversarial_h, gen_four_layer, gen_three_layer
from robustmatch.matchers import matching_number
from robustmatch.oracles import verify_augment_bound


def show(name, g, spec):
    h = adversarial_h(g, spec, 4)
    u = underfull_edges(g.all_edges() - h, h, EdcsParams(0.05, 0.25, 4), threshold=3)
    res = verify_augment_bound(g, h, u)
    rest, _ = remove_vertices(g, res.witness.vertices())
    print(f"{name}: |H| = {len(h)}, |U| = {len(u)}, mu(G) = {res.mu}")
    print(f"  best value {res.max_value} = {float(res.max_value / res.mu):.4f} mu(G) "
          f"after {res.nodes} search nodes")
    print(f"  witness: |M| = {len(res.witness)}, mu(G - V(M)) = {matching_number(rest)}")


def main() -> None:
    show("three layers", *gen_three_layer(3))
    show("four layers", *gen_four_layer(3))


if __name__ == "__main__":
    main()
