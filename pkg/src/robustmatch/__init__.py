"""Maximum matching in the k-party one-way robust communication model.

The package has four layers:

* ``graph``, ``edgelist``, ``matchers``: graphs with stable edge ids, an
  edge-list file format, exact matching solvers (Hopcroft-Karp, Edmonds'
  blossom, branch-and-bound) and a fractional-matching odd-set checker.
* ``edcs``, ``protocol``: bounded edge-degree subgraphs, underfull edges
  and the sample-then-forward protocol itself.
* ``oracles``, ``instances``: the analysis objects (peeling ``x``, sampled
  ``y``, exact expectations, augmentation bound search) and the instance
  families they are exercised on.
* ``harness``, ``cli``: seeded experiments with self-contained JSON reports.
"""

from .edcs import EdcsParams, ParameterError, build_bounded_subgraph, underfull_edges, verify_bounded_degree
from .graph import EdgeSubset, Graph, GraphError, Matching, is_vertex_cover, remove_vertices
from .instances import LayeredSpec, adversarial_h, gen_four_layer, gen_random, gen_three_layer
from .matchers import (
    FractionalMatching,
    check_blossom_inequalities,
    matching_number,
    max_matching,
    max_matching_bipartite,
    max_matching_bruteforce,
    max_matching_general,
)
from .protocol import ProtocolConfig, SelfBoundingFunction, Transcript, partition_edges, run_k_party, run_two_party

__version__ = "0.1.0"

__all__ = [
    "EdcsParams",
    "ParameterError",
    "build_bounded_subgraph",
    "underfull_edges",
    "verify_bounded_degree",
    "EdgeSubset",
    "Graph",
    "GraphError",
    "Matching",
    "is_vertex_cover",
    "remove_vertices",
    "LayeredSpec",
    "adversarial_h",
    "gen_four_layer",
    "gen_random",
    "gen_three_layer",
    "FractionalMatching",
    "check_blossom_inequalities",
    "matching_number",
    "max_matching",
    "max_matching_bipartite",
    "max_matching_bruteforce",
    "max_matching_general",
    "ProtocolConfig",
    "SelfBoundingFunction",
    "Transcript",
    "partition_edges",
    "run_k_party",
    "run_two_party",
]
