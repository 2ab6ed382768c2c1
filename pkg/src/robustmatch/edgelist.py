"""Plain-text edge-list format.

::

    n m
    u_0 v_0
    ...
    u_{m-1} v_{m-1}
    b l_0 l_1 ...        (optional: left side of a bipartite instance)

Vertex ids are 0-based. Blank lines and lines starting with ``#`` are
ignored. Edge ids follow line order.
"""

from __future__ import annotations

import io
import os
from typing import TextIO, Union

from .graph import Graph, GraphError

PathLike = Union[str, "os.PathLike[str]"]


class EdgeListFormatError(GraphError):
    pass


def dumps(g: Graph) -> str:
    buf = io.StringIO()
    write(g, buf)
    return buf.getvalue()


def write(g: Graph, fh: TextIO) -> None:
    fh.write(f"{g.num_vertices} {g.num_edges}\n")
    for u, v in g.edges:
        fh.write(f"{u} {v}\n")
    if g.left is not None:
        fh.write(" ".join(["b", *map(str, sorted(g.left))]) + "\n")


def save(g: Graph, path: PathLike) -> None:
    with open(path, "w") as fh:
        write(g, fh)


def loads(text: str) -> Graph:
    return read(io.StringIO(text))


def read(fh: TextIO) -> Graph:
    lines = [
        (no, line.split())
        for no, line in enumerate(fh, start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise EdgeListFormatError("empty edge list: missing 'n m' header")
    no, head = lines[0]
    if len(head) != 2:
        raise EdgeListFormatError(f"line {no}: header must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise EdgeListFormatError(f"line {no}: non-integer header") from exc
    body = lines[1:]
    left = None
    if body and body[-1][1][0] == "b":
        no, toks = body.pop()
        try:
            left = [int(t) for t in toks[1:]]
        except ValueError as exc:
            raise EdgeListFormatError(f"line {no}: bad bipartition line") from exc
    if len(body) != m:
        raise EdgeListFormatError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for no, toks in body:
        if len(toks) != 2:
            raise EdgeListFormatError(f"line {no}: expected 'u v'")
        try:
            edges.append((int(toks[0]), int(toks[1])))
        except ValueError as exc:
            raise EdgeListFormatError(f"line {no}: non-integer vertex id") from exc
    try:
        return Graph(n, edges, left)
    except GraphError as exc:
        raise EdgeListFormatError(str(exc)) from exc


def load(path: PathLike) -> Graph:
    with open(path) as fh:
        return read(fh)
