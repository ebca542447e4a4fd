"""Q-graphs: deterministic output-driven context automata.

A Q-graph has one outgoing edge per output symbol per node, described by a
total table g(q, y). Walking the graph along an output sequence quantizes the
sequence into a context (the node reached).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
import numpy as np

from .graphs import is_strongly_connected_graph


@dataclass(frozen=True)
class QGraph:
    nq: int
    ny: int
    g: np.ndarray  # (nq, ny) int, g[q, y] = next node
    name: str = ""

    def __post_init__(self):
        g = np.ascontiguousarray(np.asarray(self.g, dtype=np.int64))
        if g.shape != (self.nq, self.ny):
            raise ValueError(f"g shape {g.shape} != {(self.nq, self.ny)}")
        if np.any(g < 0) or np.any(g >= self.nq):
            raise ValueError("g has entries outside {0,...,nq-1}")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    def adjacency(self) -> list[list[int]]:
        return [sorted(set(int(v) for v in row)) for row in self.g]


def is_irreducible(qg: QGraph) -> bool:
    """True iff every node reaches every node."""
    return is_strongly_connected_graph(qg.adjacency())


def run(qg: QGraph, q0: int, outputs) -> int:
    """Fold g over an output sequence starting from q0; returns the context."""
    if not 0 <= q0 < qg.nq:
        raise ValueError(f"q0={q0} outside node range")
    q = q0
    for y in outputs:
        y = int(y)
        if not 0 <= y < qg.ny:
            raise ValueError(f"output symbol {y} outside alphabet of size {qg.ny}")
        q = int(qg.g[q, y])
    return q


def isomorphic(a: QGraph, b: QGraph) -> bool:
    """Label-respecting isomorphism test: exists a node bijection sigma with
    sigma(a.g[q, y]) == b.g[sigma(q), y] for all (q, y). Brute force; graphs
    here are tiny."""
    if a.nq != b.nq or a.ny != b.ny:
        return False
    nodes = range(a.nq)
    for perm in permutations(nodes):
        if all(perm[a.g[q, y]] == b.g[perm[q], y] for q in nodes for y in range(a.ny)):
            return True
    return False


def builtin_bec2() -> QGraph:
    """Two-node context graph for outputs (0, 1, ?): a '1' moves to the second
    node, everything else (and every edge out of the second node) returns to
    the first."""
    g = np.array([
        [0, 1, 0],   # q1: y=0 -> q1, y=1 -> q2, y=? -> q1
        [0, 0, 0],   # q2: all outputs -> q1
    ])
    return QGraph(2, 3, g, name="bec2")


def builtin_bec3() -> QGraph:
    """Three-node context graph for outputs (0, 1, ?): y=1 always enters q1,
    y=0 always enters q2, and erasures walk q1 -> q2 -> q3 with a self-loop
    at q3."""
    g = np.array([
        [1, 0, 1],   # q1: y=0 -> q2, y=1 -> q1, y=? -> q2
        [1, 0, 2],   # q2: y=0 -> q2, y=1 -> q1, y=? -> q3
        [1, 0, 2],   # q3: y=0 -> q2, y=1 -> q1, y=? -> q3
    ])
    return QGraph(3, 3, g, name="bec3")


def builtin_dec3() -> QGraph:
    """Three-node context graph for outputs (-1, 0, 1, ?): y=-1 enters q1,
    y=1 enters q2, y=? enters q3, and y=0 holds the current node."""
    g = np.array([
        [0, 0, 1, 2],   # q1
        [0, 1, 1, 2],   # q2
        [0, 2, 1, 2],   # q3
    ])
    return QGraph(3, 4, g, name="dec3")


BUILTIN_QGRAPHS = {
    "bec2": builtin_bec2,
    "bec3": builtin_bec3,
    "dec3": builtin_dec3,
}
