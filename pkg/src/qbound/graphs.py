"""Small directed-graph utilities: SCCs, closedness, period, cyclic partition.

Graphs are given as adjacency lists: ``adj[i]`` is an iterable of successor
node indices for node ``i`` (0..n-1). Everything here is deliberately
dependency-free; the graphs in this package have at most a few dozen nodes.
"""
from __future__ import annotations

from collections import deque
from math import gcd


def strongly_connected_components(adj: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Returns SCCs as lists of node indices.

    Components are emitted in reverse topological order of the condensation;
    each component's node list is sorted.
    """
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        # (node, iterator position) work stack
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            succs = adj[v]
            while pi < len(succs):
                w = succs[pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comp.sort()
                sccs.append(comp)
    return sccs


def is_strongly_connected_graph(adj: list[list[int]]) -> bool:
    """True iff the whole graph is one strongly connected component."""
    n = len(adj)
    if n == 0:
        return True
    sccs = strongly_connected_components(adj)
    return len(sccs) == 1 and len(sccs[0]) == n


def closed_components(adj: list[list[int]]) -> list[list[int]]:
    """SCCs with no edge leaving the component (closed communicating classes)."""
    sccs = strongly_connected_components(adj)
    comp_of = {}
    for ci, comp in enumerate(sccs):
        for v in comp:
            comp_of[v] = ci
    closed = []
    for ci, comp in enumerate(sccs):
        members = set(comp)
        if all(w in members for v in comp for w in adj[v]):
            closed.append(comp)
    return closed


def class_period(adj: list[list[int]], nodes: list[int]) -> int:
    """Period of a strongly connected node set: gcd of its cycle lengths.

    Computed from BFS levels: for every edge u->v inside the class,
    level(u)+1-level(v) is a multiple of the period, and their gcd over all
    edges equals it.
    """
    members = set(nodes)
    root = nodes[0]
    level = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w in members and w not in level:
                level[w] = level[v] + 1
                queue.append(w)
    if len(level) != len(members):
        raise ValueError("node set is not strongly connected")
    d = 0
    for v in nodes:
        for w in adj[v]:
            if w in members:
                d = gcd(d, level[v] + 1 - level[w])
    return abs(d) if d != 0 else 1


def cyclic_partition(adj: list[list[int]], nodes: list[int]) -> list[list[int]]:
    """Partition a strongly connected class into D subsets on a cycle.

    Every edge from subset i lands in subset (i+1) mod D, where D is the
    class period.
    """
    d = class_period(adj, nodes)
    members = set(nodes)
    root = nodes[0]
    level = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w in members and w not in level:
                level[w] = level[v] + 1
                queue.append(w)
    parts: list[list[int]] = [[] for _ in range(d)]
    for v in sorted(nodes):
        parts[level[v] % d].append(v)
    return parts
