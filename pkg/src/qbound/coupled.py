"""The (S,Q)-coupled graph and its Markov-chain analysis.

Couples a unifilar channel with a Q-graph on node pairs (s, q). Edges are
labeled by (x, y) and exist when the channel can produce them:
s' = f(x, y, s), q' = g(q, y), p(y|x,s) > 0 and input x permitted in s.
Given an input policy p(x|s,q), the coupled graph becomes a Markov chain;
this module finds its closed communicating classes, period and stationary
distribution.
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from . import graphs
from .channel import SUPPORT_TOL, UnifilarChannel
from .qgraph import QGraph

PRUNE_TOL = 1e-9
STATIONARY_RESIDUAL_TOL = 1e-10
POLICY_ROW_TOL = 1e-12


class AlphabetMismatchError(ValueError):
    pass


class PolicyValidationError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class NotInPpiError(ValueError):
    """The pruned coupled graph does not have a single closed class."""

    def __init__(self, n_classes: int):
        self.n_classes = n_classes
        super().__init__(f"pruned coupled graph has {n_classes} closed classes (need exactly 1)")


@dataclass(frozen=True)
class InputPolicy:
    """Conditional input distribution u[x, s, q] = p(x | s, q)."""

    u: np.ndarray

    def __post_init__(self):
        u = np.ascontiguousarray(np.asarray(self.u, dtype=float))
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def nx(self):
        return self.u.shape[0]

    @property
    def ns(self):
        return self.u.shape[1]

    @property
    def nq(self):
        return self.u.shape[2]


def validate_policy(channel: UnifilarChannel, nq: int, policy: InputPolicy) -> list[str]:
    problems = []
    u = policy.u
    if u.shape != (channel.nx, channel.ns, nq):
        problems.append(f"policy shape {u.shape} != {(channel.nx, channel.ns, nq)}")
        return problems
    if np.any(u < -POLICY_ROW_TOL):
        problems.append("policy has negative entries")
    sums = u.sum(axis=0)
    bad = np.argwhere(np.abs(sums - 1.0) > POLICY_ROW_TOL)
    for s, q in bad:
        problems.append(f"policy row (s={s},q={q}) sums to {sums[s, q]:.12g}")
    masked = ~channel.input_mask  # (nx, ns)
    viol = np.argwhere(np.abs(u) > POLICY_ROW_TOL)
    for x, s, q in viol:
        if masked[x, s]:
            problems.append(f"policy puts mass on forbidden input (x={x},s={s},q={q})")
    return problems


def uniform_policy(channel: UnifilarChannel, nq: int) -> InputPolicy:
    """Uniform over permitted inputs in every (s, q) row."""
    mask = channel.input_mask.astype(float)  # (nx, ns)
    row = mask / mask.sum(axis=0, keepdims=True)
    u = np.repeat(row[:, :, None], nq, axis=2)
    return InputPolicy(u)


@dataclass(frozen=True)
class CoupledGraph:
    """Product graph on (s, q) pairs with (x, y)-labeled edges.

    Node (s, q) is indexed as s * nq + q. Edge arrays are parallel:
    edge k goes from (src_s[k], src_q[k]) to (dst_s[k], dst_q[k]) with label
    (x[k], y[k]).
    """

    channel: UnifilarChannel
    qgraph: QGraph
    src_s: np.ndarray
    src_q: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dst_s: np.ndarray
    dst_q: np.ndarray

    @property
    def ns(self):
        return self.channel.ns

    @property
    def nq(self):
        return self.qgraph.nq

    @property
    def n_nodes(self):
        return self.ns * self.nq

    def node_index(self, s: int, q: int) -> int:
        return s * self.nq + q

    def node_pair(self, idx: int) -> tuple[int, int]:
        return divmod(idx, self.nq)

    def adjacency(self) -> list[list[int]]:
        adj = [set() for _ in range(self.n_nodes)]
        src = self.src_s * self.nq + self.src_q
        dst = self.dst_s * self.nq + self.dst_q
        for a, b in zip(src, dst):
            adj[a].add(int(b))
        return [sorted(a) for a in adj]

    def edge_count(self) -> int:
        return len(self.src_s)


def build_coupled(channel: UnifilarChannel, qg: QGraph,
                  support_tol: float = SUPPORT_TOL) -> CoupledGraph:
    """Construct the (S,Q)-coupled graph for a channel / Q-graph pair."""
    channel.require_valid()
    if channel.ny != qg.ny:
        raise AlphabetMismatchError(
            f"channel has {channel.ny} outputs but Q-graph expects {qg.ny}")
    w, f, mask = channel.kernel, channel.next_state, channel.input_mask
    src_s, src_q, xs, ys, dst_s, dst_q = [], [], [], [], [], []
    for s in range(channel.ns):
        for q in range(qg.nq):
            for x in range(channel.nx):
                if not mask[x, s]:
                    continue
                for y in range(channel.ny):
                    if w[y, x, s] <= support_tol:
                        continue
                    src_s.append(s)
                    src_q.append(q)
                    xs.append(x)
                    ys.append(y)
                    dst_s.append(int(f[x, y, s]))
                    dst_q.append(int(qg.g[q, y]))
    arrays = [np.asarray(a, dtype=np.int64) for a in (src_s, src_q, xs, ys, dst_s, dst_q)]
    for a in arrays:
        a.setflags(write=False)
    return CoupledGraph(channel, qg, *arrays)


def prune(cg: CoupledGraph, policy: InputPolicy, tol: float = PRUNE_TOL) -> CoupledGraph:
    """Remove edges whose label x has policy mass <= tol at the source (s, q)."""
    problems = validate_policy(cg.channel, cg.nq, policy)
    if problems:
        raise PolicyValidationError(problems)
    keep = policy.u[cg.x, cg.src_s, cg.src_q] > tol
    arrays = [a[keep] for a in (cg.src_s, cg.src_q, cg.x, cg.y, cg.dst_s, cg.dst_q)]
    for a in arrays:
        a.setflags(write=False)
    return CoupledGraph(cg.channel, cg.qgraph, *arrays)


def closed_classes(cg: CoupledGraph) -> list[list[tuple[int, int]]]:
    """Closed communicating classes as lists of (s, q) pairs."""
    comps = graphs.closed_components(cg.adjacency())
    return [[cg.node_pair(v) for v in comp] for comp in comps]


def lemma1_check(cg: CoupledGraph) -> bool:
    """Every closed class covers all states and all contexts (and one exists)."""
    classes = closed_classes(cg)
    if not classes:
        return False
    for cls in classes:
        ss = {s for s, _ in cls}
        qs = {q for _, q in cls}
        if ss != set(range(cg.ns)) or qs != set(range(cg.nq)):
            return False
    return True


def in_P_pi(channel: UnifilarChannel, qg: QGraph, policy: InputPolicy,
            tol: float = PRUNE_TOL) -> bool:
    """True iff the policy-pruned coupled graph has exactly one closed class."""
    cg = prune(build_coupled(channel, qg), policy, tol)
    return len(graphs.closed_components(cg.adjacency())) == 1


def period(cg: CoupledGraph, cls: list[tuple[int, int]] | None = None) -> int:
    """Period of a closed class (defaults to the unique closed class)."""
    cls = _resolve_class(cg, cls)
    nodes = [cg.node_index(s, q) for s, q in cls]
    return graphs.class_period(cg.adjacency(), nodes)


def class_cyclic_partition(cg: CoupledGraph, cls: list[tuple[int, int]] | None = None
                           ) -> list[list[tuple[int, int]]]:
    """Cyclic partition A_0..A_{D-1} of a closed class: edges go A_i -> A_{i+1 mod D}."""
    cls = _resolve_class(cg, cls)
    nodes = [cg.node_index(s, q) for s, q in cls]
    parts = graphs.cyclic_partition(cg.adjacency(), nodes)
    return [[cg.node_pair(v) for v in part] for part in parts]


def _resolve_class(cg: CoupledGraph, cls):
    if cls is not None:
        return cls
    classes = closed_classes(cg)
    if len(classes) != 1:
        raise NotInPpiError(len(classes))
    return classes[0]


def transfer_matrix(channel: UnifilarChannel, qg: QGraph, policy: InputPolicy) -> np.ndarray:
    """Markov transfer matrix T[(s,q),(s',q')] = sum over labels of p(y|x,s) p(x|s,q)."""
    cg = build_coupled(channel, qg)
    n = cg.n_nodes
    t = np.zeros((n, n))
    w = channel.kernel
    probs = w[cg.y, cg.x, cg.src_s] * policy.u[cg.x, cg.src_s, cg.src_q]
    src = cg.src_s * cg.nq + cg.src_q
    dst = cg.dst_s * cg.nq + cg.dst_q
    np.add.at(t, (src, dst), probs)
    return t


def stationary(channel: UnifilarChannel, qg: QGraph, policy: InputPolicy,
               tol: float = PRUNE_TOL) -> np.ndarray:
    """Stationary distribution pi(s, q) of the policy-induced chain.

    Requires the policy to lie in P_pi (single closed class after pruning).
    Solves pi T = pi, sum(pi) = 1 directly on the closed-class submatrix;
    nodes outside the class get exactly 0. Returns an (ns, nq) array.
    """
    problems = validate_policy(channel, qg.nq, policy)
    if problems:
        raise PolicyValidationError(problems)
    cg = build_coupled(channel, qg)
    pruned = prune(cg, policy, tol)
    comps = graphs.closed_components(pruned.adjacency())
    if len(comps) != 1:
        raise NotInPpiError(len(comps))
    cls = comps[0]
    t = transfer_matrix(channel, qg, policy)
    tc = t[np.ix_(cls, cls)]
    k = len(cls)
    # One balance row is redundant; replace it with the normalization row.
    a = tc.T - np.eye(k)
    a[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    pi_c = np.linalg.solve(a, b)
    residual = np.max(np.abs(pi_c @ tc - pi_c))
    if residual > STATIONARY_RESIDUAL_TOL:
        raise ArithmeticError(f"stationary solve residual {residual:.3e} exceeds tolerance")
    if pi_c.min() < -1e-12:
        raise ArithmeticError(f"stationary solve produced negative mass {pi_c.min():.3e}")
    pi_c = np.clip(pi_c, 0.0, None)
    pi_c /= pi_c.sum()
    pi = np.zeros(cg.n_nodes)
    pi[cls] = pi_c
    return pi.reshape(channel.ns, qg.nq)
