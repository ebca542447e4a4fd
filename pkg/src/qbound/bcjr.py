"""Forward state-estimation recursion and the certified lower bound.

The forward recursion maps a belief over channel states and an observed
output to the posterior belief. An input policy is *invariant* for a Q-graph
when that map sends the stationary conditional belief of node q under output
y exactly onto the conditional belief of g(q, y); the bound objective is then
an achievable rate and is certified as such.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import UnifilarChannel
from .coupled import (PRUNE_TOL, InputPolicy, NotInPpiError, build_coupled,
                      closed_classes, period, prune, stationary,
                      validate_policy, PolicyValidationError)
from .bound import objective
from .qgraph import QGraph

INVARIANCE_TOL = 1e-8
Y_SUPPORT_TOL = 1e-9


class ZeroProbabilityOutputError(ValueError):
    pass


class InvarianceError(ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"policy is not invariant under the belief update: {report.witness}")


def bcjr_update(channel: UnifilarChannel, z: np.ndarray, u: np.ndarray, y: int) -> np.ndarray:
    """One forward step: posterior over next states given output y.

    z is a belief over states, u[x, s] a conditional input distribution.
    Raises if the output has zero probability under (z, u).
    """
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    unnorm = _bcjr_unnormalized(channel, z, u, int(y))
    py = unnorm.sum()
    if py <= 0.0:
        raise ZeroProbabilityOutputError(f"output y={y} has probability {py:g} at this belief")
    return unnorm / py


def _bcjr_unnormalized(channel: UnifilarChannel, z, u, y: int) -> np.ndarray:
    w = channel.kernel[y]          # (nx, ns)
    f = channel.next_state[:, y]   # (nx, ns)
    weights = w * u * z[None, :]   # (nx, ns)
    out = np.zeros(channel.ns)
    np.add.at(out, f.ravel(), weights.ravel())
    return out


def output_distribution(channel: UnifilarChannel, z, u) -> np.ndarray:
    """p(y) under belief z and action u."""
    return np.einsum("yxs,xs,s->y", channel.kernel, np.asarray(u, float),
                     np.asarray(z, float))


def is_aperiodic_input(channel: UnifilarChannel, qg: QGraph, policy: InputPolicy,
                       tol: float = PRUNE_TOL) -> bool:
    """True iff the policy-pruned coupled graph is in P_pi with period 1."""
    cg = prune(build_coupled(channel, qg), policy, tol)
    classes = closed_classes(cg)
    if len(classes) != 1:
        raise NotInPpiError(len(classes))
    return period(cg, classes[0]) == 1


@dataclass
class InvarianceReport:
    ok: bool
    conditionals: np.ndarray        # (nq, ns); NaN rows for contexts with pi(q)=0
    witness: tuple | None = None    # (q, y, gap) of the first violation
    skipped_contexts: list = field(default_factory=list)
    max_gap: float = 0.0


def is_bcjr_invariant(channel: UnifilarChannel, qg: QGraph, policy: InputPolicy,
                      tol: float = INVARIANCE_TOL, prune_tol: float = PRUNE_TOL,
                      y_tol: float = Y_SUPPORT_TOL) -> InvarianceReport:
    """Check the fixed-point property of the forward recursion on stationary
    conditionals, for every (q, y) with p(y|q) above y_tol."""
    if not is_aperiodic_input(channel, qg, policy, tol=prune_tol):
        raise ValueError("policy is not an aperiodic input")
    pi = stationary(channel, qg, policy, tol=prune_tol)  # (ns, nq)
    pq = pi.sum(axis=0)
    nq = qg.nq
    conditionals = np.full((nq, channel.ns), np.nan)
    skipped = []
    for q in range(nq):
        if pq[q] > 0.0:
            conditionals[q] = pi[:, q] / pq[q]
        else:
            skipped.append(q)
    ok = True
    witness = None
    max_gap = 0.0
    for q in range(nq):
        if q in skipped:
            continue
        z = conditionals[q]
        u = policy.u[:, :, q]
        py = output_distribution(channel, z, u)
        for y in range(channel.ny):
            if py[y] <= y_tol:
                continue
            updated = _bcjr_unnormalized(channel, z, u, y) / py[y]
            target = conditionals[int(qg.g[q, y])]
            gap = float(np.max(np.abs(updated - target))) if np.all(np.isfinite(target)) else np.inf
            max_gap = max(max_gap, gap)
            if gap > tol and ok:
                ok = False
                witness = (q, y, gap)
    return InvarianceReport(ok, conditionals, witness, skipped, max_gap)


def lower_bound(channel: UnifilarChannel, qg: QGraph, policy: InputPolicy,
                tol: float = INVARIANCE_TOL, prune_tol: float = PRUNE_TOL) -> float:
    """Certified achievable rate I(X,S;Y|Q) for an invariant aperiodic input.

    Refuses (raises InvarianceError with the witness) when the invariance
    check fails; no uncertified number is emitted.
    """
    report = is_bcjr_invariant(channel, qg, policy, tol=tol, prune_tol=prune_tol)
    if not report.ok:
        raise InvarianceError(report)
    return objective(channel, qg, policy, prune_tol=prune_tol)


# ---------------------------------------------------------------------------
# Reference policy families used with specific Q-graphs.


def bec3_lower_policy(p: float) -> InputPolicy:
    """The lower-bound policy family for the three-node erasure-channel graph:
    p(x=1|s=0,q2) = p and p(x=1|s=0,q3) = p/(1-p), with masked rows pinned.
    Valid for p in [0, 0.5]."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p={p} outside [0, 0.5]")
    u = np.zeros((2, 2, 3))
    u[0, 1, :] = 1.0                      # constrained state: x=0 forced
    ratio = p / (1.0 - p) if p < 1.0 else 1.0
    for q, mass in enumerate((p, p, ratio)):
        u[1, 0, q] = mass
        u[0, 0, q] = 1.0 - mass
    return InputPolicy(u)


def dec3_symmetric_policy(a: float, p: float) -> InputPolicy:
    """The symmetric policy family for the dicode-erasure three-node graph:
    p(x=0|s=0,q1) = p(x=1|s=1,q2) = a and p(x=1|s=0,q3) = p(x=0|s=1,q3) = p.
    Rows for the two unreachable pairs are set symmetrically."""
    if not (0.0 <= a <= 1.0 and 0.0 <= p <= 1.0):
        raise ValueError("parameters outside [0,1]")
    u = np.zeros((2, 2, 3))
    u[0, 0, 0], u[1, 0, 0] = a, 1.0 - a          # (s=0, q1)
    u[1, 1, 1], u[0, 1, 1] = a, 1.0 - a          # (s=1, q2)
    u[1, 0, 2], u[0, 0, 2] = p, 1.0 - p          # (s=0, q3)
    u[0, 1, 2], u[1, 1, 2] = p, 1.0 - p          # (s=1, q3)
    u[0, 1, 0], u[1, 1, 0] = a, 1.0 - a          # (s=1, q1), unreachable
    u[1, 0, 1], u[0, 0, 1] = a, 1.0 - a          # (s=0, q2), unreachable
    return InputPolicy(u)


def trapdoor_lower_policy(z: float, p: float, qg: QGraph) -> InputPolicy:
    """The four-node trapdoor policy family with parameter z in [0, 1].

    Low-index contexts send x=0 deterministically from state 0, high-index
    contexts mirror that from state 1; the crossover rows carry mass
    alpha = z*p / (1 - (1-p)*z).
    """
    if qg.nq != 4 or qg.ny != 2:
        raise ValueError("trapdoor lower-bound policy needs a 4-node, binary-output Q-graph")
    if not (0.0 <= z <= 1.0 and 0.0 <= p <= 1.0):
        raise ValueError("parameters outside [0,1]")
    den = 1.0 - (1.0 - p) * z
    alpha = z * p / den if den > 0 else 1.0
    u = np.zeros((2, 2, 4))
    x0_given_s0 = (1.0, 1.0, alpha, alpha)
    x1_given_s1 = (alpha, alpha, 1.0, 1.0)
    for q in range(4):
        u[0, 0, q] = x0_given_s0[q]
        u[1, 0, q] = 1.0 - x0_given_s0[q]
        u[1, 1, q] = x1_given_s1[q]
        u[0, 1, q] = 1.0 - x1_given_s1[q]
    return InputPolicy(u)
