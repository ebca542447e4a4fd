"""Unifilar finite-state channels: representation, validation, built-in families.

A unifilar channel has finite input/output/state alphabets, a kernel
p(y|x,s) and a deterministic next-state table s' = f(x,y,s). Input
constraints are modeled with a boolean mask over (x, s) pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

ROW_SUM_TOL = 1e-12
SUPPORT_TOL = 1e-12


class ChannelValidationError(ValueError):
    """Raised when a channel fails its structural invariants."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class UnifilarChannel:
    """Immutable unifilar FSC.

    kernel[y, x, s] = p(y | x, s)
    next_state[x, y, s] = f(x, y, s), total (defined even for p(y|x,s)=0)
    input_mask[x, s]  = True iff input x is permitted in state s
    """

    nx: int
    ny: int
    ns: int
    kernel: np.ndarray
    next_state: np.ndarray
    input_mask: np.ndarray = None
    name: str = ""
    y_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        kernel = _frozen(np.asarray(self.kernel, dtype=float))
        nxt = _frozen(np.asarray(self.next_state, dtype=np.int64))
        if self.input_mask is None:
            mask = np.ones((self.nx, self.ns), dtype=bool)
        else:
            mask = np.asarray(self.input_mask, dtype=bool)
        mask = _frozen(mask)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "next_state", nxt)
        object.__setattr__(self, "input_mask", mask)
        if self.y_labels is not None:
            object.__setattr__(self, "y_labels", tuple(str(t) for t in self.y_labels))

    def label_of(self, y: int) -> str:
        return self.y_labels[y] if self.y_labels is not None else str(y)

    def require_valid(self):
        problems = validate(self)
        if problems:
            raise ChannelValidationError(problems)
        return self


def validate(channel: UnifilarChannel) -> list[str]:
    """Check every structural invariant; return a list of violations (empty = ok)."""
    problems = []
    nx, ny, ns = channel.nx, channel.ny, channel.ns
    if min(nx, ny, ns) < 1:
        problems.append("alphabet sizes must be positive")
        return problems
    w, f, mask = channel.kernel, channel.next_state, channel.input_mask
    if w.shape != (ny, nx, ns):
        problems.append(f"kernel shape {w.shape} != {(ny, nx, ns)}")
        return problems
    if f.shape != (nx, ny, ns):
        problems.append(f"next_state shape {f.shape} != {(nx, ny, ns)}")
        return problems
    if mask.shape != (nx, ns):
        problems.append(f"input_mask shape {mask.shape} != {(nx, ns)}")
        return problems
    if np.any(w < -SUPPORT_TOL) or np.any(w > 1.0 + SUPPORT_TOL):
        bad = np.argwhere((w < -SUPPORT_TOL) | (w > 1.0 + SUPPORT_TOL))
        y, x, s = bad[0]
        problems.append(f"kernel entry (y={y},x={x},s={s}) = {w[y, x, s]} outside [0,1]")
    sums = w.sum(axis=0)
    bad = np.argwhere(np.abs(sums - 1.0) > ROW_SUM_TOL)
    for x, s in bad:
        problems.append(f"row (x={x},s={s}) sums to {sums[x, s]:.12g}")
    if np.any(f < 0) or np.any(f >= ns):
        problems.append("next_state has entries outside {0,...,ns-1}")
    no_input = np.argwhere(~mask.any(axis=0))
    for (s,) in no_input:
        problems.append(f"state s={s} has no permitted input")
    return problems


def state_adjacency(channel: UnifilarChannel, support_tol: float = SUPPORT_TOL) -> list[list[int]]:
    """Adjacency of the state digraph: s -> f(x,y,s) over permitted, positive-probability (x,y)."""
    adj = [set() for _ in range(channel.ns)]
    w, f, mask = channel.kernel, channel.next_state, channel.input_mask
    for s in range(channel.ns):
        for x in range(channel.nx):
            if not mask[x, s]:
                continue
            for y in range(channel.ny):
                if w[y, x, s] > support_tol:
                    adj[s].add(int(f[x, y, s]))
    return [sorted(a) for a in adj]


def is_strongly_connected(channel: UnifilarChannel) -> bool:
    """True iff every state reaches every state through positive-probability edges."""
    channel.require_valid()
    from .graphs import is_strongly_connected_graph

    return is_strongly_connected_graph(state_adjacency(channel))


def builtin_trapdoor(p: float) -> UnifilarChannel:
    """Trapdoor channel: y equals the previous state w.p. p and the input w.p. 1-p;
    the state evolves as s' = s xor x xor y."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0,1]")
    w = np.zeros((2, 2, 2))
    f = np.zeros((2, 2, 2), dtype=np.int64)
    for x in range(2):
        for s in range(2):
            w[s, x, s] += p
            w[x, x, s] += 1.0 - p
            for y in range(2):
                f[x, y, s] = s ^ x ^ y
    return UnifilarChannel(2, 2, 2, w, f, name=f"trapdoor(p={p:g})")


def builtin_dec(eps: float) -> UnifilarChannel:
    """Dicode erasure channel: y = x - s w.p. 1-eps, '?' w.p. eps; state s' = x.

    Output indices follow the fixed ordering (-1, 0, 1, ?).
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps} outside [0,1]")
    labels = ("-1", "0", "1", "?")
    w = np.zeros((4, 2, 2))
    f = np.zeros((2, 4, 2), dtype=np.int64)
    for x in range(2):
        for s in range(2):
            w[(x - s) + 1, x, s] = 1.0 - eps
            w[3, x, s] = eps
            for y in range(4):
                f[x, y, s] = x
    return UnifilarChannel(2, 4, 2, w, f, name=f"dec(eps={eps:g})", y_labels=labels)


def builtin_bec_no11(eps: float) -> UnifilarChannel:
    """Binary erasure channel with the no-consecutive-ones input constraint.

    The constraint is folded into the state (s = previous input) and enforced
    with the input mask: x=1 is forbidden in s=1. Output ordering is (0, 1, ?).
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps} outside [0,1]")
    labels = ("0", "1", "?")
    w = np.zeros((3, 2, 2))
    f = np.zeros((2, 3, 2), dtype=np.int64)
    for x in range(2):
        for s in range(2):
            w[x, x, s] = 1.0 - eps
            w[2, x, s] = eps
            for y in range(3):
                f[x, y, s] = x
    mask = np.ones((2, 2), dtype=bool)
    mask[1, 1] = False
    return UnifilarChannel(2, 3, 2, w, f, input_mask=mask, name=f"bec_no11(eps={eps:g})", y_labels=labels)


BUILTIN_CHANNELS = {
    "trapdoor": builtin_trapdoor,
    "dec": builtin_dec,
    "bec": builtin_bec_no11,
    "bec_no11": builtin_bec_no11,
}
