"""The single-letter upper bound sup I(X,S;Y|Q) and its closed-form reference oracles.

The objective I(X,S;Y|Q) is evaluated under the stationary joint distribution
p(y,x,s,q) = p(y|x,s) p(x|s,q) pi(s,q). Maximization over input policies is
derivative-free: an exhaustive grid pass for small problems, seeded random
multistart plus Nelder-Mead polish otherwise, always searching the interior
of the policy simplex so the stationary distribution stays unique.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import graphs
from .channel import (UnifilarChannel, builtin_bec_no11, builtin_dec,
                      builtin_trapdoor, is_strongly_connected)
from .coupled import (PRUNE_TOL, CoupledGraph, InputPolicy, NotInPpiError,
                      build_coupled, closed_classes, stationary,
                      transfer_matrix)
from .entropy import entropy_bits, h2, xlog2x
from .optimize import golden_section_max, grid_axes, nelder_mead_max
from .qgraph import QGraph, is_irreducible

LOG2_PHI = math.log2((1.0 + math.sqrt(5.0)) / 2.0)
INTERIOR_FLOOR = 1e-7


@dataclass
class BoundResult:
    """Outcome of an upper-bound maximization (value is 'best found')."""

    value: float
    kind: str
    policy: InputPolicy | None = None
    pi: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def objective(channel: UnifilarChannel, qg: QGraph, policy: InputPolicy,
              prune_tol: float = PRUNE_TOL) -> float:
    """I(X,S;Y|Q) = H(Y|Q) - H(Y|X,S,Q) in bits at the policy's stationary point."""
    pi = stationary(channel, qg, policy, tol=prune_tol)
    return _objective_at(channel, policy.u, pi)


def _objective_at(channel: UnifilarChannel, u: np.ndarray, pi: np.ndarray) -> float:
    w = channel.kernel  # (ny, nx, ns)
    pyq = np.einsum("yxs,xsq,sq->yq", w, u, pi)
    pq = pyq.sum(axis=0)
    h_y_q = entropy_bits(pyq, axis=None) - entropy_bits(pq, axis=None)
    h_rows = entropy_bits(w, axis=0)  # (nx, ns): H(Y | x, s)
    h_y_xsq = float(np.einsum("xsq,sq,xs->", u, pi, h_rows))
    return float(h_y_q - h_y_xsq)


# ---------------------------------------------------------------------------
# Fast batched evaluation for interior policies (fixed closed class).


class _InteriorEvaluator:
    """Evaluates I(X,S;Y|Q) for batches of interior policies.

    Interior policies never change the class structure of the coupled graph,
    so the closed class is found once and every evaluation is a dense linear
    solve on that class plus a handful of entropy contractions.
    """

    def __init__(self, channel: UnifilarChannel, qg: QGraph, cls_nodes: list[int]):
        self.channel = channel
        self.qg = qg
        cg = build_coupled(channel, qg)
        self.cg = cg
        self.n = cg.n_nodes
        self.cls = np.asarray(sorted(cls_nodes), dtype=np.int64)
        self.edge_w = channel.kernel[cg.y, cg.x, cg.src_s]
        self.edge_flat = (cg.src_s * cg.nq + cg.src_q) * self.n + (cg.dst_s * cg.nq + cg.dst_q)
        self.h_rows = entropy_bits(channel.kernel, axis=0)  # (nx, ns)
        k = len(self.cls)
        self.rhs = np.zeros(k)
        self.rhs[-1] = 1.0

    def __call__(self, u_batch: np.ndarray) -> np.ndarray:
        """u_batch: (B, nx, ns, nq) interior policies -> (B,) objective values."""
        cg, n = self.cg, self.n
        b = u_batch.shape[0]
        probs = self.edge_w[None, :] * u_batch[:, cg.x, cg.src_s, cg.src_q]
        offs = (np.arange(b)[:, None] * (n * n) + self.edge_flat[None, :]).ravel()
        t = np.bincount(offs, weights=probs.ravel(), minlength=b * n * n).reshape(b, n, n)
        tc = t[:, self.cls[:, None], self.cls[None, :]]
        k = len(self.cls)
        a = np.swapaxes(tc, 1, 2) - np.eye(k)[None, :, :]
        a[:, -1, :] = 1.0
        rhs = np.broadcast_to(self.rhs[:, None], (b, k, 1))
        try:
            pi_c = np.linalg.solve(a, rhs)[:, :, 0]
        except np.linalg.LinAlgError:
            # Rare near-singular batches: fall back to per-row solves.
            pi_c = np.full((b, k), np.nan)
            for i in range(b):
                try:
                    pi_c[i] = np.linalg.solve(a[i], self.rhs)
                except np.linalg.LinAlgError:
                    pass
        resid = np.abs(np.einsum("bk,bkj->bj", pi_c, tc) - pi_c).max(axis=1)
        ok = np.isfinite(resid) & (resid < 1e-9) & (pi_c.min(axis=1) > -1e-9)
        pi = np.zeros((b, n))
        np.clip(pi_c, 0.0, None, out=pi_c)
        pi_c /= pi_c.sum(axis=1, keepdims=True)
        pi[:, self.cls] = pi_c
        pi = pi.reshape(b, self.channel.ns, self.qg.nq)
        pyq = np.einsum("yxs,bxsq,bsq->byq", self.channel.kernel, u_batch, pi)
        pq = pyq.sum(axis=1)
        h_y_q = xlog2x(pyq).sum(axis=(1, 2)) - xlog2x(pq).sum(axis=1)
        h_y_xsq = np.einsum("bxsq,bsq,xs->b", u_batch, pi, self.h_rows)
        vals = h_y_q - h_y_xsq
        vals[~ok] = -np.inf
        return vals


# ---------------------------------------------------------------------------
# Policy parameterization: free simplex coordinates per (s, q) row.


class _PolicySpace:
    """Maps a free-parameter vector in [0,1]^d to an interior InputPolicy.

    Rows for (s, q) pairs outside the selected closed class and rows with a
    single permitted input are pinned; each remaining row contributes
    (number of permitted inputs - 1) coordinates, mapped by stick-breaking
    with an interior floor.
    """

    def __init__(self, channel: UnifilarChannel, qg: QGraph,
                 cls_pairs: list[tuple[int, int]], floor: float = INTERIOR_FLOOR):
        self.channel = channel
        self.qg = qg
        self.floor = floor
        cls_set = set(cls_pairs)
        self.rows = []  # (s, q, allowed_inputs)
        for s in range(channel.ns):
            allowed = [x for x in range(channel.nx) if channel.input_mask[x, s]]
            for q in range(qg.nq):
                if (s, q) in cls_set and len(allowed) >= 2:
                    self.rows.append((s, q, allowed))
        self.dims = sum(len(a) - 1 for _, _, a in self.rows)
        self.base = uniform_u(channel, qg.nq)

    def build(self, params: np.ndarray) -> np.ndarray:
        u = self.base.copy()
        i = 0
        for s, q, allowed in self.rows:
            k = len(allowed)
            vals = np.clip(params[i:i + k - 1], 0.0, 1.0)
            i += k - 1
            row = np.empty(k)
            rem = 1.0
            for j in range(k - 1):
                row[j] = vals[j] * rem
                rem -= row[j]
            row[k - 1] = rem
            row = self.floor + (1.0 - k * self.floor) * row
            u[:, s, q] = 0.0
            u[allowed, s, q] = row
        return u

    def build_batch(self, params: np.ndarray) -> np.ndarray:
        out = np.empty((params.shape[0], self.channel.nx, self.channel.ns, self.qg.nq))
        for i, p in enumerate(params):
            out[i] = self.build(p)
        return out

    def corners(self, cap: int = 256):
        """Deterministic policies: every combination of pure permitted inputs
        on the free rows (pinned rows stay uniform)."""
        total = 1
        for _, _, allowed in self.rows:
            total *= len(allowed)
        if total > cap:
            return
        def rec(i, u):
            if i == len(self.rows):
                yield u.copy()
                return
            s, q, allowed = self.rows[i]
            for x in allowed:
                u[:, s, q] = 0.0
                u[x, s, q] = 1.0
                yield from rec(i + 1, u)
        yield from rec(0, self.base.copy())


def uniform_u(channel: UnifilarChannel, nq: int) -> np.ndarray:
    mask = channel.input_mask.astype(float)
    row = mask / mask.sum(axis=0, keepdims=True)
    return np.repeat(row[:, :, None], nq, axis=2)


def _select_class(cg: CoupledGraph, s0: int = 0, q0: int = 0) -> tuple[list[tuple[int, int]], int]:
    classes = closed_classes(cg)
    if not classes:
        raise NotInPpiError(0)
    chosen = classes[0]
    for cls in classes:
        if (s0, q0) in cls:
            chosen = cls
            break
    return chosen, len(classes)


def optimize_upper(channel: UnifilarChannel, qg: QGraph, *,
                   restarts: int = 8, grid_step: float = 1e-2,
                   seed: int = 0, floor: float = INTERIOR_FLOOR,
                   prune_tol: float = PRUNE_TOL, seed_batch: int = 4096,
                   grid_cap: int = 1_200_000, s0: int = 0, q0: int = 0) -> BoundResult:
    """Maximize I(X,S;Y|Q) over input policies in P_pi.

    The returned value is an upper bound on feedback capacity up to optimizer
    suboptimality: a local maximum underestimates the true supremum. For
    problems with at most 3 free coordinates an exhaustive grid pass bounds
    that gap.
    """
    channel.require_valid()
    if not is_strongly_connected(channel):
        raise ValueError("channel is not strongly connected")
    if not is_irreducible(qg):
        raise ValueError("Q-graph is not irreducible")
    cg = build_coupled(channel, qg)
    cls_pairs, n_classes = _select_class(cg, s0, q0)
    cls_nodes = [cg.node_index(s, q) for s, q in cls_pairs]
    per = graphs.class_period(cg.adjacency(), cls_nodes)
    diagnostics = {"n_closed_classes": n_classes, "class_period": per,
                   "class": sorted(cls_pairs), "p_pi_violations": 0,
                   "restarts": restarts}
    if per != 1:
        warnings.warn(f"selected closed class has period {per}; the upper bound "
                      "requires an aperiodic class", stacklevel=2)
    space = _PolicySpace(channel, qg, cls_pairs, floor=floor)
    evaluator = _InteriorEvaluator(channel, qg, cls_nodes)
    rng = np.random.default_rng(seed)

    seeds: list[np.ndarray] = []
    best_x = None
    best_val = -np.inf
    if space.dims == 0:
        u = space.build(np.empty(0))
        val = evaluator(u[None])[0]
        pol = InputPolicy(u)
        return BoundResult(float(val), "upper-bound", pol,
                           stationary(channel, qg, pol, tol=prune_tol), diagnostics)

    if space.dims <= 3:
        axes = grid_axes(grid_step)
        mesh = np.stack(np.meshgrid(*([axes] * space.dims), indexing="ij"), axis=-1)
        pts = mesh.reshape(-1, space.dims)
        if len(pts) > grid_cap:
            keep = rng.choice(len(pts), size=grid_cap, replace=False)
            pts = pts[keep]
        vals = _eval_chunked(evaluator, space, pts)
        order = np.argsort(vals)[::-1]
        diagnostics["grid_points"] = int(len(pts))
        diagnostics["grid_best"] = float(vals[order[0]])
        seeds.extend(pts[order[:max(restarts // 2, 2)]])
        best_x, best_val = pts[order[0]], float(vals[order[0]])
    else:
        pts = rng.random((seed_batch, space.dims))
        pts = np.vstack([pts, np.full((1, space.dims), 0.5)])
        vals = _eval_chunked(evaluator, space, pts)
        order = np.argsort(vals)[::-1]
        diagnostics["seed_batch"] = int(len(pts))
        diagnostics["seed_best"] = float(vals[order[0]])
        seeds.extend(pts[order[:max(restarts // 2, 2)]])
        best_x, best_val = pts[order[0]], float(vals[order[0]])

    while len(seeds) < restarts:
        seeds.append(rng.random(space.dims))

    def f(x):
        return float(evaluator(space.build(x)[None])[0])

    polish = []
    for x0 in seeds[:restarts]:
        x, val = nelder_mead_max(f, np.asarray(x0, dtype=float))
        polish.append(float(val))
        if val > best_val:
            best_val, best_x = float(val), x
    diagnostics["polish_values"] = sorted(polish, reverse=True)

    # Boundary probe: deterministic corners, each checked against P_pi.
    probe = []
    for u in space.corners():
        pol = InputPolicy(u)
        try:
            val = objective(channel, qg, pol, prune_tol=prune_tol)
        except NotInPpiError:
            diagnostics["p_pi_violations"] += 1
            continue
        except (ValueError, ArithmeticError):
            continue
        probe.append(float(val))
        if val > best_val:
            best_val = float(val)
            best_x = None
            best_policy = pol
    diagnostics["boundary_probe"] = sorted(probe, reverse=True)[:8]

    if best_x is not None:
        best_policy = InputPolicy(space.build(best_x))
    pi = stationary(channel, qg, best_policy, tol=prune_tol)
    return BoundResult(float(best_val), "upper-bound", best_policy, pi, diagnostics)


def _eval_chunked(evaluator, space, pts, chunk=65536):
    vals = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        hi = min(lo + chunk, len(pts))
        vals[lo:hi] = evaluator(space.build_batch(pts[lo:hi]))
    return vals


# ---------------------------------------------------------------------------
# Closed-form reference oracles.


def oracle_bec(eps: float) -> float:
    """Feedback capacity of the no-consecutive-ones BEC:
    max over p in [0, 0.5] of H2(p) / (1/(1-eps) + p)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps} outside [0,1]")
    if eps >= 1.0:
        return 0.0
    c = 1.0 / (1.0 - eps)
    _, val = golden_section_max(lambda p: float(h2(p)) / (c + p), 0.0, 0.5)
    return float(val)


def oracle_dec(eps: float) -> float:
    """Feedback capacity of the dicode erasure channel:
    max over p in [0, 1] of (1-eps)(p + eps*H2(p)) / (eps + (1-eps)p)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps} outside [0,1]")
    if eps == 0.0:
        return 1.0

    def f(p):
        den = eps + (1.0 - eps) * p
        return (1.0 - eps) * (p + eps * float(h2(p))) / den if den > 0 else 0.0

    _, val = golden_section_max(f, 0.0, 1.0)
    return float(val)


def trapdoor_kappas(a1, a2, a3, p):
    """delta and kappa_1..3 of the trapdoor upper-bound formula (vectorized)."""
    a1, a2, a3 = np.asarray(a1, float), np.asarray(a2, float), np.asarray(a3, float)
    q = 1.0 - p
    delta = 2.0 * q * (a1 - a2 + a1 * a3 - a1 * a2 + a2 * a3) + 4.0 * a1 * p - 2.0 * a3 + 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = (1.0 - a3) * (1.0 - a2 * q) / delta
        k2 = a1 * (p + a3 * q) / delta
        k3 = a1 * (1.0 - a2 * q) / delta
    return delta, k1, k2, k3


def trapdoor_lambda2(a1, a2, a3, p):
    """The sign-definite term 2(k3 - k1 a1 - k2 a2 - 0.5 a3); nonpositive
    wherever delta > 0."""
    _, k1, k2, k3 = trapdoor_kappas(a1, a2, a3, p)
    return 2.0 * (k3 - k1 * np.asarray(a1, float) - k2 * np.asarray(a2, float)
                  - 0.5 * np.asarray(a3, float))


def _trapdoor_bound_value(a1, a2, a3, p):
    """Upper-bound objective at policy parameters (a1, a2, a3).

    Note the paper's displayed formula carries a sign typo on the a3 term:
    as printed, its p=0.5 specialization contradicts the closed-form corollary
    it is paired with. The sign used here reproduces that specialization
    exactly and makes the bound reach the known capacity endpoints.
    """
    delta, k1, k2, k3 = trapdoor_kappas(a1, a2, a3, p)
    a1 = np.asarray(a1, float)
    a2 = np.asarray(a2, float)
    a3 = np.asarray(a3, float)
    q = 1.0 - p
    ksum = k1 + k2
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (k1 * (1.0 - a1 * q) + k2 * q * a2) / ksum
    lam1 = np.where(ksum > 1e-15, 2.0 * ksum * h2(np.clip(arg, 0.0, 1.0)), 0.0)
    val = lam1 + 2.0 * k3 - 2.0 * float(h2(p)) * (k1 * a1 + k2 * a2 + 0.5 * a3)
    bad = ~(delta > 1e-12) | ~np.isfinite(val)
    return np.where(bad, -np.inf, val)


def oracle_trapdoor_upper(p: float, grid_step: float = 1e-2) -> float:
    """Trapdoor-channel upper bound: max of the three-parameter closed form
    over [0,1]^3 (grid scan plus local refinement)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0,1]")
    axes = grid_axes(grid_step)
    g1, g2, g3 = np.meshgrid(axes, axes, axes, indexing="ij")
    vals = _trapdoor_bound_value(g1, g2, g3, p)
    flat = int(np.argmax(vals))
    best = float(vals.ravel()[flat])
    if not np.isfinite(best):
        raise ArithmeticError("trapdoor bound undefined on the whole probe grid")
    i, j, k = np.unravel_index(flat, vals.shape)
    x0 = np.array([axes[i], axes[j], axes[k]])

    def f(x):
        v = float(_trapdoor_bound_value(x[0], x[1], x[2], p))
        return v if np.isfinite(v) else -1e9

    x, val = nelder_mead_max(f, x0, fatol=1e-12, xatol=1e-9)
    return float(max(best, val))


def oracle_trapdoor_lower() -> float:
    """Certified trapdoor rate: max over a of H2(a)/(2-a), which is log2(phi)."""
    _, val = golden_section_max(lambda a: float(h2(a)) / (2.0 - a), 0.0, 1.0, tol=1e-12)
    return float(val)


FAMILIES = {
    "bec": (builtin_bec_no11, oracle_bec),
    "dec": (builtin_dec, oracle_dec),
    "trapdoor": (builtin_trapdoor, oracle_trapdoor_upper),
}


def sweep(family: str, qg: QGraph, params, out_path=None, **opt_kwargs):
    """Map optimize_upper over a parameter grid of a builtin channel family.

    Returns rows of (param, upper_bound, oracle, gap); failed rows carry NaNs.
    Writes CSV with header param,upper_bound,oracle,gap when out_path is given.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown channel family {family!r}")
    make, oracle = FAMILIES[family]
    rows = []
    for v in params:
        try:
            res = optimize_upper(make(float(v)), qg, **opt_kwargs)
            ub = res.value
            oc = oracle(float(v))
            rows.append((float(v), ub, oc, ub - oc))
        except Exception:
            rows.append((float(v), float("nan"), float("nan"), float("nan")))
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["param", "upper_bound", "oracle", "gap"])
            wr.writerows(rows)
    return rows
