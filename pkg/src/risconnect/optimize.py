"""Link-selection solvers over a candidate set, perturbation bounds and the
secular-equation evaluation of a rank-one edge addition.

All solvers take the base graph either as a :class:`Graph` or as its
Laplacian, and return a :class:`Selection`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np
from scipy.sparse.csgraph import connected_components

from .candidates import CandidateLink, SelectionConstraints, conflicts, is_feasible
from .graph import (
    Graph,
    SpectralResult,
    criticality_report,
    edge_weight,
    fiedler_value,
    laplacian,
    rank_one_add,
    spectrum,
)

SCORE_TIE_TOL = 1e-12
EXHAUSTIVE_GUARD = 2_000_000


class CombinatorialExplosionError(RuntimeError):
    pass


@dataclass(frozen=True)
class StepRecord:
    id: int
    predicted: float | None  # w_l * (v_u - v_a)^2, None when scored by realized lambda2
    realized: float
    fallback: bool = False


@dataclass
class Selection:
    chosen: tuple[int, ...]
    lambda2_before: float
    lambda2_after: float
    method: str
    per_step: list[StepRecord] = field(default_factory=list)

    @property
    def n_links(self) -> int:
        return len(self.chosen)


@dataclass
class RelaxedSolution:
    z: np.ndarray
    objective: float
    iterations: int
    step_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class BoundsReport:
    lower: float
    upper_prop2: float
    upper_prop1: float
    actual: float
    delta: float
    lower_rederived: float = math.nan
    lower_defined: bool = True
    upper_defined: bool = True

    @property
    def lower_violated(self) -> bool:
        return self.lower_defined and self.actual < self.lower - 1e-9


def _as_laplacian(base: Graph | np.ndarray) -> np.ndarray:
    if isinstance(base, Graph):
        return laplacian(base)
    return np.array(base, dtype=float, copy=True)


def n_components(L: np.ndarray) -> int:
    adj = (np.abs(L) > 0) & ~np.eye(L.shape[0], dtype=bool)
    return connected_components(adj, directed=False)[0]


def _component_labels(L: np.ndarray) -> np.ndarray:
    adj = (np.abs(L) > 0) & ~np.eye(L.shape[0], dtype=bool)
    return connected_components(adj, directed=False)[1]


def _first_max(keys: Sequence[float], tol: float = SCORE_TIE_TOL) -> int:
    best = max(keys)
    cut = best - tol * max(1.0, abs(best))
    return next(k for k, s in enumerate(keys) if s >= cut)


def _prune(remaining: list[CandidateLink], pick: CandidateLink,
           c: SelectionConstraints) -> list[CandidateLink]:
    return [x for x in remaining if x.id != pick.id and not conflicts(x, pick, c)]


def _emit(trace: TextIO | None, method: str, step: int, rec: StepRecord) -> None:
    if trace is None:
        return
    trace.write(json.dumps({
        "method": method, "step": step, "chosen_id": rec.id,
        "predicted": rec.predicted, "realized": rec.realized,
    }) + "\n")


def _constraints(R: int, constraints: SelectionConstraints | None) -> SelectionConstraints:
    return constraints if constraints is not None else SelectionConstraints(R)


def greedy_perturbation(
    base: Graph | np.ndarray,
    cands: Sequence[CandidateLink],
    R: int,
    constraints: SelectionConstraints | None = None,
    *,
    recompute_weights: bool = False,
    eps: float = 1e-5,
    trace: TextIO | None = None,
) -> Selection:
    """Add up to R links one at a time, each maximising ``w_l (v_u - v_a)^2``
    under the current Fiedler vector, then drop every candidate that shares
    the chosen UE, RIS or UAV.

    While the current graph is disconnected the first-order score carries no
    information, so candidates are ranked by realized lambda2 instead, then by
    whether they join two components, then by weight.
    """
    c = _constraints(R, constraints)
    L = _as_laplacian(base)
    remaining = sorted((x for x in cands if is_feasible([x], c)), key=lambda x: x.id)
    weights = {x.id: x.weight for x in remaining}
    spec = spectrum(L)
    before = spec.fiedler_value
    chosen: list[int] = []
    steps: list[StepRecord] = []
    limit = min(R, c.max_links)

    while len(chosen) < limit and remaining:
        if recompute_weights and chosen:
            crit = criticality_report(L, eps).values
            weights.update({x.id: edge_weight(crit[x.endpoints[0]], crit[x.endpoints[1]])
                            for x in remaining})
        if n_components(L) == 1:
            v = spec.fiedler_vector
            scores = [weights[x.id] * (v[x.endpoints[0]] - v[x.endpoints[1]]) ** 2
                      for x in remaining]
            k = _first_max(scores)
            predicted, fallback = scores[k], False
        else:
            labels = _component_labels(L)
            keys = []
            for x in remaining:
                i, j = x.endpoints
                lam = fiedler_value(rank_one_add(L, i, j, weights[x.id]))
                keys.append((round(lam, 12), labels[i] != labels[j], weights[x.id]))
            best = max(keys)
            k = keys.index(best)
            predicted, fallback = None, True
        pick = remaining[k]
        i, j = pick.endpoints
        L = rank_one_add(L, i, j, weights[pick.id])
        spec = spectrum(L)
        rec = StepRecord(pick.id, predicted, spec.fiedler_value, fallback)
        steps.append(rec)
        _emit(trace, "greedy", len(steps), rec)
        chosen.append(pick.id)
        remaining = _prune(remaining, pick, c)

    return Selection(tuple(chosen), before, spec.fiedler_value, "greedy", steps)


def _apply(L: np.ndarray, links: Sequence[CandidateLink]) -> np.ndarray:
    out = L.copy()
    for x in links:
        i, j = x.endpoints
        out[i, i] += x.weight
        out[j, j] += x.weight
        out[i, j] -= x.weight
        out[j, i] -= x.weight
    return out


def _realized_steps(L: np.ndarray, links: Sequence[CandidateLink]) -> list[StepRecord]:
    steps = []
    for x in links:
        L = rank_one_add(L, *x.endpoints, x.weight)
        steps.append(StepRecord(x.id, None, fiedler_value(L)))
    return steps


def count_subsets(n: int, R: int) -> int:
    return math.comb(n, min(R, n))


def exhaustive(
    base: Graph | np.ndarray,
    cands: Sequence[CandidateLink],
    R: int,
    constraints: SelectionConstraints | None = None,
    *,
    guard: int = EXHAUSTIVE_GUARD,
    batch: int = 2048,
) -> Selection:
    """Best feasible subset of at most R candidates by direct lambda2 evaluation.

    Subsets are visited in lexicographic order of candidate position, so the
    first maximiser found is the lexicographically smallest id tuple.
    """
    c = _constraints(R, constraints)
    L = _as_laplacian(base)
    cands = sorted((x for x in cands if is_feasible([x], c)), key=lambda x: x.id)
    n = len(cands)
    limit = min(R, c.max_links)
    if count_subsets(n, limit) > guard:
        raise CombinatorialExplosionError(
            f"C({n}, {limit}) = {count_subsets(n, limit)} subsets exceeds the guard of {guard}"
        )
    conf = [[conflicts(a, b, c) for b in cands] for a in cands]

    def subsets():
        stack: list[int] = []

        def rec(start: int):
            yield tuple(stack)
            if len(stack) == limit:
                return
            for k in range(start, n):
                if not any(conf[k][m] for m in stack):
                    stack.append(k)
                    yield from rec(k + 1)
                    stack.pop()

        yield from rec(0)

    before = fiedler_value(L)
    best_val, best_sub = -math.inf, None
    pending: list[tuple[int, ...]] = []

    def flush():
        nonlocal best_val, best_sub
        mats = np.stack([_apply(L, [cands[k] for k in sub]) for sub in pending])
        lam2 = np.linalg.eigvalsh(mats)[:, 1] if L.shape[0] > 1 else np.zeros(len(pending))
        for sub, val in zip(pending, lam2):
            if best_sub is None or val > best_val + SCORE_TIE_TOL * max(1.0, abs(best_val)):
                best_val, best_sub = float(val), sub
        pending.clear()

    for sub in subsets():
        pending.append(sub)
        if len(pending) >= batch:
            flush()
    if pending:
        flush()

    links = [cands[k] for k in best_sub]
    steps = _realized_steps(L, links)
    after = fiedler_value(_apply(L, links))
    return Selection(tuple(x.id for x in links), before, after, "exhaustive", steps)


def project_capped_simplex(y: np.ndarray, k: float) -> np.ndarray:
    """Euclidean projection onto ``{z : 0 <= z <= 1, sum(z) = k}``.

    Threshold search: the projection is ``clip(y - tau, 0, 1)`` and the clipped
    sum is piecewise linear in tau with breakpoints at ``y`` and ``y - 1``.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if not 0 <= k <= n:
        raise ValueError(f"capacity {k} outside [0, {n}]")
    if k == 0:
        return np.zeros(n)
    if k == n:
        return np.ones(n)
    bps = np.sort(np.concatenate([y, y - 1.0]))

    def mass(t: float) -> float:
        return float(np.clip(y - t, 0.0, 1.0).sum())

    lo, hi = 0, bps.size - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mass(bps[mid]) >= k:
            lo = mid
        else:
            hi = mid
    t0, t1 = bps[lo], bps[hi]
    f0, f1 = mass(t0), mass(t1)
    tau = t0 if f0 == f1 else t0 + (f0 - k) * (t1 - t0) / (f0 - f1)
    return np.clip(y - tau, 0.0, 1.0)


def _weighted_laplacian(L: np.ndarray, ii, jj, wz) -> np.ndarray:
    out = L.copy()
    np.add.at(out, (ii, ii), wz)
    np.add.at(out, (jj, jj), wz)
    np.add.at(out, (ii, jj), -wz)
    np.add.at(out, (jj, ii), -wz)
    return out


def relax(
    base: Graph | np.ndarray,
    cands: Sequence[CandidateLink],
    R: int,
    iters: int = 300,
    tol: float = 1e-7,
) -> RelaxedSolution:
    """Maximise the concave ``lambda2(L + sum z_l w_l a_l a_l^T)`` over the capped
    simplex by projected supergradient ascent with steps ``eta0 / sqrt(k)``.
    Returns the best iterate seen.
    """
    L = _as_laplacian(base)
    n = len(cands)
    if n == 0:
        raise ValueError("relaxation needs at least one candidate")
    K = min(R, n)
    w = np.array([x.weight for x in cands])
    ii = np.array([x.endpoints[0] for x in cands])
    jj = np.array([x.endpoints[1] for x in cands])
    eta0 = 1.0 / float(np.max(w)) if np.max(w) > 0 else 1.0

    z = project_capped_simplex(np.full(n, K / n), K)
    best_z, best_obj = z.copy(), -math.inf
    history: list[float] = []
    k = 0
    for k in range(1, iters + 1):
        spec = spectrum(_weighted_laplacian(L, ii, jj, w * z))
        obj = spec.fiedler_value
        history.append(obj)
        if obj > best_obj:
            best_obj, best_z = obj, z.copy()
        v = spec.fiedler_vector
        grad = w * (v[ii] - v[jj]) ** 2
        eta = eta0 / math.sqrt(k)
        z_new = project_capped_simplex(z + eta * grad, K)
        step = float(np.linalg.norm(z_new - z)) / eta
        z = z_new
        if step < tol:
            break
    final = spectrum(_weighted_laplacian(L, ii, jj, w * z)).fiedler_value
    if final > best_obj:
        best_obj, best_z = final, z.copy()
    return RelaxedSolution(best_z, best_obj, k, history)


def relax_and_round(
    base: Graph | np.ndarray,
    cands: Sequence[CandidateLink],
    R: int,
    iters: int = 300,
    tol: float = 1e-7,
    constraints: SelectionConstraints | None = None,
    *,
    plain_rounding: bool = False,
) -> tuple[RelaxedSolution, Selection]:
    """Solve the relaxation, then round by descending ``z``.

    Default rounding admits a candidate only if the selection stays feasible.
    ``plain_rounding`` keeps the R largest entries regardless of conflicts.
    """
    c = _constraints(R, constraints)
    L = _as_laplacian(base)
    cands = sorted(cands, key=lambda x: x.id)
    sol = relax(L, cands, R, iters, tol)
    order = sorted(range(len(cands)), key=lambda k: (-sol.z[k], cands[k].id))
    limit = min(R, c.max_links)
    picked: list[CandidateLink] = []
    for k in order:
        if len(picked) >= limit:
            break
        trial = picked + [cands[k]]
        if plain_rounding or is_feasible(trial, c):
            picked = trial
    steps = _realized_steps(L, picked)
    after = fiedler_value(_apply(L, picked))
    method = "relax_plain" if plain_rounding else "relax"
    return sol, Selection(tuple(x.id for x in picked), fiedler_value(L), after, method, steps)


def random_baseline(
    base: Graph | np.ndarray,
    cands: Sequence[CandidateLink],
    R: int,
    seed: int | np.random.Generator,
    constraints: SelectionConstraints | None = None,
) -> Selection:
    """Uniformly random feasible links, with the greedy removal rule."""
    c = _constraints(R, constraints)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    L = _as_laplacian(base)
    before = fiedler_value(L)
    remaining = sorted((x for x in cands if is_feasible([x], c)), key=lambda x: x.id)
    picked: list[CandidateLink] = []
    while len(picked) < min(R, c.max_links) and remaining:
        pick = remaining[int(rng.integers(len(remaining)))]
        picked.append(pick)
        remaining = _prune(remaining, pick, c)
    steps = _realized_steps(L, picked)
    after = fiedler_value(_apply(L, picked))
    return Selection(tuple(x.id for x in picked), before, after, "random", steps)


def prop1_upper(lambda2: float, w: float, v_u: float, v_a: float) -> float:
    return lambda2 + w * (v_u - v_a) ** 2


def prop2_formulas(lambda2: float, lambda3: float, lambda_n: float, w: float,
                   v_ua: float) -> tuple[float, float]:
    """(lower, upper) bounds on lambda2 after adding one edge, in closed form.

    Either entry is NaN when undefined: a negative radicand for the lower
    bound, ``lambda_n == lambda2`` for the upper.
    """
    if w == 0:
        return lambda2, lambda2
    delta = lambda3 - lambda2
    rad = 5 * w * v_ua - w * delta**2 + 4 * w**2 + 4 * w * delta
    lower = lambda2 + (w * v_ua + delta + 2 * w - math.sqrt(rad)) / 2 if rad >= 0 else math.nan
    spread = lambda_n - lambda2
    upper = lambda2 + w * v_ua / (1 + w * (2 - v_ua) / spread) if spread > 0 else math.nan
    return lower, upper


def rederived_lower(lambda2: float, lambda3: float, w: float, v_ua: float) -> float:
    """Lower bound from the smaller root of the quadratic behind the closed-form lower bound.

    ``w V / e >= 1 + 2 w / (delta - e)`` holds for ``0 < e <= e_minus`` with
    ``e_minus = (delta + w V + 2w - sqrt((delta + w V + 2w)^2 - 4 w V delta)) / 2``,
    so ``lambda2 + e_minus`` never exceeds the updated lambda2.
    """
    delta = lambda3 - lambda2
    b = delta + w * v_ua + 2 * w
    disc = b * b - 4 * w * v_ua * delta
    return lambda2 + (b - math.sqrt(max(disc, 0.0))) / 2


def prop2_bounds(L: np.ndarray, edge: tuple[int, int], w: float,
                 spec: SpectralResult | None = None) -> BoundsReport:
    L = np.asarray(L, dtype=float)
    spec = spec or spectrum(L)
    if n_components(L) != 1 or L.shape[0] < 3:
        raise ValueError("bounds need a connected graph with at least three nodes")
    lam = spec.eigenvalues
    i, j = edge
    v = spec.fiedler_vector
    v_ua = (v[i] - v[j]) ** 2
    lower, upper = prop2_formulas(lam[1], lam[2], lam[-1], w, v_ua)
    actual = fiedler_value(rank_one_add(L, i, j, w))
    return BoundsReport(
        lower=lower,
        upper_prop2=upper,
        upper_prop1=prop1_upper(lam[1], w, v[i], v[j]),
        actual=actual,
        delta=float(lam[2] - lam[1]),
        lower_rederived=rederived_lower(lam[1], lam[2], w, v_ua),
        lower_defined=not math.isnan(lower),
        upper_defined=not math.isnan(upper),
    )


def secular_function(lam: np.ndarray, u: np.ndarray, w: float, t: float) -> float:
    """``1 + w * sum_{i>=2} u_i^2 / (lambda_i - t)`` (skipping the null eigenpair)."""
    return 1.0 + w * float(np.sum(u[1:] ** 2 / (lam[1:] - t)))


def secular_lambda2(spec: SpectralResult, w: float, edge: tuple[int, int],
                    *, nudge: float = 1e-12, tol: float = 1e-13) -> float:
    """Second eigenvalue after adding edge ``(i, j)`` with weight ``w``, found as
    the root of the secular equation inside ``(lambda2, lambda3)``.
    """
    lam = np.asarray(spec.eigenvalues, dtype=float)
    i, j = edge
    u = spec.eigenvectors[i, :] - spec.eigenvectors[j, :]
    l2 = float(lam[1])
    if w == 0 or u[1] ** 2 * w == 0.0:
        return l2
    if lam.size == 2:
        return l2 + w * float(u[1] ** 2)
    l3 = float(lam[2])
    if l3 - l2 <= 1e-10:
        # repeated lambda2: one copy survives any rank-one update
        return l2
    lo, hi = l2 + nudge, l3 - nudge
    if secular_function(lam, u, w, lo) >= 0:
        return l2
    if secular_function(lam, u, w, hi) <= 0:
        # no pole at lambda3 (u_3 ~ 0); interlacing caps the root there
        return l3
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if secular_function(lam, u, w, mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)
