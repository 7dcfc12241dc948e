"""Monte Carlo sweeps over scenario parameters and result emission."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .candidates import SelectionConstraints, enumerate_candidates, reachable_ris
from .config import ExperimentPlan, ScenarioConfig
from .graph import build_graph, criticality_report, fiedler_value, laplacian, spectrum
from .optimize import (
    CombinatorialExplosionError,
    Selection,
    count_subsets,
    exhaustive,
    greedy_perturbation,
    n_components,
    prop1_upper,
    prop2_formulas,
    random_baseline,
    relax_and_round,
)

log = logging.getLogger(__name__)

CSV_HEADER = ("sweep", "method", "mean_l2", "std_l2", "mean_links", "mean_ms", "iters")
# order in which methods appear in the output
ROW_ORDER = ("original", "random", "relax", "greedy", "exhaustive",
             "bound_lower", "bound_upper", "prop1_cum")


@dataclass(frozen=True)
class ResultRow:
    sweep: float | None
    method: str
    mean_l2: float
    std_l2: float
    mean_links: float
    mean_ms: float | None
    iters: int


def _greedy_bounds(L: np.ndarray, sel: Selection, cands) -> tuple[float, float]:
    """Lower/upper bounds on the greedy result, applied at its final step.

    Where the closed-form bounds are undefined (disconnected graph, negative
    radicand, lambda_n == lambda2) the step falls back to monotonicity for the
    lower bound and the supergradient bound for the upper.
    """
    if not sel.chosen:
        lam = fiedler_value(L)
        return lam, lam
    by_id = {x.id: x for x in cands}
    for cid in sel.chosen[:-1]:
        x = by_id[cid]
        L = _add(L, x)
    last = by_id[sel.chosen[-1]]
    spec = spectrum(L)
    lam, v = spec.eigenvalues, spec.fiedler_vector
    i, j = last.endpoints
    v_ua = (v[i] - v[j]) ** 2
    lower, upper = math.nan, math.nan
    if n_components(L) == 1 and L.shape[0] >= 3:
        lower, upper = prop2_formulas(lam[1], lam[2], lam[-1], last.weight, v_ua)
    if math.isnan(lower):
        lower = float(lam[1])
    if math.isnan(upper):
        upper = prop1_upper(lam[1], last.weight, v[i], v[j])
    return float(lower), float(upper)


def _add(L: np.ndarray, x) -> np.ndarray:
    i, j = x.endpoints
    out = L.copy()
    out[i, i] += x.weight
    out[j, j] += x.weight
    out[i, j] -= x.weight
    out[j, i] -= x.weight
    return out


def run_iteration(cfg: ScenarioConfig, seed: int, methods: tuple[str, ...],
                  guard: int = 200_000, relax_iters: int = 300
                  ) -> dict[str, tuple[float, int, float]]:
    """One scenario draw; maps method name to (lambda2, links added, runtime ms)."""
    s = cfg.build(seed)
    g = build_graph(s, weighted_base=cfg.weighted_base)
    L = laplacian(g)
    crits = criticality_report(L, s.params.epsilon)
    cands = enumerate_candidates(s, g, crits, allow_redundant=cfg.allow_redundant)
    R = s.n_riss
    cons = SelectionConstraints(R, cfg.strict_coverage,
                                reachable_ris(s) if cfg.strict_coverage else None)
    out: dict[str, tuple[float, int, float]] = {}

    def timed(fn):
        t0 = time.perf_counter()
        res = fn()
        return res, 1e3 * (time.perf_counter() - t0)

    base_l2 = fiedler_value(L)
    if "original" in methods:
        out["original"] = (base_l2, 0, 0.0)
    greedy_sel = None
    if "greedy" in methods or "bounds" in methods:
        greedy_sel, ms = timed(lambda: greedy_perturbation(L, cands, R, cons))
        if "greedy" in methods:
            out["greedy"] = (greedy_sel.lambda2_after, greedy_sel.n_links, ms)
    if "random" in methods:
        rng = np.random.default_rng([seed, 1])
        sel, ms = timed(lambda: random_baseline(L, cands, R, rng, cons))
        out["random"] = (sel.lambda2_after, sel.n_links, ms)
    if "relax" in methods:
        if cands:
            (_, sel), ms = timed(lambda: relax_and_round(L, cands, R, relax_iters, constraints=cons))
            out["relax"] = (sel.lambda2_after, sel.n_links, ms)
        else:
            out["relax"] = (base_l2, 0, 0.0)
    if "exhaustive" in methods:
        if count_subsets(len(cands), R) <= guard:
            try:
                sel, ms = timed(lambda: exhaustive(L, cands, R, cons, guard=guard))
                out["exhaustive"] = (sel.lambda2_after, sel.n_links, ms)
            except CombinatorialExplosionError:
                pass
    if "bounds" in methods:
        lower, upper = _greedy_bounds(L, greedy_sel, cands)
        out["bound_lower"] = (lower, greedy_sel.n_links, 0.0)
        out["bound_upper"] = (upper, greedy_sel.n_links, 0.0)
        spec = spectrum(L)
        v = spec.fiedler_vector
        scores = sorted((x.weight * (v[x.endpoints[0]] - v[x.endpoints[1]]) ** 2 for x in cands),
                        reverse=True)
        out["prop1_cum"] = (base_l2 + sum(scores[:R]), min(R, len(cands)), 0.0)
    return out


def _workers() -> int:
    raw = os.environ.get("RIS_THREADS", "1").strip() or "1"
    n = int(raw)
    if n < 0:
        raise ValueError("RIS_THREADS must be >= 0")
    if n == 0:
        return os.cpu_count() or 1
    return n


def _point_job(args):
    cfg, seed, methods, guard, relax_iters = args
    return run_iteration(cfg, seed, methods, guard, relax_iters)


def run_sweep(plan: ExperimentPlan) -> list[ResultRow]:
    """Run every sweep point for ``plan.iterations`` scenario draws.

    Iteration ``k`` uses seed ``base_seed + k`` at every sweep point, so the
    points share UE/UAV placements where the swept quantity allows it.
    """
    rows: list[ResultRow] = []
    workers = _workers()
    for value, cfg in plan.points():
        jobs = [(cfg, cfg.seed + k, plan.methods, plan.exhaustive_guard, plan.relax_iters)
                for k in range(plan.iterations)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_point_job, jobs))
        else:
            results = [_point_job(j) for j in jobs]
        for method in ROW_ORDER:
            samples = [r[method] for r in results if method in r]
            if not samples:
                if method == "exhaustive" and "exhaustive" in plan.methods:
                    log.warning("exhaustive skipped at sweep value %s (guard %d)",
                                value, plan.exhaustive_guard)
                continue
            if method == "exhaustive" and len(samples) < len(results):
                log.warning("exhaustive ran on %d/%d iterations at sweep value %s",
                            len(samples), len(results), value)
            l2 = np.array([x[0] for x in samples])
            links = np.array([x[1] for x in samples], dtype=float)
            ms = np.array([x[2] for x in samples])
            rows.append(ResultRow(
                sweep=value,
                method=method,
                mean_l2=float(np.mean(l2)),
                std_l2=float(np.std(l2)),
                mean_links=float(np.mean(links)),
                mean_ms=float(np.mean(ms)) if plan.timing else None,
                iters=len(samples),
            ))
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if x.is_integer() and abs(x) < 1e15:
            return str(int(x))
        return repr(x)
    return str(x)


def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
    return buf.getvalue()


def rows_to_json(rows: list[ResultRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=1) + "\n"


def rows_from_json(text: str) -> list[ResultRow]:
    return [ResultRow(**d) for d in json.loads(text)]


def emit(rows: list[ResultRow], fmt: str = "csv", path: str | Path | None = None) -> str:
    """Serialize rows; write to ``path`` when given. Returns the text."""
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = rows_to_json(rows)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write results to {path}: {exc}") from exc
    return text
