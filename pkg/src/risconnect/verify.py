"""Small oracle checks runnable without pytest (``risconnect verify``)."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .candidates import CandidateLink
from .graph import Graph, criticality_from_laplacian, laplacian, rank_one_add, spectrum
from .optimize import greedy_perturbation, prop2_bounds, secular_lambda2


def _path3() -> np.ndarray:
    return laplacian(Graph(3, ((0, 1, 1.0), (1, 2, 1.0))))


def _complete(n: int) -> np.ndarray:
    return laplacian(Graph(n, tuple((i, j, 1.0) for i in range(n) for j in range(i + 1, n))))


def _random_connected(rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        edges = tuple((i, j, 1.0) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4)
        L = laplacian(Graph(n, edges))
        s = spectrum(L)
        if s.fiedler_value > 1e-6 and s.gap > 1e-6:
            return L


def check_p3_c3() -> bool:
    s = spectrum(_path3())
    v = s.fiedler_vector
    after = spectrum(rank_one_add(_path3(), 0, 2, 1.0)).fiedler_value
    return (np.allclose(s.eigenvalues, [0, 1, 3], atol=1e-12)
            and np.allclose(v, [1 / math.sqrt(2), 0, -1 / math.sqrt(2)], atol=1e-12)
            and abs(after - 3.0) < 1e-12)


def check_k4() -> bool:
    L = _complete(4)
    crit, clamped = criticality_from_laplacian(L, 0)
    return abs(spectrum(L).fiedler_value - 4) < 1e-12 and abs(crit - 1 / 3) < 1e-12 and not clamped


def check_greedy_p3() -> bool:
    cand = CandidateLink(0, 0, 0, 0, (0, 2), 1.0)
    sel = greedy_perturbation(_path3(), [cand], 1)
    step = sel.per_step[0]
    return abs(step.predicted - 2.0) < 1e-12 and abs(sel.lambda2_after - 3.0) < 1e-12


def check_secular(n_trials: int = 200, seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    for _ in range(n_trials):
        n = int(rng.integers(4, 12))
        L = _random_connected(rng, n)
        i, j = rng.choice(n, 2, replace=False)
        w = float(rng.uniform(0.01, 3.0))
        s = spectrum(L)
        direct = spectrum(rank_one_add(L, i, j, w)).fiedler_value
        if abs(secular_lambda2(s, w, (i, j)) - direct) > 1e-8:
            return False
    return True


def check_interlacing(n_trials: int = 200, seed: int = 1) -> bool:
    rng = np.random.default_rng(seed)
    for _ in range(n_trials):
        n = int(rng.integers(3, 12))
        L = _random_connected(rng, n)
        i, j = rng.choice(n, 2, replace=False)
        old = spectrum(L).eigenvalues
        new = spectrum(rank_one_add(L, i, j, float(rng.uniform(0.01, 3.0)))).eigenvalues
        if np.any(new[1:-1] < old[1:-1] - 1e-8) or np.any(new[1:-1] > old[2:] + 1e-8):
            return False
    return True


def check_prop2_upper(n_trials: int = 200, seed: int = 2) -> bool:
    rng = np.random.default_rng(seed)
    for _ in range(n_trials):
        n = int(rng.integers(3, 12))
        L = _random_connected(rng, n)
        i, j = rng.choice(n, 2, replace=False)
        b = prop2_bounds(L, (int(i), int(j)), float(rng.uniform(0.01, 3.0)))
        if b.upper_defined and b.actual > b.upper_prop2 + 1e-8:
            return False
    return True


CHECKS: dict[str, Callable[[], bool]] = {
    "P3 spectrum and P3->C3": check_p3_c3,
    "K4 spectrum and criticality": check_k4,
    "greedy on P3": check_greedy_p3,
    "secular root vs eigensolver": check_secular,
    "interlacing after edge addition": check_interlacing,
    "second-order upper bound": check_prop2_upper,
}


def run_all(echo: Callable[[str], None] = print) -> bool:
    ok_all = True
    for name, fn in CHECKS.items():
        try:
            ok = fn()
        except Exception as exc:  # report and continue
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok_all &= ok
        echo(f"{'PASS' if ok else 'FAIL'}  {name}")
    return ok_all
