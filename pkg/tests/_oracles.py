"""Independent reference computations used by the tests.

Nothing here imports the package's solvers; each helper recomputes its answer
by a different route (union-find, explicit loops, plain bisection).
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from risconnect.candidates import CandidateLink
from risconnect.graph import Graph


def union_find_connected(n: int, edges) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, *_ in edges:
        parent[find(i)] = find(j)
    return len({find(x) for x in range(n)}) == 1


def dense_laplacian(n: int, edges) -> np.ndarray:
    """Laplacian from the degree-minus-adjacency definition."""
    A = np.zeros((n, n))
    for i, j, w in edges:
        A[i, j] = A[j, i] = w
    return np.diag(A.sum(axis=1)) - A


def random_graph(rng: np.random.Generator, n: int, p: float, weighted: bool = True) -> Graph:
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j, float(rng.uniform(0.2, 2.0)) if weighted else 1.0))
    return Graph(n, tuple(edges))


def random_connected(rng: np.random.Generator, n: int, p: float = 0.35,
                     weighted: bool = True) -> Graph:
    while True:
        g = random_graph(rng, n, p, weighted)
        if union_find_connected(n, g.edges):
            return g


def non_edge(rng: np.random.Generator, g: Graph) -> tuple[int, int] | None:
    present = {(i, j) for i, j, _ in g.edges}
    free = [(i, j) for i in range(g.n_nodes) for j in range(i + 1, g.n_nodes)
            if (i, j) not in present]
    if not free:
        return None
    return free[int(rng.integers(len(free)))]


def capped_simplex_bisect(y: np.ndarray, k: float, iters: int = 200) -> np.ndarray:
    """Projection by bisection on the KKT threshold of ``clip(y - t, 0, 1)``."""
    lo, hi = float(np.min(y)) - 1.0, float(np.max(y))
    for _ in range(iters):
        t = 0.5 * (lo + hi)
        if np.clip(y - t, 0, 1).sum() > k:
            lo = t
        else:
            hi = t
    return np.clip(y - 0.5 * (lo + hi), 0, 1)


def upa_response_loop(angles, rows, cols, d_b, d_c, wavelength) -> np.ndarray:
    """Array response element by element, row-major over (m_b, m_c)."""
    phi, varphi, psi = angles
    k = 2 * math.pi / wavelength
    out = []
    for mb in range(rows):
        for mc in range(cols):
            out.append(cmath.exp(-1j * k * (d_b * mb * phi * psi + d_c * mc * varphi * psi)))
    return np.array(out)


def cand(id_: int, endpoints: tuple[int, int], w: float = 1.0,
         ue: int | None = None, ris: int | None = None, uav: int | None = None) -> CandidateLink:
    """Synthetic candidate; by default every one has distinct UE/RIS/UAV."""
    return CandidateLink(
        id=id_,
        ue=id_ if ue is None else ue,
        ris=id_ if ris is None else ris,
        uav=id_ if uav is None else uav,
        endpoints=endpoints,
        weight=w,
    )
