"""Connectivity graph, Laplacian algebra, spectra and node criticality."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .channel import snr_uav_uav, snr_ue_uav
from .scenario import Scenario, linear_to_db

UE = "ue"
UAV = "uav"

SYMMETRY_TOL = 1e-9
ZERO_ROW_TOL = 1e-9
SIGN_TOL = 1e-12
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class Graph:
    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]
    node_kinds: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        norm = []
        seen = set()
        for i, j, w in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if i > j:
                i, j = j, i
            if not (0 <= i and j < self.n_nodes):
                raise ValueError(f"edge ({i}, {j}) out of range for {self.n_nodes} nodes")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if not w > 0:
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
            if self.node_kinds is not None and self.node_kinds[i] == UE == self.node_kinds[j]:
                raise ValueError(f"UE-UE edge ({i}, {j})")
            seen.add((i, j))
            norm.append((i, j, float(w)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        if self.node_kinds is not None and len(self.node_kinds) != self.n_nodes:
            raise ValueError("node_kinds length differs from n_nodes")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, n: int) -> set[int]:
        out = set()
        for i, j, _ in self.edges:
            if i == n:
                out.add(j)
            elif j == n:
                out.add(i)
        return out

    def reweighted(self, weight_of) -> "Graph":
        return Graph(self.n_nodes, tuple((i, j, weight_of(i, j)) for i, j, _ in self.edges),
                     self.node_kinds)


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    fiedler_value: float
    fiedler_vector: np.ndarray
    eigenvectors: np.ndarray  # columns, same order as eigenvalues
    degenerate: bool = False  # lambda3 - lambda2 below DEGENERACY_TOL

    @property
    def gap(self) -> float:
        """``lambda3 - lambda2`` (``inf`` when fewer than three nodes)."""
        if len(self.eigenvalues) < 3:
            return math.inf
        return float(self.eigenvalues[2] - self.eigenvalues[1])


@dataclass(frozen=True)
class CriticalityReport:
    values: np.ndarray  # C_n per graph node
    clamped: np.ndarray  # bool per node
    epsilon: float


def build_graph(s: Scenario, *, weighted_base: bool = False) -> Graph:
    """Edges from SNR thresholds: UE-UAV by the linear-SNR rule, UAV-UAV by free space.

    Edges weigh 1 unless ``weighted_base``, in which case every edge gets the
    criticality weight ``1 / (C_i + C_j)`` computed on the unit-weight graph.
    """
    p = s.params
    U = s.n_ues
    edges = []
    for u in range(U):
        ue = s.ue_point(u)
        for a in range(s.n_uavs):
            d = math.dist(ue, s.uav_point(a))
            if linear_to_db(snr_ue_uav(d, p)) >= p.thr_ue_uav_db:
                edges.append((u, U + a, 1.0))
    for a in range(s.n_uavs):
        for b in range(a + 1, s.n_uavs):
            d = math.dist(s.uav_point(a), s.uav_point(b))
            if snr_uav_uav(d, p) >= p.thr_uav_uav_db:
                edges.append((U + a, U + b, 1.0))
    g = Graph(s.n_nodes, tuple(edges), (UE,) * U + (UAV,) * s.n_uavs)
    if weighted_base:
        crit = criticality_report(g, p.epsilon)
        g = g.reweighted(lambda i, j: edge_weight(crit.values[i], crit.values[j]))
    return g


def laplacian(g: Graph) -> np.ndarray:
    L = np.zeros((g.n_nodes, g.n_nodes))
    for i, j, w in g.edges:
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return L


def incidence(n_nodes: int, i: int, j: int) -> np.ndarray:
    a = np.zeros(n_nodes)
    a[i] = 1.0
    a[j] = -1.0
    return a


def _complement_basis(n: int) -> np.ndarray:
    """Orthonormal basis (n, n-1) of the complement of the all-ones vector.

    Columns 2..n of the Householder reflector that maps e_1 to 1/sqrt(n).
    """
    u = np.full(n, 1.0 / math.sqrt(n))
    u[0] -= 1.0
    nu = u @ u
    H = np.eye(n)
    if nu > 0:
        H -= 2.0 * np.outer(u, u) / nu
    return H[:, 1:]


def _fix_sign(v: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > SIGN_TOL)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


def spectrum(L: np.ndarray) -> SpectralResult:
    """Ascending spectrum and Fiedler pair of a symmetric matrix.

    For Laplacians the solve is restricted to the complement of the all-ones
    vector, so the Fiedler vector is orthogonal to it even when the graph is
    disconnected and the zero eigenvalue repeats.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {L.shape}")
    n = L.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    if np.max(np.abs(L - L.T), initial=0.0) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    L = 0.5 * (L + L.T)
    if n == 1:
        vals = np.array([L[0, 0]])
        return SpectralResult(vals, 0.0, np.zeros(1), np.ones((1, 1)))

    scale = max(1.0, float(np.max(np.abs(L))))
    if np.max(np.abs(L.sum(axis=1))) <= ZERO_ROW_TOL * scale:
        B = _complement_basis(n)
        mu, X = np.linalg.eigh(B.T @ L @ B)
        ones = np.full(n, 1.0 / math.sqrt(n))
        # the all-ones pair stays first even when other zero eigenvalues tie with it
        null = min(float(ones @ L @ ones), float(mu[0]))
        vals = np.concatenate([[null], mu])
        vecs = np.column_stack([ones, B @ X])
    else:
        vals, vecs = np.linalg.eigh(L)

    v = _fix_sign(vecs[:, 1] / np.linalg.norm(vecs[:, 1]))
    vecs = vecs.copy()
    vecs[:, 1] = v
    degenerate = n >= 3 and (vals[2] - vals[1]) < DEGENERACY_TOL
    return SpectralResult(vals, float(vals[1]), v, vecs, bool(degenerate))


def fiedler_value(L: np.ndarray) -> float:
    return spectrum(L).fiedler_value


def is_connected(g: Graph) -> bool:
    if g.n_nodes <= 1:
        return True
    if not g.edges:
        return False
    i, j, _ = zip(*g.edges)
    adj = coo_matrix((np.ones(len(i)), (i, j)), shape=(g.n_nodes, g.n_nodes))
    n_comp, _ = connected_components(adj, directed=False)
    return n_comp == 1


def remove_node(L: np.ndarray, n: int) -> np.ndarray:
    """Laplacian of the graph with node ``n`` and its incident edges deleted."""
    keep = np.arange(L.shape[0]) != n
    sub = L[np.ix_(keep, keep)].copy()
    # drop the removed edges' weight from the remaining degrees
    sub[np.diag_indices_from(sub)] += L[keep, n]
    return sub


def criticality_from_laplacian(L: np.ndarray, n: int, eps: float = 1e-5) -> tuple[float, bool]:
    """``1 / lambda2(G_-n)``, clamped to ``1/eps`` when that value is ``<= eps``."""
    V = L.shape[0]
    if not 0 <= n < V:
        raise IndexError(f"node {n} out of range for {V} nodes")
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    lam2 = fiedler_value(remove_node(L, n)) if V > 2 else 0.0
    if lam2 > eps:
        return 1.0 / lam2, False
    return 1.0 / eps, True


def criticality(g: Graph, n: int, eps: float = 1e-5) -> float:
    return criticality_from_laplacian(laplacian(g), n, eps)[0]


def criticality_report(g: Graph | np.ndarray, eps: float = 1e-5,
                       nodes: Iterable[int] | None = None) -> CriticalityReport:
    """Criticality of every node (or of ``nodes``; others are left NaN)."""
    L = laplacian(g) if isinstance(g, Graph) else np.asarray(g, dtype=float)
    V = L.shape[0]
    values = np.full(V, np.nan)
    clamped = np.zeros(V, dtype=bool)
    for n in range(V) if nodes is None else nodes:
        values[n], clamped[n] = criticality_from_laplacian(L, n, eps)
    return CriticalityReport(values, clamped, eps)


def criticality_bound(lambda2_g: float) -> float:
    """Upper bound ``1/(lambda2 - 1)`` on any node's criticality; ``inf`` when ``lambda2 <= 1``."""
    if lambda2_g <= 1.0:
        return math.inf
    return 1.0 / (lambda2_g - 1.0)


def edge_weight(c_u: float, c_a: float) -> float:
    if not (c_u > 0 and c_a > 0):
        raise ValueError(f"criticalities must be positive, got {c_u}, {c_a}")
    return 1.0 / (c_u + c_a)


def rank_one_add(L: np.ndarray, i: int, j: int, w: float) -> np.ndarray:
    """``L + w a a^T`` for the incidence vector of edge (i, j)."""
    if i == j:
        raise ValueError("rank-one edge update needs two distinct nodes")
    out = np.array(L, dtype=float, copy=True)
    out[i, i] += w
    out[j, j] += w
    out[i, j] -= w
    out[j, i] -= w
    return out


def write_edge_list(g: Graph) -> str:
    lines = [f"{g.n_nodes} {g.n_edges}"]
    lines += [f"{i} {j} {w!r}" for i, j, w in g.edges]
    return "\n".join(lines) + "\n"


def read_edge_list(text: str, node_kinds: Sequence[str] | None = None) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty edge list")
    V, E = int(rows[0][0]), int(rows[0][1])
    edges = tuple((int(i), int(j), float(w)) for i, j, w in rows[1:])
    if len(edges) != E:
        raise ValueError(f"header declares {E} edges, found {len(edges)}")
    return Graph(V, edges, tuple(node_kinds) if node_kinds is not None else None)
