"""Feasible UE-RIS-UAV reflected links and the matching constraints on selecting them."""
from __future__ import annotations

import io
import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .channel import (
    PhaseConfig,
    cascaded_channel,
    channel_ris_uav,
    channel_ue_ris,
    optimal_phases,
    snr_reflected,
)
from .graph import CriticalityReport, Graph, criticality_report, edge_weight
from .scenario import Scenario, linear_to_db


@dataclass(frozen=True)
class CandidateLink:
    id: int
    ue: int
    ris: int
    uav: int
    endpoints: tuple[int, int]  # graph indices (UE node, UAV node)
    weight: float
    reflected_snr_db: float = math.inf
    phases: PhaseConfig | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SelectionConstraints:
    max_links: int
    strict_coverage: bool = False
    ue_reach: Mapping[int, frozenset[int]] | None = None

    def __post_init__(self) -> None:
        if self.max_links < 0:
            raise ValueError("max_links must be non-negative")
        if self.strict_coverage and self.ue_reach is None:
            raise ValueError("strict coverage needs the reachable-RIS sets")


def reachable_ris(s: Scenario) -> dict[int, frozenset[int]]:
    """RISs within ``ris_reach_m`` of each UE."""
    D0 = s.params.ris_reach_m
    return {
        u: frozenset(r for r in range(s.n_riss) if math.dist(s.ue_point(u), s.ris_point(r)) <= D0)
        for u in range(s.n_ues)
    }


def enumerate_candidates(
    s: Scenario,
    g: Graph,
    crits: CriticalityReport | None = None,
    *,
    allow_redundant: bool = False,
) -> list[CandidateLink]:
    """All (u, r, a) with the RIS in reach of u, a not already adjacent to u
    (unless ``allow_redundant``) and aligned reflected SNR at or above the
    RIS threshold. Ordered and numbered lexicographically by (u, r, a).
    """
    p = s.params
    if s.n_riss == 0:
        return []
    if crits is None:
        crits = criticality_report(g, p.epsilon)
    reach = reachable_ris(s)
    out: list[CandidateLink] = []
    for u in range(s.n_ues):
        direct = g.neighbors(u)
        ue = s.ue_point(u)
        for r in sorted(reach[u]):
            ris = s.ris_point(r)
            h_ur = channel_ue_ris(ue, ris, p)
            for a in range(s.n_uavs):
                node = s.uav_node(a)
                if node in direct and not allow_redundant:
                    continue
                uav = s.uav_point(a)
                theta = optimal_phases(ue, ris, uav, p, ue_index=u, ris_index=r, uav_index=a)
                h = cascaded_channel(channel_ris_uav(ris, uav, p), theta, h_ur)
                gamma = snr_reflected(h, p)
                snr_db = linear_to_db(gamma) if gamma > 0 else -math.inf
                if snr_db < p.thr_ris_db:
                    continue
                w = edge_weight(crits.values[u], crits.values[node])
                out.append(CandidateLink(len(out), u, r, a, (u, node), w, snr_db, theta))
    return out


def is_feasible(sel: Iterable[CandidateLink], c: SelectionConstraints) -> bool:
    sel = list(sel)
    if len(sel) > c.max_links:
        return False
    for attr in ("ue", "ris", "uav"):
        vals = [getattr(x, attr) for x in sel]
        if len(set(vals)) != len(vals):
            return False
    if c.strict_coverage:
        seen: set[int] = set()
        for x in sel:
            cov = c.ue_reach.get(x.ue, frozenset())
            if seen & cov:
                return False
            seen |= cov
    return True


def conflicts(a: CandidateLink, b: CandidateLink, c: SelectionConstraints | None = None) -> bool:
    """True if ``a`` and ``b`` cannot both be selected."""
    if a.ue == b.ue or a.ris == b.ris or a.uav == b.uav:
        return True
    if c is not None and c.strict_coverage:
        return bool(c.ue_reach.get(a.ue, frozenset()) & c.ue_reach.get(b.ue, frozenset()))
    return False


def write_candidates_csv(cands: Iterable[CandidateLink]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "u", "r", "a", "snr_db", "w_l"])
    for c in cands:
        w.writerow([c.id, c.ue, c.ris, c.uav, repr(c.reflected_snr_db), repr(c.weight)])
    return buf.getvalue()
