"""Command line entry point: ``run``, ``inspect`` and ``verify``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .candidates import enumerate_candidates
from .config import ConfigError, load_config
from .graph import build_graph, criticality_report, is_connected, laplacian, spectrum
from .harness import emit, run_sweep
from .verify import run_all


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return load_config(text)


def cmd_run(args) -> int:
    _, plan = _load(args.config)
    rows = run_sweep(plan)
    text = emit(rows, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_inspect(args) -> int:
    cfg, _ = _load(args.config)
    s = cfg.build()
    g = build_graph(s, weighted_base=cfg.weighted_base)
    L = laplacian(g)
    spec = spectrum(L)
    crit = criticality_report(L, s.params.epsilon)
    cands = enumerate_candidates(s, g, crit, allow_redundant=cfg.allow_redundant)
    print(f"seed {s.seed}: {s.n_ues} UEs, {s.n_uavs} UAVs, {s.n_riss} RISs")
    print(f"nodes {g.n_nodes}  edges {g.n_edges}  connected {is_connected(g)}  "
          f"lambda2 {spec.fiedler_value:.6g}")
    print("node  kind  criticality  clamped")
    for n in range(g.n_nodes):
        print(f"{n:4d}  {g.node_kinds[n]:4s}  {crit.values[n]:11.6g}  {bool(crit.clamped[n])}")
    print(f"candidates {len(cands)}")
    if not cands:
        print("no candidate reflected links for this instance")
    return 0


def cmd_verify(args) -> int:
    return 0 if run_all() else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risconnect", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo sweep")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.set_defaults(func=cmd_run)

    insp = sub.add_parser("inspect", help="graph, criticality and candidates for one seed")
    insp.add_argument("--config", required=True)
    insp.set_defaults(func=cmd_inspect)

    ver = sub.add_parser("verify", help="run the small oracle checks")
    ver.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
