"""Command-line front end.

Every command writes ``run_config.json`` next to its outputs; ``firmcontrol
rerun <run_config.json>`` replays the run and reproduces identical files.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .controllability import NodeClass, classify_nodes, extract_driver_set
from .experiments import (ClipStrategy, DEFAULT_FRACTIONS, analytic_driver_ratio, clip_series,
                          degree_stats, industry_shares, synth_firm_network)
from .graph import (ControlDirection, EdgeListFormat, GraphFormatError, load_attributes, load_edges,
                    oriented_view, write_attributes, write_edges)
from .matching import has_augmenting_path, is_valid_matching, maximum_matching, split_bipartite
from .verifier import DEFAULT_MAX_NODES, DEFAULT_MODULUS, verify_driver_set

log = logging.getLogger("firmcontrol")

EXIT_OK = 0
EXIT_NOT_CONTROLLABLE = 1
EXIT_ERROR = 2
EXIT_SELF_CHECK = 3


class SelfCheckError(RuntimeError):
    pass


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fmt(cfg) -> EdgeListFormat:
    return EdgeListFormat(sep=cfg["sep"], header=cfg["header"])


def _load(cfg):
    g = load_edges(cfg["edges"], _fmt(cfg))
    attr_rep = None
    if cfg.get("attributes"):
        g, attr_rep = load_attributes(cfg["attributes"], g, _fmt(cfg))
    return g, attr_rep


def _out_dir(cfg) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_classify(cfg) -> int:
    g, attr_rep = _load(cfg)
    view = oriented_view(g, cfg["orientation"])
    split = split_bipartite(view)
    m = maximum_matching(split)
    rep = classify_nodes(view, m)
    checks = {
        "matching_valid": is_valid_matching(split, m),
        "no_augmenting_path": not has_augmenting_path(split, m),
        "nd_equals_zero_in_degree": bool(np.array_equal(
            rep.members(NodeClass.NECESSARY_DRIVER), np.flatnonzero(view.in_degree() == 0))),
    }
    out = _out_dir(cfg)
    rep.write_csv(view, out / "classification.csv")
    summary = rep.summary()
    summary["ingestion"] = g.report.__dict__ if g.report else None
    summary["attributes"] = attr_rep.__dict__ if attr_rep else None
    summary["self_checks"] = checks
    _dump_json(summary, out / "summary.json")
    if g.attributes is not None:
        industry_shares(rep, view).write_csv(out / "industry_shares.csv")
    if not all(checks.values()):
        raise SelfCheckError(f"self-checks failed: {checks}")
    return EXIT_OK


def run_clip_series(cfg) -> int:
    if cfg["strategy"] == "capital" and not cfg.get("attributes"):
        raise ValueError("capital-order clipping requires --attributes")
    g, _ = _load(cfg)
    if cfg["strategy"] == "capital":
        strategy = ClipStrategy.capital_descending()
    else:
        strategy = ClipStrategy.random(cfg["samples"], cfg["seed"])
    report = clip_series(g, cfg["orientation"], strategy, cfg["fractions"])
    out = _out_dir(cfg)
    report.write_csv(out / "clip_series.csv")
    return EXIT_OK


def run_degree(cfg) -> int:
    g = load_edges(cfg["edges"], _fmt(cfg))
    stats = degree_stats(g)
    out = _out_dir(cfg)
    stats.write_csv(out / "degree_stats.csv")
    summary = {"nodes": g.n, "edges": g.edge_count, "degrees": stats.summary()}
    tot = stats["total"]
    if tot.fit is not None and tot.fit.gamma > 1:
        summary["analytic_driver_ratio"] = analytic_driver_ratio(tot.fit.gamma, tot.mean)
    _dump_json(summary, out / "summary.json")
    return EXIT_OK


def run_synth(cfg) -> int:
    g, rep = synth_firm_network(cfg["nodes"], cfg["edge_count"], cfg["gamma_out"], cfg["gamma_in"],
                                cfg["capital_coupling"], cfg["industries"], cfg["seed"])
    out = _out_dir(cfg)
    write_edges(g, out / "edges.csv")
    write_attributes(g, out / "attributes.csv")
    _dump_json({"synth": rep.to_dict()}, out / "summary.json")
    return EXIT_OK


def run_verify(cfg) -> int:
    g = load_edges(cfg["edges"], _fmt(cfg))
    view = oriented_view(g, cfg["orientation"])
    if cfg.get("drivers"):
        path = Path(cfg["drivers"])
        try:
            tokens = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
        except OSError as exc:
            raise GraphFormatError(f"cannot read {path}: {exc.strerror}") from exc
        try:
            drivers = [view.index_of(t) for t in tokens]
        except KeyError as exc:
            raise GraphFormatError(f"{path}: unknown node id {exc.args[0]!r}") from None
    else:
        drivers = extract_driver_set(view).tolist()
    cert = verify_driver_set(view, drivers, trials=cfg["trials"], seed=cfg["seed"],
                             modulus=cfg["modulus"], max_nodes=cfg["max_nodes"],
                             attach_cycles=not cfg.get("strict_inputs", False))
    out = _out_dir(cfg)
    (out / "certificate.json").write_text(cert.to_json() + "\n", encoding="utf-8")
    return EXIT_OK if cert.controllable else EXIT_NOT_CONTROLLABLE


COMMANDS = {
    "classify": run_classify,
    "clip-series": run_clip_series,
    "degree": run_degree,
    "synth": run_synth,
    "verify": run_verify,
}


def _fractions(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fraction list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty fraction list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="firmcontrol", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def io(sp, attributes=False, orientation=True):
        sp.add_argument("--edges", required=True, help="supplier,client edge list")
        if attributes:
            sp.add_argument("--attributes", help="id,capital,industry table")
        if orientation:
            sp.add_argument("--orientation", choices=[d.value for d in ControlDirection], default="supply")
        sp.add_argument("--sep", default=",")
        sp.add_argument("--header", action="store_true", help="input files start with a header row")
        sp.add_argument("--out-dir", required=True)

    sp = sub.add_parser("classify", help="label nodes ND/NF/OD")
    io(sp, attributes=True)

    sp = sub.add_parser("clip-series", help="necessary-driver ratios of clipped networks")
    io(sp, attributes=True)
    sp.add_argument("--strategy", choices=["random", "capital"], default="random")
    sp.add_argument("--fractions", type=_fractions, default=list(DEFAULT_FRACTIONS))
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--seed", type=int)

    sp = sub.add_parser("degree", help="degree distributions and power-law fits")
    io(sp, orientation=False)

    sp = sub.add_parser("synth", help="generate a synthetic firm network")
    sp.add_argument("--nodes", type=int, default=100_000)
    sp.add_argument("--edge-count", type=int, default=500_000)
    sp.add_argument("--gamma-out", type=float, default=2.5)
    sp.add_argument("--gamma-in", type=float, default=2.5)
    sp.add_argument("--capital-coupling", type=float, default=0.9)
    sp.add_argument("--industries", type=int, default=19)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-dir", required=True)

    sp = sub.add_parser("verify", help="Kalman rank check of a driver set (small graphs)")
    io(sp)
    sp.add_argument("--drivers", help="file with one driver id per line; default: a minimum driver set")
    sp.add_argument("--trials", type=int, default=3)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    sp.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    sp.add_argument("--strict-inputs", action="store_true",
                    help="one node per input; do not feed unreachable cycles from an existing input")

    sp = sub.add_parser("rerun", help="replay a run from its run_config.json")
    sp.add_argument("config")
    sp.add_argument("--out-dir", help="override the recorded output directory")
    return p


def config_from_args(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if v is not None or k in ("attributes", "drivers")}
    if "seed" in vars(args) and args.seed is None:
        cfg["seed"] = secrets.randbits(32)
    cfg["out_dir"] = str(Path(args.out_dir))
    return cfg


def execute(cfg: dict) -> int:
    command = cfg["command"]
    out = _out_dir(cfg)
    _dump_json(cfg, out / "run_config.json")
    log.info("running %s -> %s", command, out)
    return COMMANDS[command](cfg)


def main(argv=None) -> int:
    level = os.environ.get("FIRMCONTROL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            path = Path(args.config)
            try:
                cfg = json.loads(path.read_text(encoding="utf-8"))
            except OSError as exc:
                raise GraphFormatError(f"cannot read {path}: {exc.strerror}") from exc
            if cfg.get("command") not in COMMANDS:
                raise ValueError(f"{path}: unknown command {cfg.get('command')!r}")
            if args.out_dir:
                cfg["out_dir"] = args.out_dir
        else:
            cfg = config_from_args(args)
        return execute(cfg)
    except SelfCheckError as exc:
        print(f"firmcontrol: {exc}", file=sys.stderr)
        return EXIT_SELF_CHECK
    except (GraphFormatError, ValueError, OSError) as exc:
        print(f"firmcontrol: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
