"""Command-line entry point: ``run``, ``render`` and ``validate-config``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, ExplorationConfig, format_config, parse_config
from .io import entropy_to_gray, occupancy_to_gray, read_map_csv, write_pgm
from .reward import entropy_map

SEED_ENV = "PARETO_EXPLORE_SEED"
log = logging.getLogger("pareto_explore")


def _load(path: str | None) -> tuple[ExplorationConfig, Path | None]:
    if path is None:
        return ExplorationConfig(), None
    return parse_config(path), Path(path).resolve().parent


def _resolve_seed(cfg: ExplorationConfig, flag: int | None) -> ExplorationConfig:
    """Flag beats environment beats config file."""
    if flag is not None:
        return cfg.replace(seed=flag)
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return cfg.replace(seed=int(env))
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return cfg


def cmd_run(args) -> int:
    from .explorer import run_to_dir

    cfg, base = _load(args.config)
    cfg = _resolve_seed(cfg, args.seed)
    if args.snapshot_every is not None:
        cfg = cfg.replace(snapshot_every=args.snapshot_every)
    out = Path(args.out)
    ex = run_to_dir(cfg, out, base_dir=base)
    (out / "config.used").write_text(format_config(cfg))
    last = ex.records[-1]
    print(
        f"{ex.termination} after {len(ex.records)} steps: "
        f"entropy {last.total_entropy / ex.initial_entropy:.3f} of initial, "
        f"coverage {last.coverage:.3f}, collisions {sum(r.collision for r in ex.records)}"
    )
    return 0


def cmd_render(args) -> int:
    db = read_map_csv(args.inp)
    if args.layer == "occupancy":
        img = occupancy_to_gray(db.p)
    else:
        img = entropy_to_gray(entropy_map(db.p))
    write_pgm(args.out, img)
    return 0


def cmd_validate(args) -> int:
    cfg = parse_config(args.path)
    cfg.world_path(Path(args.path).resolve().parent)
    print(f"{args.path}: ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pareto-explore", description="Multi-objective lidar exploration on a Bayesian Hilbert map.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log every planning step")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="explore a world and write metrics and maps")
    r.add_argument("--config", help="key = value config file (defaults if omitted)")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, help=f"overrides the config seed and ${SEED_ENV}")
    r.add_argument("--snapshot-every", type=int, help="write map_NNNNN.pgm every N steps (0 = never)")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("render", help="render a map CSV layer to PGM")
    d.add_argument("--layer", choices=("occupancy", "entropy"), default="occupancy")
    d.add_argument("--in", dest="inp", required=True, help="map CSV (x,y,p)")
    d.add_argument("--out", required=True, help="output .pgm")
    d.set_defaults(func=cmd_render)

    v = sub.add_parser("validate-config", help="parse a config file and check its world exists")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"pareto-explore {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
