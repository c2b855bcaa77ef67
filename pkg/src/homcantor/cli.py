"""Command-line entry point: ``homcantor <command> ...``.

Exit codes: 0 success, 2 unreadable input, 3 incommensurable ratios,
4 no admissible partition, 5 empty construction, 6 search exhausted,
7 verification failed, 8 replay failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline as pl
from .baselines import brute_sumset, classify_region, grid_csv, region_grid
from .ifs import ConstantsConfig, IFSError, common_ratio, load
from .rational import as_fraction
from .recurrent import CROSS, SELF
from .search import Certificate, replay


def _fraction(text: str):
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _load_configs(paths):
    try:
        return [load(p) for p in paths]
    except (OSError, IFSError, ValueError, TypeError, KeyError) as exc:
        raise pl.StageError("parse", pl.EXIT_PARSE, str(exc)) from exc


def _emit(args, payload: dict, files: dict[str, str], code: int, stage: str = "done"):
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if getattr(args, "out", None):
        pl.write_manifest(Path(args.out), files or {"result.json": text + "\n"},
                          " ".join(sys.argv[1:]) if sys.argv else args.command,
                          {"exit_code": code, "stage": stage})
    return code


def cmd_classify(args) -> int:
    v = classify_region(args.a, args.b)
    print(f"a={args.a} b={args.b}: {v.verdict} (d_sum={v.dim_sum:.6f}, "
          f"thickness product={float(v.thickness_product):.6f})", file=sys.stderr)
    payload = v.to_json()
    return _emit(args, payload, {"classify.json": json.dumps(payload, indent=2) + "\n"}, 0)


def cmd_pipeline(args) -> int:
    if args.seed is None:
        print("error: --seed is required for pipeline", file=sys.stderr)
        return pl.EXIT_PARSE
    configs = _load_configs(args.config)
    K = configs[0]
    Kp = configs[1] if len(configs) > 1 else None
    cfg = pl.RunConfig(K, Kp, mode=args.mode,
                       constants=ConstantsConfig(c0=args.c0, c2=args.c2),
                       refine=args.refine, trials=args.trials, seed=args.seed,
                       depth=args.depth)
    result = pl.run_pipeline(cfg)
    if args.out:
        pl.write_outputs(args.out, result, " ".join(sys.argv[1:]))
    print(pl.render_report(result.report), end="")
    if result.code:
        print(f"stage {result.stage} failed: {result.report.get('error')}", file=sys.stderr)
    return result.code


def cmd_oracle(args) -> int:
    configs = _load_configs(args.config)
    K = configs[0]
    Kp = configs[1] if len(configs) > 1 else K
    try:
        if K.ratio != Kp.ratio:
            K, Kp = common_ratio(K, Kp)
    except IFSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return pl.EXIT_INCOMMENSURABLE
    U = brute_sumset(K, Kp, args.depth, args.mode)
    payload = {"depth": args.depth, "mode": args.mode, "intervals": U.to_json(),
               "components": len(U), "measure": str(U.measure)}
    return _emit(args, payload, {"oracle.json": json.dumps(payload, indent=2) + "\n"}, 0)


def cmd_region_grid(args) -> int:
    rows = region_grid(args.resolution, args.depth)
    text = grid_csv(rows)
    if args.out:
        pl.write_manifest(Path(args.out), {"region_grid.csv": text},
                          " ".join(sys.argv[1:]), {"exit_code": 0, "cells": len(rows)})
    sys.stdout.write(text)
    return 0


def cmd_replay(args) -> int:
    try:
        data = json.loads(Path(args.certificate).read_text(encoding="utf-8"))
        cert = Certificate.from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot read certificate: {exc}", file=sys.stderr)
        return pl.EXIT_PARSE
    configs = _load_configs(args.config) if args.config else []
    base_K = configs[0] if configs else None
    base_Kp = configs[1] if len(configs) > 1 else None
    if base_K is not None:
        s = base_K.hull
        base_K, base_Kp = base_K.normalized(), (base_Kp or configs[0]).scaled(1 / s)
    res = replay(cert, base_K, base_Kp)
    payload = {"result": "pass" if res.ok else "fail", "failed_runs": res.failed_runs,
               "problems": res.problems, "runs": len(cert.runs), "J": cert.J.to_json()}
    return _emit(args, payload, {"replay.json": json.dumps(payload, indent=2) + "\n"},
                 0 if res.ok else pl.EXIT_REPLAY, "replay")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homcantor", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="regime of C_a + C_b")
    c.add_argument("a", type=_fraction)
    c.add_argument("b", type=_fraction)
    c.add_argument("--out")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("pipeline", help="build, search, certify and replay")
    c.add_argument("--config", action="append", required=True,
                   help="IFS config for K; give a second one for K'")
    c.add_argument("--seed", type=int)
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--depth", type=int, default=8, help="oracle depth for the report")
    c.add_argument("--c0", type=_fraction)
    c.add_argument("--c2", type=_fraction)
    c.add_argument("--refine", type=int, default=2)
    c.add_argument("--mode", choices=[CROSS, SELF], default=CROSS)
    c.add_argument("--out")
    c.set_defaults(func=cmd_pipeline)

    c = sub.add_parser("oracle", help="brute-force depth-n sumset cover")
    c.add_argument("--config", action="append", required=True)
    c.add_argument("--depth", type=int, default=4)
    c.add_argument("--mode", choices=["sum", "difference"], default="difference")
    c.add_argument("--out")
    c.set_defaults(func=cmd_oracle)

    c = sub.add_parser("region-grid", help="regime grid over (a, b)")
    c.add_argument("--resolution", type=int, default=10)
    c.add_argument("--depth", type=int, default=4)
    c.add_argument("--out")
    c.set_defaults(func=cmd_region_grid)

    c = sub.add_parser("replay", help="re-verify a certificate")
    c.add_argument("certificate")
    c.add_argument("--config", action="append")
    c.add_argument("--out")
    c.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except pl.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return pl.EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
