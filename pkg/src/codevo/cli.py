"""Command line: ``codevo run | sweep | analyze``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .artifacts import analyze, dump_json
from .scenarios import ConfigError, ScenarioConfig, run, sweep_alphabet


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="codevo", description="Code evolution in structured populations.")
    p.add_argument("-v", "--verbose", action="store_true", help="log optimizer progress")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="optimize one scenario and write its artifacts")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--out", type=Path, help="output directory (default: config out_dir)")
    r.add_argument("--threads", type=int, default=1,
                   help="evaluation threads; only 1 is supported and it is bit-reproducible")

    s = sub.add_parser("sweep", help="best blind information over a range of alphabet sizes")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--xmin", type=int, default=2)
    s.add_argument("--xmax", type=int, default=9)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", type=Path)
    s.add_argument("--threads", type=int, default=1)

    a = sub.add_parser("analyze", help="re-analyse a saved codes.json without optimizing")
    a.add_argument("--codes", required=True, type=Path)
    a.add_argument("--out", required=True, type=Path)
    return p


def _load(args) -> ScenarioConfig:
    config = ScenarioConfig.load(args.config)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    if args.threads != 1:
        raise ConfigError("only --threads 1 is supported")
    return config


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            config = _load(args)
            out = args.out or config.out_dir
            if out is None:
                raise ConfigError("no output directory: pass --out or set out_dir in the config")
            report, _ = run(config, out)
            print(f"final code similarity {report.final_code_similarity:.6f} "
                  f"(bound {report.similarity_bound:.6f}); results in {out}")
        elif args.command == "sweep":
            config = _load(args)
            if args.xmin > args.xmax:
                raise ConfigError("--xmin exceeds --xmax")
            out = args.out or config.out_dir
            rows = sweep_alphabet(config, range(args.xmin, args.xmax + 1), out)
            print("|X|  best I(mu; X, X')")
            for row in rows:
                print(f"{row.output_states:3d}  {row.best_blind_info:.5f}")
        else:
            result = analyze(args.codes, args.out)
            sys.stdout.write(dump_json({k: result[k] for k in
                                        ("code_similarity", "similarity_bound", "env_info_pair", "blind_info")}))
    except (ConfigError, OSError, ValueError) as exc:
        print(f"codevo: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
