"""Command-line entry point.

    constsgd bounds [--config FILE] [key=value ...]
    constsgd verify EXPERIMENT [--config FILE | --preset NAME] [key=value ...]
    constsgd property-test LEMMA [--seed N] [--replications N]
    constsgd report PATH

Command-line flags beat ``CONSTSGD_*`` environment variables, which beat the
configuration file: ``CONSTSGD_CONFIG``, ``CONSTSGD_SEED``,
``CONSTSGD_OUT_DIR``, ``CONSTSGD_REPLICATIONS`` and ``CONSTSGD_THREADS``.
``CONSTSGD_BACKEND`` (auto, compiled or python) picks the simulation kernel.

Exit status: 0 when every criterion passes, 1 when some criterion fails,
2 on invalid input or a runtime error (details as JSON on stderr).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import presets
from .bounds import RangeError
from .config import EXPERIMENTS, LEMMAS, ConfigError, parse_config
from .runner import load_report, run

ENV_PREFIX = "CONSTSGD_"
EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _env(name):
    return os.environ.get(ENV_PREFIX + name)


def _env_int(name):
    v = _env(name)
    if v is None:
        return None
    try:
        return int(v)
    except ValueError:
        raise ConfigError([f"{ENV_PREFIX}{name} must be an integer, got {v!r}"]) from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--preset", choices=sorted(presets.ACCEPTANCE),
                   help="built-in acceptance configuration")
    p.add_argument("--seed", type=int, help="root seed (64-bit)")
    p.add_argument("--out-dir", help="directory for the JSON report and CSV curve")
    p.add_argument("--replications", type=int, help="replications (instances for property tests)")
    p.add_argument("--threads", type=int, help="worker threads for replications")
    p.add_argument("overrides", nargs="*", metavar="key=value",
                   help="configuration values that replace those of the file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="constsgd", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("bounds", help="evaluate the closed-form bounds"))
    v = sub.add_parser("verify", help="run one simulation experiment")
    v.add_argument("experiment", choices=[e for e in EXPERIMENTS if e != "bounds"])
    _common(v)
    t = sub.add_parser("property-test", help="check one inequality on random instances")
    t.add_argument("lemma", choices=sorted(set(LEMMAS) | {"norm-equivalence"}))
    _common(t)
    r = sub.add_parser("report", help="summarise a JSON report")
    r.add_argument("path")
    return parser


def _config_text(args, experiment) -> str:
    path = args.config or _env("CONFIG")
    if path and args.preset:
        raise ConfigError(["use either --config or --preset, not both"])
    if args.preset:
        return presets.ACCEPTANCE[args.preset]
    if path:
        return Path(path).read_text()
    return f"experiment = {experiment}\n"


def load_config(args, experiment: str, extra: dict | None = None):
    text = _config_text(args, experiment)
    overrides = list(args.overrides) + [f"{k}={v}" for k, v in (extra or {}).items()]
    flags = {
        "seed": args.seed if args.seed is not None else _env_int("SEED"),
        "threads": args.threads if args.threads is not None else _env_int("THREADS"),
        "out_dir": args.out_dir if args.out_dir is not None else _env("OUT_DIR"),
    }
    reps = args.replications if args.replications is not None else _env_int("REPLICATIONS")
    if reps is not None:
        flags["instances" if experiment == "inequalities" else "R"] = reps
    overrides += [f"{k}={v}" for k, v in flags.items() if v is not None]
    return parse_config(text, experiment, overrides)


def _print_summary(report, paths) -> None:
    for name, ok in report.criteria.items():
        print(f"{'PASS' if ok else 'FAIL'}  {report.experiment}.{name}")
    print(f"{'PASS' if report.passed else 'FAIL'}  {report.experiment} "
          f"({report.wall_time:.2f} s)")
    for kind, path in paths.items():
        print(f"wrote {kind}: {path}")


def _error(kind: str, message: str, errors=None) -> int:
    json.dump({"error": kind, "message": message, "errors": errors or [message]}, sys.stderr,
              indent=2, ensure_ascii=False)
    sys.stderr.write("\n")
    return EXIT_ERROR


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    # key=value tokens that follow an option land in ``extra``
    stray = [a for a in extra if a.startswith("-") or "=" not in a]
    if stray or (extra and args.command == "report"):
        parser.error(f"unrecognized arguments: {' '.join(stray or extra)}")
    if extra:
        args.overrides = list(args.overrides) + extra
    try:
        if args.command == "report":
            data = load_report(args.path)
            for name, ok in data["criteria"].items():
                print(f"{'PASS' if ok else 'FAIL'}  {data['experiment']}.{name}")
            print(f"{'PASS' if data['pass'] else 'FAIL'}  {data['experiment']} "
                  f"(schema {data['schema_version']}, version {data.get('version', '?')})")
            return EXIT_PASS if data["pass"] else EXIT_FAIL
        if args.command == "bounds":
            cfg = load_config(args, "bounds")
        elif args.command == "verify":
            cfg = load_config(args, args.experiment)
        else:
            lemma = args.lemma.replace("-", "_")
            cfg = load_config(args, "inequalities", {"lemma": lemma})
        report = run(cfg)
        paths = report.write(cfg["out_dir"])
        _print_summary(report, paths)
        return EXIT_PASS if report.passed else EXIT_FAIL
    except ConfigError as exc:
        return _error("config", "invalid configuration", exc.errors)
    except (RangeError, ValueError, ArithmeticError, OSError) as exc:
        return _error(type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
