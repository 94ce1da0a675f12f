"""Command line: analyze, plot, compare, selfcheck.

Exit codes: 0 completed, 1 configuration error, 2 completed with stage failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import bundled_names, load_config
from .errors import InputError
from .report import dumps, exit_status, loads, run_analyze, run_compare
from .svg import run_plot

EXIT_OK, EXIT_CONFIG, EXIT_STAGES = 0, 1, 2


def _write(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    report = run_analyze(cfg, timings=args.timings)
    _write(dumps(report), args.out or cfg.output.report)
    return exit_status(report)


def cmd_plot(args) -> int:
    cfg = load_config(args.config)
    if args.report:
        report = loads(Path(args.report).read_text(encoding="utf-8"))
    else:
        report = run_analyze(cfg)
    svg = run_plot(cfg, report)  # raises before anything is written
    _write(svg, args.out or cfg.output.svg)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    table = run_compare(cfg)
    if args.json:
        _write(dumps(table), args.out)
    else:
        lines = [f"# {cfg.name}: {table['status']}" + (f" ({table['reason']})" if table["reason"] else ""),
                 "window,defect,gap,verdict"]
        for r in table["rows"]:
            gap = "inf" if r["gap"] is None else repr(r["gap"])
            lines.append(f"{r['window']},{r['defect']!r},{gap},{r['verdict']}")
        _write("\n".join(lines) + "\n", args.out)
    return exit_status(table)


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_all

    results = run_all()
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_STAGES


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lyapopt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    cfg_help = f"config file, or the name of a bundled config ({', '.join(bundled_names())})"

    a = sub.add_parser("analyze", help="run the full pipeline and write a JSON report")
    a.add_argument("config", help=cfg_help)
    a.add_argument("--out", help="report path (default: config output.report, else stdout)")
    a.add_argument("--timings", action="store_true", help="record per-stage wall times (breaks byte-identity)")
    a.set_defaults(func=cmd_analyze)

    pl = sub.add_parser("plot", help="draw the multicone and generator images as SVG")
    pl.add_argument("config", help=cfg_help)
    pl.add_argument("--report", help="existing report to take the multicone from (default: run the analysis)")
    pl.add_argument("--out", help="SVG path (default: config output.svg, else stdout)")
    pl.set_defaults(func=cmd_plot)

    c = sub.add_parser("compare", help="potential defect, gap and verdict per window")
    c.add_argument("config", help=cfg_help)
    c.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    c.add_argument("--out", help="output path (default stdout)")
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("selfcheck", help="run the bundled acceptance checks")
    s.set_defaults(func=cmd_selfcheck)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"lyapopt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"lyapopt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
