"""Command-line front end: ``compute``, ``verify`` and ``plot``.

Exit codes: 0 success, 1 a gating check failed, 2 bad weight spec or usage,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import extremal, figures, orthopoly, svgplot, verify, weightfn
from .errors import CMSError, MisuseError, WeightSpecError

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    weight: str
    n: list = field(default_factory=lambda: [5])
    grid: int = 1000
    out: str | None = None
    suite: list = field(default_factory=lambda: list(verify.DEFAULT_SUITE))
    plot: str = "pi-family"
    x0: float | None = None
    profile: str | None = None
    eps: float = 0.2
    fault: float = 0.0

    def validate(self):
        if any(k < 1 for k in self.n):
            raise UsageError("--n must be >= 1")
        if self.grid < 2:
            raise UsageError("--grid must be >= 2")
        cap = orthopoly.degree_cap()
        if max(self.n) > cap:
            raise UsageError(f"--n {max(self.n)} exceeds the degree cap {cap} ({orthopoly.DEGREE_CAP_ENV})")
        if self.command != "verify" and len(self.n) != 1:
            raise UsageError(f"{self.command} takes a single --n")
        if self.command == "plot" and self.plot not in figures.KINDS:
            raise UsageError(f"unknown plot kind {self.plot!r}; choose from {', '.join(figures.KINDS)}")
        if self.command == "plot" and self.plot in ("q_x", "p_x"):
            if self.x0 is None or not -1.0 < self.x0 < 1.0:
                raise UsageError(f"plot {self.plot} needs --x0 in (-1, 1)")
        if self.command == "plot" and not self.out:
            raise UsageError("plot needs --out")
        unknown = [s for s in self.suite if s not in verify.SUITES]
        if unknown:
            raise UsageError(f"unknown suite(s): {', '.join(unknown)}; choose from {', '.join(verify.SUITES)}")
        return self


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")


def _name_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="cmsquad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_help):
        p.add_argument("--weight", required=True, help="weight spec JSON file or built-in name (%s)" % ", ".join(weightfn.BUILTIN))
        p.add_argument("--n", type=_int_list, default=[5], help=n_help)
        p.add_argument("--grid", type=int, default=1000, help="grid size on [-1, 1]; interior points are sampled")
        p.add_argument("--out", help="output path")

    p = sub.add_parser("compute", help="write a profile CSV")
    common(p, "degree n")
    p = sub.add_parser("verify", help="run verification suites")
    common(p, "comma-separated degrees (default 4,8,16)")
    p.set_defaults(n=None, grid=200)
    p.add_argument("--suite", type=_name_list, default=list(verify.DEFAULT_SUITE), help="comma-separated suites: %s" % ", ".join(verify.SUITES))
    p.add_argument("--eps", type=float, default=0.2, help="tolerance for the discontinuous-weight check")
    p.add_argument("--inject-fault", dest="fault", type=float, default=0.0, help="shift lambda by this multiple of the mass (harness self-test)")
    p = sub.add_parser("plot", help="write an SVG plot and its data CSV")
    common(p, "degree n")
    p.add_argument("--plot", default="pi-family", help="plot kind: %s" % ", ".join(figures.KINDS))
    p.add_argument("--x0", type=float, help="node x for q_x and p_x plots")
    p.add_argument("--profile", help="existing profile CSV to plot instead of recomputing")
    return parser


def config_from_args(args):
    cfg = RunConfig(command=args.command, weight=args.weight, grid=args.grid, out=args.out)
    cfg.n = args.n if args.n is not None else list(verify.DEFAULT_NS)
    for name in ("suite", "plot", "x0", "profile", "eps", "fault"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    return cfg.validate()


def _load(cfg):
    spec = weightfn.load(cfg.weight)
    weightfn.require_valid(spec)
    return spec


def _profile_errors(prof):
    return [(s.x, s.error) for s in prof.samples if s.error]


def cmd_compute(cfg, stdout):
    spec = _load(cfg)
    prof = extremal.profile(spec, cfg.n[0], cfg.grid)
    bad = _profile_errors(prof)
    if bad:
        x, err = bad[0]
        raise NumericalFailure(f"{len(bad)} sample(s) failed; first at x={x:.17g}: {err}")
    if cfg.out:
        extremal.write_profile_csv(prof, cfg.out)
    else:
        stdout.write(extremal.format_profile_csv(prof))
    return EXIT_OK


def cmd_verify(cfg, stdout):
    spec = _load(cfg)
    explicit = cfg.suite != list(verify.DEFAULT_SUITE)
    reports = verify.run_suite(spec, cfg.suite, cfg.n, cfg.grid, cfg.eps, explicit=explicit, fault=cfg.fault)
    text = verify.text_report(reports)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text, encoding="utf-8")
        (out / "report.csv").write_text(verify.csv_report(reports), encoding="utf-8")
    stdout.write(text)
    return EXIT_OK if verify.all_passed(reports) else EXIT_CHECK


def cmd_plot(cfg, stdout):
    spec = _load(cfg)
    n = cfg.n[0]
    tables = orthopoly.build_tables(spec, n)
    out = Path(cfg.out)
    stem = out.with_suffix("")
    name = Path(cfg.weight).stem
    rep = None
    if cfg.plot in figures.PROFILE_KINDS:
        source = cfg.profile
        if source is None:
            prof = extremal.profile(spec, n, cfg.grid, tables=tables)
            bad = _profile_errors(prof)
            if bad:
                raise NumericalFailure(f"{len(bad)} sample(s) failed; first at x={bad[0][0]:.17g}: {bad[0][1]}")
            source = str(stem) + ".profile.csv"
            extremal.write_profile_csv(prof, source)
        data = figures.profile_columns(extremal.read_profile_csv(source), spec)
    else:
        data, rep = figures.polynomial_columns(cfg.plot, tables, cfg.grid, cfg.x0)
    data_path = str(stem) + ".csv"
    figures.write_columns(data, data_path)
    # draw from the file just written so the chart is a view of the CSV
    cols = extremal.read_profile_csv(data_path)
    chart = figures.chart_for(cfg.plot, cols, tables, name, rep, cfg.x0)
    svgplot.write(chart, out)
    stdout.write(f"wrote {out} and {data_path}\n")
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "plot": cmd_plot}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg, stdout)
    except (UsageError, WeightSpecError, MisuseError, FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except (NumericalFailure, CMSError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
