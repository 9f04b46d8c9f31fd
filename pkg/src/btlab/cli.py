"""Command line entry point.

    btlab list
    btlab run --config run.cfg
    btlab run --experiment bs-exact --k 8,16,32 --twist delta --outdir runs

A config file holds ``key = value`` lines (an INI section header is
optional).  Results go to ``<outdir>/<experiment>/<timestamp>/`` as
``table.csv``, ``summary.json`` and ``plot.svg``.  The exit status is 0
exactly when every check of the experiment passes; 2 signals a bad
configuration or an unwritable output directory.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import EXPERIMENTS, ExperimentConfig, Report, list_experiments
from .svg import loglog_svg

log = logging.getLogger("btlab")

_INT_LISTS = ("k_set",)
_FLOAT_LISTS = ("window", "taus", "lambdas")
_INTS = ("extra_degree", "seed", "n_loops")
_FLOATS = ("x",)
_STRINGS = ("experiment", "twist", "observable", "observable_g", "outdir")


def _split(v: str) -> list[str]:
    return [s for s in v.replace(",", " ").split() if s]


def parse_settings(items: dict) -> ExperimentConfig:
    """Build an ``ExperimentConfig`` from string-valued settings."""
    kw: dict = {}
    tols: dict = {}
    for key, raw in items.items():
        key = key.strip().lower().replace("-", "_")
        raw = str(raw).strip()
        try:
            if key.startswith("tol_"):
                vals = [float(s) for s in _split(raw)]
                tols[key[4:]] = vals[0] if len(vals) == 1 else tuple(vals)
            elif key in _INT_LISTS:
                kw[key] = tuple(int(s) for s in _split(raw))
            elif key in _FLOAT_LISTS:
                kw[key] = tuple(float(s) for s in _split(raw))
            elif key in _INTS:
                kw[key] = int(raw)
            elif key in _FLOATS:
                kw[key] = float(raw)
            elif key in _STRINGS:
                kw[key] = raw
            else:
                raise ValueError(f"unknown setting {key!r}")
        except ValueError as exc:
            raise ValueError(f"setting {key!r}: {exc}") from exc
    if "experiment" not in kw:
        raise ValueError("no experiment given")
    return ExperimentConfig(tolerances=tols, **kw)


def read_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError:
        cp.read_string("[experiment]\n" + text)
    items: dict = {}
    for sec in cp.sections():
        items.update(cp[sec])
    return parse_settings(items)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.15e}"
    return str(v)


def write_outputs(report: Report, cfg: ExperimentConfig, stamp: str | None = None) -> Path:
    stamp = stamp or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    out = Path(cfg.outdir) / report.experiment / stamp
    out.mkdir(parents=True, exist_ok=False)
    with open(out / "table.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(report.columns)
        for row in report.rows:
            w.writerow([_fmt(row.get(c, "")) for c in report.columns])
    summary = {
        "experiment": report.experiment,
        "version": __version__,
        "passed": report.passed,
        "checks": [c.as_dict() for c in report.checks],
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in vars(cfg).items() if v is not None},
        "meta": report.meta,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
    (out / "plot.svg").write_text(loglog_svg(report.series, title=report.experiment))
    return out


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(type(o).__name__)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="btlab", description="Berezin-Toeplitz spectral experiments")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list experiments")
    r = sub.add_parser("run", help="run one experiment")
    g = r.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="config file")
    g.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    r.add_argument("--k", dest="k_set", help="comma separated k values")
    r.add_argument("--twist", choices=("delta", "trivial"))
    r.add_argument("--observable")
    r.add_argument("--window", help="lo,hi")
    r.add_argument("--outdir")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="any config setting, e.g. tol_max_deviation=1e-8")
    return p


def _settings_from_args(args) -> dict:
    items: dict = {"experiment": args.experiment}
    for key in ("k_set", "twist", "observable", "window", "outdir"):
        v = getattr(args, key)
        if v is not None:
            items[key] = v
    for s in args.set:
        if "=" not in s:
            raise ValueError(f"--set expects KEY=VALUE, got {s!r}")
        k, v = s.split("=", 1)
        items[k] = v
    return items


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "list":
        for name, desc in list_experiments():
            print(f"{name:20s} {desc}")
        return 0
    try:
        if args.config:
            cfg = read_config(args.config)
            overrides = {k: v for k, v in _settings_from_args(args).items()
                         if k != "experiment"}
            if overrides:
                base = {k: v for k, v in vars(cfg).items() if v is not None and k != "tolerances"}
                base.update({f"tol_{k}": v for k, v in cfg.tolerances.items()})
                base = {k: ",".join(map(str, v)) if isinstance(v, tuple) else v for k, v in base.items()}
                base.update(overrides)
                cfg = parse_settings(base)
        else:
            cfg = parse_settings(_settings_from_args(args))
    except (ValueError, OSError, configparser.Error) as exc:
        print(f"btlab: error: {exc}", file=sys.stderr)
        return 2
    log.info("running %s", cfg.experiment)
    try:
        report = EXPERIMENTS[cfg.experiment][0](cfg)
    except ValueError as exc:
        print(f"btlab: {cfg.experiment} failed: {exc}", file=sys.stderr)
        return 1
    try:
        out = write_outputs(report, cfg)
    except OSError as exc:
        print(f"btlab: cannot write results: {exc}", file=sys.stderr)
        return 2
    for c in report.checks:
        print(c.line())
    print(f"{'PASS' if report.passed else 'FAIL'} {cfg.experiment} -> {out}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
