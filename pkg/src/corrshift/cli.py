"""Command-line interface: CSV ingestion, detection runs, experiment harnesses.

Artifacts are machine-readable and reproducible: identical invocations
(same files, flags, seed) produce byte-identical JSON and CSV, and every
artifact embeds the manifest that produced it (CSV artifacts carry it in a
leading ``# manifest:`` comment line). Exit codes: 0 = significant points
found, 3 = ran but none found, 1 = usage error, 2 = data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from ._streams import stream
from .bootstrap import Iid, Sieve, select_ar_order
from .detector import DetectorConfig, detect_recursive, format_p_value
from .errors import CorrshiftError, NonFiniteValue, ParseError, RaggedRows
from .metrics import DistanceMetricKind
from .nulldist import monte_carlo_null_curve, null_expectation_curve
from .panel import SeriesPanel, durbin_watson, log_returns, standardize
from .simlab import (
    fig2_csv,
    fig3_csv,
    fig4_csv,
    multiple_cp_experiment,
    norm_comparison_experiment,
    power_experiment,
)


def load_csv(path, transpose: bool = False, time_col: str = None) -> SeriesPanel:
    """Parse a rectangular numeric CSV into an unstandardized panel.

    Default layout: first row is a header of node labels, remaining rows
    are time points. With transpose=True the data rows become nodes and the
    header entries become time labels. time_col names a header column to
    capture as time labels (default layout only).

    Raises
    ------
    ParseError, RaggedRows, NonFiniteValue
        With exact 1-based file locations.
    """
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    rows = [row for row in rows if row]
    if len(rows) < 2:
        raise ParseError(1, 1, "<file needs a header row and data rows>")
    header = [cell.strip() for cell in rows[0]]
    width = len(header)
    skip = None
    if time_col is not None:
        if transpose:
            raise ValueError("time_col only applies to the default row-per-time layout")
        if time_col not in header:
            raise ValueError(f"time column {time_col!r} not in header {header}")
        skip = header.index(time_col)
    values = np.empty((len(rows) - 1, width - (1 if skip is not None else 0)))
    time_labels = [] if skip is not None else None
    for r, row in enumerate(rows[1:]):
        line = r + 2
        if len(row) != width:
            raise RaggedRows(line, width, len(row))
        c_out = 0
        for c, cell in enumerate(row):
            if c == skip:
                time_labels.append(cell.strip())
                continue
            try:
                parsed = float(cell)
            except ValueError:
                raise ParseError(line, c + 1, cell) from None
            if not math.isfinite(parsed):
                raise NonFiniteValue(line, c + 1)
            values[r, c_out] = parsed
            c_out += 1
    labels = [h for i, h in enumerate(header) if i != skip]
    if transpose:
        return SeriesPanel(values, time_labels=labels)
    return SeriesPanel(values.T, node_labels=labels, time_labels=time_labels)


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _manifest(inputs, transforms, seed):
    return {
        "inputs": list(inputs),
        "transforms": list(transforms),
        "tool_version": __version__,
        "seed": int(seed),
    }


def _config_echo(config: DetectorConfig, n: int):
    delta = config.resolved_delta(n)
    return {
        "metric": config.metric.value,
        "delta": delta,
        "b_count": int(config.b_count),
        "alpha": float(config.alpha),
        "bootstrap": "sieve" if isinstance(config.mode, Sieve) else "iid",
        "ar_order": int(config.mode.order) if isinstance(config.mode, Sieve) else None,
        "seed": int(config.seed),
        "max_depth": int(config.max_depth),
        "min_segment": config.resolved_min_segment(delta),
    }


def report_json(report, manifest) -> str:
    """Serialize a ChangePointReport to the canonical JSON schema."""
    document = {
        "points": [
            {
                "k": int(pt.location),
                "z": float(pt.z),
                "p_value": float(pt.p_value),
                "segment": [int(pt.segment[0]), int(pt.segment[1])],
                "depth": int(pt.depth),
            }
            for pt in report.points
        ],
        "n": int(report.n),
        "T": int(report.T),
        "config": _config_echo(report.config, report.n),
        "manifest": manifest,
    }
    return json.dumps(document, indent=2) + "\n"


def _manifest_comment(manifest) -> str:
    return "# manifest: " + json.dumps(manifest, separators=(",", ":")) + "\n"


def profile_csv(profile, manifest) -> str:
    """Root scan profile as CSV: k,d,mu0,sigma0,z,zb_max."""
    lines = [_manifest_comment(manifest).rstrip("\n"), "k,d,mu0,sigma0,z,zb_max"]
    for i, k in enumerate(profile.k_values):
        lines.append(
            f"{int(k)},{float(profile.d_values[i])!r},{float(profile.mu0[i])!r},"
            f"{float(profile.sigma0[i])!r},{float(profile.z_values[i])!r},"
            f"{float(profile.boot_z_envelope[i])!r}"
        )
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the artifact contract
    # reserves 2 for data errors and 1 for usage.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser():
    parser = _Parser(prog="corrshift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="detect change points in a CSV panel")
    detect.add_argument("input", help="CSV file: header of node labels, one row per time point")
    detect.add_argument("--transpose", action="store_true",
                        help="input rows are nodes instead of time points")
    detect.add_argument("--time-col", default=None, metavar="NAME",
                        help="header column to treat as time labels")
    detect.add_argument("--log-returns", action="store_true",
                        help="convert a strictly positive price panel to log returns first")
    detect.add_argument("--metric", choices=["frobenius", "max", "lr"], default="frobenius")
    detect.add_argument("--bootstrap", choices=["iid", "sieve"], default="iid")
    detect.add_argument("--ar-order", default="auto", metavar="N|auto",
                        help="sieve AR order; auto selects by cross-validation")
    detect.add_argument("--delta", type=int, default=None,
                        help="boundary buffer (default n; n+1 for --metric lr)")
    detect.add_argument("--B", type=int, default=500, help="bootstrap replicates")
    detect.add_argument("--alpha", type=float, default=0.05)
    detect.add_argument("--seed", type=int, default=0)
    detect.add_argument("--max-depth", type=int, default=8)
    detect.add_argument("--min-segment", type=int, default=None)
    detect.add_argument("--out", default=".", metavar="DIR",
                        help="directory for report.json and profile.csv")

    experiment = sub.add_parser("experiment", help="run a simulation harness")
    experiment.add_argument("figure", choices=["fig1", "fig2", "fig3", "fig4"])
    experiment.add_argument("--n", type=int, default=None)
    experiment.add_argument("--T", type=int, default=None)
    experiment.add_argument("--n-list", type=int, nargs="+", default=[4, 8, 12])
    experiment.add_argument("--C", type=int, default=30)
    experiment.add_argument("--rho", type=float, default=0.9)
    experiment.add_argument("--proportions", type=float, nargs="+", default=None)
    experiment.add_argument("--reps", type=int, default=None)
    experiment.add_argument("--B", type=int, default=200)
    experiment.add_argument("--alpha", type=float, default=0.05)
    experiment.add_argument("--seed", type=int, default=0)
    experiment.add_argument("--reversed", action="store_true",
                            help="fig4: put the exchangeable regime first")
    experiment.add_argument("--full", action="store_true",
                            help="full-scale replication (reps=10000); slow, offline use")
    experiment.add_argument("--out", default=".", metavar="DIR")
    return parser


def run_detect(args) -> int:
    started = time.monotonic()
    if args.B < 100:
        print("error: --B must be >= 100", file=sys.stderr)
        return 1
    if not 0.0 < args.alpha < 1.0:
        print("error: --alpha must be in (0, 1)", file=sys.stderr)
        return 1
    if args.ar_order != "auto":
        try:
            int(args.ar_order)
        except ValueError:
            print(f"error: --ar-order must be an integer or 'auto', got {args.ar_order!r}",
                  file=sys.stderr)
            return 1

    transforms = []
    try:
        panel = load_csv(args.input, transpose=args.transpose, time_col=args.time_col)
        if args.log_returns:
            panel = log_returns(panel)
            transforms.append("log_returns")
        panel = standardize(panel)
        transforms.append("standardize")

        if isinstance(args.ar_order, str) and args.ar_order == "auto":
            ar_order = None
        else:
            ar_order = int(args.ar_order)
        if args.bootstrap == "sieve":
            if ar_order is None:
                ar_order = select_ar_order(panel, min(5, panel.T // 4))
                print(f"selected AR order {ar_order} by cross-validation", file=sys.stderr)
            mode = Sieve(ar_order)
        else:
            mode = Iid()

        if panel.T >= 10:
            diag = durbin_watson(panel, args.alpha)
            if diag.any_significant and isinstance(mode, Iid):
                print(
                    "warning: significant autocorrelation detected; the i.i.d. bootstrap "
                    "inflates false positives on such data, consider --bootstrap sieve",
                    file=sys.stderr,
                )

        config = DetectorConfig(
            metric=DistanceMetricKind(args.metric),
            delta=args.delta,
            b_count=args.B,
            alpha=args.alpha,
            mode=mode,
            seed=args.seed,
            max_depth=args.max_depth,
            min_segment=args.min_segment,
        )
        report = detect_recursive(panel, config)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (CorrshiftError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    manifest = _manifest([args.input], transforms, args.seed)
    _atomic_write(os.path.join(args.out, "report.json"), report_json(report, manifest))
    _atomic_write(os.path.join(args.out, "profile.csv"),
                  profile_csv(report.root_profile, manifest))

    if report.points:
        for pt in report.points:
            display = format_p_value(pt.p_value, config.b_count)
            print(
                f"change point at k={pt.location} "
                f"(depth {pt.depth}, segment {pt.segment[0]}..{pt.segment[1]}): "
                f"z={pt.z:.3f}, p {'' if display.startswith('<') else '= '}{display}"
            )
    else:
        print("no significant change points")
    for branch in report.aborted:
        print(f"note: branch {branch.segment} aborted at depth {branch.depth}: {branch.reason}",
              file=sys.stderr)
    print(f"wrote report.json and profile.csv to {args.out} "
          f"in {time.monotonic() - started:.2f}s")
    return 0 if report.points else 3


def _experiment_manifest(args, defaults):
    manifest = _manifest([], ["synthetic"], args.seed)
    manifest["experiment"] = defaults
    return manifest


def run_experiment(args) -> int:
    started = time.monotonic()
    if not 0.0 < args.alpha < 1.0:
        print("error: --alpha must be in (0, 1)", file=sys.stderr)
        return 1
    figure = args.figure
    try:
        if figure == "fig1":
            n = args.n if args.n is not None else 20
            T = args.T if args.T is not None else 200
            reps = args.reps if args.reps is not None else 10000
            curve = null_expectation_curve(np.eye(n), T)
            mc = monte_carlo_null_curve(np.eye(n), T, reps, stream(args.seed, 0))
            manifest = _experiment_manifest(args, {"figure": "fig1", "n": n, "T": T, "reps": reps})
            lines = [_manifest_comment(manifest).rstrip("\n"), "k,analytic,mc_mean,mc_se"]
            for i, k in enumerate(curve.k_values):
                lines.append(
                    f"{int(k)},{float(curve.values[i])!r},"
                    f"{float(mc.means[i])!r},{float(mc.std_errors[i])!r}"
                )
            _atomic_write(os.path.join(args.out, "fig1.csv"), "\n".join(lines) + "\n")
            print(f"wrote fig1.csv ({reps} replicates) in {time.monotonic() - started:.2f}s")
        elif figure == "fig2":
            reps = args.reps if args.reps is not None else (10000 if args.full else 300)
            config = DetectorConfig(b_count=args.B, alpha=args.alpha, seed=args.seed)
            results = power_experiment(args.n_list, C=args.C, rho=args.rho,
                                       reps=reps, config=config)
            manifest = _experiment_manifest(
                args, {"figure": "fig2", "n_list": list(args.n_list), "C": args.C,
                       "rho": args.rho, "reps": reps, "B": args.B})
            _atomic_write(os.path.join(args.out, "fig2.csv"),
                          _manifest_comment(manifest) + fig2_csv(results))
            for res in results:
                print(f"n={res.n} T={res.T}: power={res.power:.3f}")
            print(f"wrote fig2.csv in {time.monotonic() - started:.2f}s")
        elif figure == "fig3":
            n = args.n if args.n is not None else 20
            T = args.T if args.T is not None else 400
            reps = args.reps if args.reps is not None else (10000 if args.full else 300)
            if args.proportions is not None:
                proportions = args.proportions
            elif args.full:
                proportions = [b / n for b in range(2, n + 1)]
            else:
                proportions = [0.1, 0.4, 0.8]
            config = DetectorConfig(b_count=args.B, alpha=args.alpha, seed=args.seed)
            rows = norm_comparison_experiment(n=n, T=T, proportions=proportions,
                                              config=config, reps=reps)
            manifest = _experiment_manifest(
                args, {"figure": "fig3", "n": n, "T": T, "proportions": list(proportions),
                       "reps": reps, "B": args.B})
            _atomic_write(os.path.join(args.out, "fig3.csv"),
                          _manifest_comment(manifest) + fig3_csv(rows))
            for row in rows:
                print(f"proportion={row.proportion} block={row.block} rho={row.rho:.4f} "
                      f"{row.metric.value}: power={row.power:.3f}")
            print(f"wrote fig3.csv in {time.monotonic() - started:.2f}s")
        else:
            reps = args.reps if args.reps is not None else (10000 if args.full else 300)
            config = DetectorConfig(b_count=args.B, alpha=args.alpha, seed=args.seed)
            result = multiple_cp_experiment(config=config, reps=reps,
                                            reversed_order=args.reversed)
            manifest = _experiment_manifest(
                args, {"figure": "fig4", "reps": reps, "B": args.B,
                       "reversed": bool(args.reversed)})
            _atomic_write(os.path.join(args.out, "fig4.csv"),
                          _manifest_comment(manifest) + fig4_csv(result))
            print(f"power={result.power:.3f} over {reps} replicates")
            print(f"wrote fig4.csv in {time.monotonic() - started:.2f}s")
    except (CorrshiftError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "detect":
        return run_detect(args)
    return run_experiment(args)


if __name__ == "__main__":
    sys.exit(main())
