"""Render bound-sweep CSVs as multi-series log-scale figures.

Pure presentation layer: the plotted points are exactly the CSV values,
one line per (geometry, model, method) combination present, so any
discrepancy with expectations is attributable to the data, never to the
plotter. A dry-run mode exports the would-be-plotted series as JSON for
verification.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = ("sweep_var", "sweep_value", "geometry", "model", "method",
                    "mean_crb")


class PlotDataError(Exception):
    """Raised for unusable input files."""


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    output_image: str
    x_label: str | None = None
    log_y: bool = True
    series_filter: tuple = ()


@dataclass(frozen=True)
class Series:
    key: str                 # "GEOMETRY/model/method"
    x: tuple
    y: tuple


def _matches(key: str, patterns: tuple) -> bool:
    """A key matches a pattern if every non-* component agrees."""
    if not patterns:
        return True
    parts = key.split("/")
    for pattern in patterns:
        want = pattern.split("/")
        if len(want) != 3:
            raise PlotDataError(
                f"filter {pattern!r} must look like GEOMETRY/model/method "
                "(use * as a wildcard component)")
        if all(w == "*" or w == p for w, p in zip(want, parts)):
            return True
    return False


def load_series(spec: PlotSpec):
    """Parse the CSV into plot series.

    Unknown columns are tolerated; missing required columns or an empty
    data section are errors. Returns (sweep_var, [Series...]) with points
    sorted by sweep value and series sorted by key.
    """
    try:
        with open(spec.input_csv, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [col for col in REQUIRED_COLUMNS if col not in header]
            if missing:
                raise PlotDataError(
                    f"{spec.input_csv}: missing required columns {missing}")
            rows = list(reader)
    except OSError as exc:
        raise PlotDataError(f"cannot read {spec.input_csv}: {exc}") from exc
    if not rows:
        raise PlotDataError(f"{spec.input_csv}: no data rows")
    sweep_vars = {row["sweep_var"] for row in rows}
    if len(sweep_vars) != 1:
        raise PlotDataError(
            f"{spec.input_csv}: expected one sweep variable, found {sorted(sweep_vars)}")
    sweep_var = sweep_vars.pop()
    buckets: dict = {}
    for row in rows:
        key = f"{row['geometry']}/{row['model']}/{row['method']}"
        if not _matches(key, spec.series_filter):
            continue
        try:
            point = (float(row["sweep_value"]), float(row["mean_crb"]))
        except (ValueError, TypeError) as exc:
            raise PlotDataError(
                f"{spec.input_csv}: unparsable numeric value in row {row}") from exc
        buckets.setdefault(key, []).append(point)
    if not buckets:
        raise PlotDataError(
            f"{spec.input_csv}: no rows left after applying the series filter")
    series = []
    for key in sorted(buckets):
        points = sorted(buckets[key])
        series.append(Series(key=key,
                             x=tuple(p[0] for p in points),
                             y=tuple(p[1] for p in points)))
    return sweep_var, series


def series_payload(sweep_var: str, series) -> dict:
    """JSON-friendly dump of exactly what would be plotted."""
    return {
        "sweep_var": sweep_var,
        "series": [{"key": s.key, "x": list(s.x), "y": list(s.y)} for s in series],
    }


_MODEL_STYLE = {"structured": "-", "unstructured": "--"}
_METHOD_MARKER = {"OP": "o", "SB": "s"}


def render_sweep(spec: PlotSpec) -> dict:
    """Render the figure and return the plotted-series payload."""
    sweep_var, series = load_series(spec)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for s in series:
        geometry, model, method = s.key.split("/")
        ax.plot(s.x, s.y,
                linestyle=_MODEL_STYLE.get(model, "-"),
                marker=_METHOD_MARKER.get(method, "."),
                markersize=4, label=s.key)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_label or sweep_var)
    ax.set_ylabel("mean bound per channel coefficient")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    try:
        fig.savefig(spec.output_image, dpi=150)
    except OSError as exc:
        raise PlotDataError(f"cannot write {spec.output_image}: {exc}") from exc
    finally:
        plt.close(fig)
    return series_payload(sweep_var, series)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crbplot",
                                     description="Plot bound-sweep CSV results")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one sweep CSV to an image")
    p.add_argument("--in", dest="input_csv", required=True)
    p.add_argument("--out", dest="output_image", default="figure.png")
    p.add_argument("--filter", action="append", default=[],
                   metavar="GEOMETRY/model/method",
                   help="keep matching series only; * matches any component; "
                        "repeatable")
    p.add_argument("--linear-y", action="store_true",
                   help="linear instead of logarithmic y axis")
    p.add_argument("--x-label", default=None)
    p.add_argument("--dump-data", default=None, metavar="PATH",
                   help="write the plotted series as JSON ('-' for stdout)")
    p.add_argument("--dry-run", action="store_true",
                   help="parse and export only; do not write the image")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(input_csv=args.input_csv, output_image=args.output_image,
                    x_label=args.x_label, log_y=not args.linear_y,
                    series_filter=tuple(args.filter))
    try:
        if args.dry_run:
            payload = series_payload(*load_series(spec))
        else:
            payload = render_sweep(spec)
        if args.dump_data:
            text = json.dumps(payload, indent=2, sort_keys=True)
            if args.dump_data == "-":
                sys.stdout.write(text + "\n")
            else:
                with open(args.dump_data, "w", encoding="utf-8") as fh:
                    fh.write(text + "\n")
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
