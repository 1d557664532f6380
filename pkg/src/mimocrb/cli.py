"""Command-line front end: run the bound sweeps and write CSV results.

Value resolution order: command-line flags override config-file entries,
which override the built-in defaults. The config file is flat
``key = value`` text with ``#`` comments; keys are the flag names with
hyphens replaced by underscores.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, replace

from . import __version__
from .errors import ConfigError, MimoCrbError
from .experiments import (
    ScenarioConfig,
    SweepResult,
    SweepRow,
    run_single,
    sweep_layers,
    sweep_ring,
    sweep_snr,
)
from .geometry import build_uca, build_ucya, build_ula, geometry_csv_rows

CSV_HEADER = ("sweep_var,sweep_value,geometry,model,method,mean_crb,"
              "trials_used,deficient_rank_trials,seed")

SNR_SWEEP_DEFAULT = tuple(float(v) for v in range(-10, 31, 5))
LAYER_SWEEP_DEFAULT = tuple(range(1, 9))
RING_SWEEP_DEFAULT = tuple(range(8, 65, 8))

_SCENARIO_KEYS = {
    "trials": int,
    "seed": int,
    "n_tx": int,
    "n_paths": int,
    "k": int,
    "k_pilot": int,
    "k_data": int,
    "snr_db": float,
    "n_ula": int,
    "n_uca": int,
    "n_3d": int,
    "spacing_2d": float,
    "spacing_3d": float,
    "derivative_convention": str,
    "angle_unit": str,
    "pilot_kind": str,
    "scalar_reduction": str,
    "jobs": int,
    "out": str,
}


@dataclass(frozen=True)
class RunManifest:
    """Echo of a completed run, sufficient to reproduce its output."""

    config_echo: dict
    tool_version: str
    started_at: str
    completed_at: str
    output_path: str

    def lines(self):
        yield f"tool_version = {self.tool_version}"
        yield f"started_at = {self.started_at}"
        yield f"completed_at = {self.completed_at}"
        yield f"output_path = {self.output_path}"
        for key in sorted(self.config_echo):
            yield f"{key} = {self.config_echo[key]}"


def read_config_file(path: str) -> dict:
    """Parse flat key = value lines; unknown keys are rejected."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
                key, _, value = line.partition("=")
                key = key.strip().replace("-", "_")
                if key not in _SCENARIO_KEYS and key not in (
                        "snr_values", "n_3d_values", "n_uca_values"):
                    raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
                values[key] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _resolve(flag_value, file_values: dict, key: str, default, cast):
    if flag_value is not None:
        return flag_value
    if key in file_values:
        raw = file_values[key]
        try:
            if isinstance(default, (tuple, list)) or key.endswith("_values"):
                return tuple(cast(tok) for tok in raw.replace(",", " ").split())
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"config value {key} = {raw!r} is not valid") from exc
    return default


def _scenario_from_args(args, file_values: dict, snr_default: float) -> ScenarioConfig:
    try:
        return ScenarioConfig(
            num_tx=_resolve(args.n_tx, file_values, "n_tx", 2, int),
            num_paths=_resolve(args.n_paths, file_values, "n_paths", 4, int),
            num_subcarriers=_resolve(args.k, file_values, "k", 64, int),
            num_pilots=_resolve(args.k_pilot, file_values, "k_pilot", 16, int),
            num_data=_resolve(args.k_data, file_values, "k_data", 48, int),
            snr_db=_resolve(getattr(args, "snr_db", None), file_values,
                            "snr_db", snr_default, float),
            trials=_resolve(args.trials, file_values, "trials", 50, int),
            master_seed=_resolve(args.seed, file_values, "seed", 0, int),
            derivative_convention=_resolve(args.derivative_convention, file_values,
                                           "derivative_convention", "paper", str),
            angle_unit=_resolve(args.angle_unit, file_values,
                                "angle_unit", "radians", str),
            pilot_kind=_resolve(args.pilot_kind, file_values,
                                "pilot_kind", "orthogonal", str),
            scalar_reduction=_resolve(args.scalar_reduction, file_values,
                                      "scalar_reduction", "normalized", str),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def format_float(value: float) -> str:
    """Full-precision scientific notation that round-trips exactly."""
    return f"{value:.17e}"


def _format_sweep_value(value: float) -> str:
    as_float = float(value)
    if as_float.is_integer():
        return str(int(as_float))
    return repr(as_float)


def write_csv(result: SweepResult, path: str) -> None:
    """Write sweep rows in deterministic order; '-' writes to stdout."""
    lines = [CSV_HEADER]
    for row in result.sorted_rows():
        lines.append(",".join([
            row.sweep_var,
            _format_sweep_value(row.sweep_value),
            row.geometry,
            row.model,
            row.method,
            format_float(row.mean_crb),
            str(row.trials_used),
            str(row.deficient_rank_trials),
            str(row.seed),
        ]))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write results to {path}: {exc}") from exc


def read_csv(path: str) -> SweepResult:
    """Parse a results CSV back into rows (exact float round-trip)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path} does not carry the expected results header")
    rows = []
    for ln in lines[1:]:
        (sweep_var, sweep_value, geometry, model, method, mean_crb,
         trials_used, deficient, seed) = ln.split(",")
        rows.append(SweepRow(sweep_var=sweep_var, sweep_value=float(sweep_value),
                             geometry=geometry, model=model, method=method,
                             mean_crb=float(mean_crb), trials_used=int(trials_used),
                             deficient_rank_trials=int(deficient), seed=int(seed)))
    sweep_var = rows[0].sweep_var if rows else "unknown"
    return SweepResult(sweep_var=sweep_var, rows=tuple(rows))


def write_manifest(manifest: RunManifest, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for line in manifest.lines():
                fh.write(line + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write manifest to {path}: {exc}") from exc


def _progress(message: str) -> None:
    print(message, file=sys.stderr)


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--n-tx", type=int, default=None)
    parser.add_argument("--n-paths", type=int, default=None)
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--k-pilot", type=int, default=None)
    parser.add_argument("--k-data", type=int, default=None)
    parser.add_argument("--spacing-2d", type=float, default=None)
    parser.add_argument("--spacing-3d", type=float, default=None)
    parser.add_argument("--derivative-convention", choices=("paper", "wirtinger"),
                        default=None)
    parser.add_argument("--angle-unit", choices=("radians", "degrees"), default=None)
    parser.add_argument("--pilot-kind", choices=("orthogonal", "qpsk"), default=None)
    parser.add_argument("--scalar-reduction", choices=("normalized", "sum"),
                        default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--config", type=str, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimocrb",
        description="Channel-estimation error-bound sweeps for massive "
                    "MIMO-OFDM receive arrays")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-snr", help="bounds vs. SNR for fixed geometries")
    _add_scenario_flags(p)
    p.add_argument("--snr-db", type=float, nargs="+", default=None)
    p.add_argument("--n-ula", type=int, default=None)
    p.add_argument("--n-uca", type=int, default=None)
    p.add_argument("--n-3d", type=int, default=None)

    p = sub.add_parser("sweep-layers", help="bounds vs. cylinder layer count")
    _add_scenario_flags(p)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--n-uca", type=int, default=None)
    p.add_argument("--n-3d", type=int, nargs="+", default=None)

    p = sub.add_parser("sweep-ring", help="bounds vs. ring size")
    _add_scenario_flags(p)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--n-uca", type=int, nargs="+", default=None)
    p.add_argument("--n-3d", type=int, default=None)

    p = sub.add_parser("single", help="one scenario on one geometry")
    _add_scenario_flags(p)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--geometry", choices=("ula", "uca", "ucya"), default="ula")
    p.add_argument("--n-ula", type=int, default=None)
    p.add_argument("--n-uca", type=int, default=None)
    p.add_argument("--n-3d", type=int, default=None)
    p.add_argument("--dump-channels", type=str, default=None, metavar="PATH",
                   help="also write the per-trial channel vectors as CSV")

    p = sub.add_parser("dump-geometry", help="write element coordinates as CSV")
    p.add_argument("--ula", type=int, default=None, metavar="N")
    p.add_argument("--uca", type=int, default=None, metavar="N")
    p.add_argument("--ucya", type=int, nargs=2, default=None,
                   metavar=("RING", "LAYERS"))
    p.add_argument("--spacing-2d", type=float, default=0.5)
    p.add_argument("--spacing-3d", type=float, default=0.5)
    p.add_argument("--out", type=str, default="-")
    return parser


def _now_iso() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def _finish_run(result: SweepResult, out_path: str, config_echo: dict,
                started_at: str) -> int:
    write_csv(result, out_path)
    if out_path != "-":
        manifest = RunManifest(config_echo=config_echo, tool_version=__version__,
                               started_at=started_at, completed_at=_now_iso(),
                               output_path=out_path)
        write_manifest(manifest, out_path + ".manifest")
    return 0


def _run_dump_geometry(args) -> int:
    chosen = [name for name in ("ula", "uca", "ucya")
              if getattr(args, name) is not None]
    if len(chosen) != 1:
        raise ConfigError("dump-geometry needs exactly one of --ula, --uca, --ucya")
    if args.ula is not None:
        geom = build_ula(args.ula, args.spacing_2d)
    elif args.uca is not None:
        geom = build_uca(args.uca, args.spacing_2d)
    else:
        ring, layers = args.ucya
        geom = build_ucya(ring, layers, args.spacing_2d, args.spacing_3d)
    lines = ["element_index,x,y,z"]
    for idx, x, y, z in geometry_csv_rows(geom):
        lines.append(f"{idx},{x!r},{y!r},{z!r}")
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write geometry to {args.out}: {exc}") from exc
    return 0


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "dump-geometry":
        return _run_dump_geometry(args)

    file_values = read_config_file(args.config) if args.config else {}
    started_at = _now_iso()
    out_path = _resolve(args.out, file_values, "out", "results.csv", str)
    jobs = _resolve(args.jobs, file_values, "jobs", 1, int)
    spacing_2d = _resolve(args.spacing_2d, file_values, "spacing_2d", 0.5, float)
    spacing_3d = _resolve(args.spacing_3d, file_values, "spacing_3d", 0.5, float)

    if args.command == "sweep-snr":
        config = _scenario_from_args(args, file_values, snr_default=10.0)
        snr_values = args.snr_db if args.snr_db is not None else _resolve(
            None, file_values, "snr_values", SNR_SWEEP_DEFAULT, float)
        n_ula = _resolve(args.n_ula, file_values, "n_ula", 96, int)
        n_uca = _resolve(args.n_uca, file_values, "n_uca", 24, int)
        n_3d = _resolve(args.n_3d, file_values, "n_3d", 4, int)
        result = sweep_snr(config, tuple(float(v) for v in snr_values),
                           ula_elements=n_ula, ucya_ring=n_uca, ucya_layers=n_3d,
                           spacing_2d=spacing_2d, spacing_3d=spacing_3d,
                           jobs=jobs, progress=_progress)
        echo = _config_echo(config, command="sweep-snr", out=out_path, jobs=jobs,
                            spacing_2d=spacing_2d, spacing_3d=spacing_3d,
                            n_ula=n_ula, n_uca=n_uca, n_3d=n_3d,
                            snr_values=" ".join(str(v) for v in snr_values))
        return _finish_run(result, out_path, echo, started_at)

    if args.command == "sweep-layers":
        config = _scenario_from_args(args, file_values, snr_default=5.0)
        layer_values = args.n_3d if args.n_3d is not None else _resolve(
            None, file_values, "n_3d_values", LAYER_SWEEP_DEFAULT, int)
        n_uca = _resolve(args.n_uca, file_values, "n_uca", 24, int)
        result = sweep_layers(config, tuple(int(v) for v in layer_values),
                              ucya_ring=n_uca, spacing_2d=spacing_2d,
                              spacing_3d=spacing_3d, jobs=jobs, progress=_progress)
        echo = _config_echo(config, command="sweep-layers", out=out_path, jobs=jobs,
                            spacing_2d=spacing_2d, spacing_3d=spacing_3d,
                            n_uca=n_uca,
                            n_3d_values=" ".join(str(v) for v in layer_values))
        return _finish_run(result, out_path, echo, started_at)

    if args.command == "sweep-ring":
        config = _scenario_from_args(args, file_values, snr_default=5.0)
        ring_values = args.n_uca if args.n_uca is not None else _resolve(
            None, file_values, "n_uca_values", RING_SWEEP_DEFAULT, int)
        n_3d = _resolve(args.n_3d, file_values, "n_3d", 4, int)
        result = sweep_ring(config, tuple(int(v) for v in ring_values),
                            ucya_layers=n_3d, spacing_2d=spacing_2d,
                            spacing_3d=spacing_3d, jobs=jobs, progress=_progress)
        echo = _config_echo(config, command="sweep-ring", out=out_path, jobs=jobs,
                            spacing_2d=spacing_2d, spacing_3d=spacing_3d,
                            n_3d=n_3d,
                            n_uca_values=" ".join(str(v) for v in ring_values))
        return _finish_run(result, out_path, echo, started_at)

    if args.command == "single":
        config = _scenario_from_args(args, file_values, snr_default=10.0)
        if args.geometry == "ula":
            geom = build_ula(_resolve(args.n_ula, file_values, "n_ula", 96, int),
                             spacing_2d)
        elif args.geometry == "uca":
            geom = build_uca(_resolve(args.n_uca, file_values, "n_uca", 24, int),
                             spacing_2d)
        else:
            geom = build_ucya(_resolve(args.n_uca, file_values, "n_uca", 24, int),
                              _resolve(args.n_3d, file_values, "n_3d", 4, int),
                              spacing_2d, spacing_3d)
        single = run_single(config, geom, jobs=jobs)
        if args.dump_channels:
            _write_channel_dump(config, geom, args.dump_channels)
        rows = []
        for model in ("structured", "unstructured"):
            for method in ("OP", "SB"):
                rows.append(SweepRow(
                    sweep_var="snr_db", sweep_value=config.snr_db,
                    geometry=single.geometry_kind, model=model, method=method,
                    mean_crb=single.means[(model, method)],
                    trials_used=single.trials_used,
                    deficient_rank_trials=single.deficient_rank_trials,
                    seed=config.master_seed))
        result = SweepResult(sweep_var="snr_db", rows=tuple(rows))
        _progress(f"single geometry={single.geometry_kind} done")
        echo = _config_echo(config, command="single", out=out_path, jobs=jobs,
                            spacing_2d=spacing_2d, spacing_3d=spacing_3d,
                            geometry=args.geometry)
        return _finish_run(result, out_path, echo, started_at)

    raise ConfigError(f"unknown command {args.command!r}")


def _write_channel_dump(config: ScenarioConfig, geometry, path: str) -> None:
    """Debug export: the stacked channel vector of every trial."""
    from .channel import channel_matrix
    from .experiments import draw_trial_parameters

    lines = ["trial,coefficient_index,real,imag"]
    for trial in range(config.trials):
        params = draw_trial_parameters(config, trial)
        h = channel_matrix(params, geometry).reshape(-1)
        for idx, value in enumerate(h):
            lines.append(f"{trial},{idx},{value.real!r},{value.imag!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write channel dump to {path}: {exc}") from exc


def _config_echo(config: ScenarioConfig, **extra) -> dict:
    echo = {
        "n_tx": config.num_tx,
        "n_paths": config.num_paths,
        "k": config.num_subcarriers,
        "k_pilot": config.num_pilots,
        "k_data": config.num_data,
        "snr_db": config.snr_db,
        "trials": config.trials,
        "seed": config.master_seed,
        "derivative_convention": config.derivative_convention,
        "angle_unit": config.angle_unit,
        "pilot_kind": config.pilot_kind,
        "scalar_reduction": config.scalar_reduction,
        "crb_tolerance": config.crb_tolerance,
    }
    echo.update(extra)
    return echo


def main(argv=None) -> int:
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MimoCrbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
