"""Command-line front end: run scenarios, write tables and a manifest.

Output units follow the figure-axis conventions: time in us, frequencies
as omega/2pi in kHz, phase-space quantities dimensionless.  Every run
directory receives a manifest.json with the resolved config, tool version,
timestamps, a check summary, and content digests of the written files.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, WeylSimError
from .evolve import TimeGrid
from .fockspace import SpaceSpec
from .model import SimParams
from .scenarios import (
    RUNNERS,
    SCENARIO_NAMES,
    ScenarioConfig,
    ScenarioResult,
    config_dict,
    default_config,
)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_tau(text: str) -> float:
    value = float(text)  # float("inf") handles the noiseless sentinel
    return value


def _parse_sweep(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


# key -> parser; every key is optional and overrides the scenario default
_SCHEMA = {
    "omega_khz": float,
    "omega_probe_khz": float,
    "r": float,
    "tau_d_x_ms": _parse_tau,
    "tau_d_y_ms": _parse_tau,
    "n_max_x": int,
    "n_max_y": int,
    "t_start_us": float,
    "t_end_us": float,
    "n_samples": int,
    "dt_max_us": float,
    "noise": _parse_bool,
    "initial_spin": str,
    "alpha_x": complex,
    "alpha_y": complex,
    "sweep": _parse_sweep,
}


def load_config(path, name: str) -> ScenarioConfig:
    """Resolve a scenario config from an INI-style file.

    The file holds one optional section per scenario; keys are listed in
    the schema above.  An empty or absent section yields the scenario's
    defaults.  Unknown sections or keys are errors.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc

    unknown = set(parser.sections()) - set(SCENARIO_NAMES)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    overrides = {}
    if parser.has_section(name):
        for key, raw in parser.items(name):
            if key not in _SCHEMA:
                raise ConfigError(f"unknown key [{name}] {key}")
            try:
                overrides[key] = _SCHEMA[key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for [{name}] {key}: {exc}") from exc
    return build_config(name, overrides)


def build_config(name: str, overrides: dict) -> ScenarioConfig:
    """Apply schema-level overrides on top of a scenario's defaults."""
    if name not in SCENARIO_NAMES:
        raise ConfigError(f"unknown scenario {name!r}")
    noise = overrides.get("noise")
    n_max = overrides.get("n_max_x")
    base = default_config(name, n_max=n_max, noise_on=noise)

    omega_khz = overrides.get("omega_khz", base.params.omega / (2 * math.pi))
    probe_khz = overrides.get("omega_probe_khz", base.params.omega_probe / (2 * math.pi))
    try:
        params = SimParams.from_khz(
            omega_khz,
            r=overrides.get("r", base.params.r),
            omega_probe_khz=probe_khz,
            tau_d_x=overrides.get("tau_d_x_ms", base.params.tau_d_x),
            tau_d_y=overrides.get("tau_d_y_ms", base.params.tau_d_y),
        )
        space = SpaceSpec(
            overrides.get("n_max_x", base.space.n_max_x),
            overrides.get("n_max_y", base.space.n_max_y),
        )
        grid = base.grid
        grid_keys = {"t_start_us", "t_end_us", "n_samples", "dt_max_us"}
        if grid is not None and grid_keys & overrides.keys():
            grid = TimeGrid(
                overrides.get("t_start_us", grid.t_start * 1e3) / 1e3,
                overrides.get("t_end_us", grid.t_end * 1e3) / 1e3,
                overrides.get("n_samples", grid.n_samples),
                overrides.get("dt_max_us", grid.dt_max * 1e3) / 1e3,
            )
        return ScenarioConfig(
            name=name,
            params=params,
            space=space,
            grid=grid,
            sweep=overrides.get("sweep", base.sweep),
            initial_spin=overrides.get("initial_spin", base.initial_spin),
            alpha_x=overrides.get("alpha_x", base.alpha_x),
            alpha_y=overrides.get("alpha_y", base.alpha_y),
            noise_on=noise if noise is not None else base.noise_on,
        )
    except WeylSimError as exc:
        raise ConfigError(f"invalid configuration for {name}: {exc}") from exc


def dump_config(cfg: ScenarioConfig) -> str:
    """INI text of a fully resolved config; load_config round-trips it."""
    d = config_dict(cfg)
    lines = [f"[{cfg.name}]"]
    key_map = {
        "omega_khz": "omega_khz",
        "omega_probe_khz": "omega_probe_khz",
        "r": "r",
        "tau_d_x_ms": "tau_d_x_ms",
        "tau_d_y_ms": "tau_d_y_ms",
        "n_max_x": "n_max_x",
        "n_max_y": "n_max_y",
        "t_start_us": "t_start_us",
        "t_end_us": "t_end_us",
        "n_samples": "n_samples",
        "dt_max_us": "dt_max_us",
        "noise_on": "noise",
        "initial_spin": "initial_spin",
        "alpha_x": "alpha_x",
        "alpha_y": "alpha_y",
        "sweep": "sweep",
    }
    for src, dst in key_map.items():
        if src not in d:
            continue
        value = d[src]
        if isinstance(value, list):
            value = ", ".join(f"{v:.9g}" for v in value)
        elif isinstance(value, float):
            value = f"{value:.12g}"
        lines.append(f"{dst} = {value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# output writing
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def _json_float(value) -> float | str:
    """Strict-JSON float; non-finite values become strings."""
    v = float(value)
    return v if math.isfinite(v) else str(v)


def _atomic_write(path: Path, data: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(columns: dict[str, np.ndarray]) -> str:
    names = list(columns)
    rows = [", ".join(names)]
    length = len(next(iter(columns.values()))) if columns else 0
    for i in range(length):
        rows.append(", ".join(_fmt(float(columns[n][i])) for n in names))
    return "\n".join(rows) + "\n"


def _check_rows(result: ScenarioResult) -> list[dict]:
    return [
        {
            "name": c.name,
            "expected": c.expected,
            "actual": c.actual,
            "tolerance": c.tolerance,
            "passed": c.passed,
            "basis": c.basis,
        }
        for c in result.checks
    ]


def write_tables(result: ScenarioResult, out_dir, fmt: str = "csv") -> list[Path]:
    """Write the result tables plus manifest.json into a directory.

    csv: one file per table, 9-significant-digit floats, '\\n' newlines.
    json: a single result.json with columnar arrays and the check list.
    Files are written to a temp name and atomically renamed; the manifest
    records a sha256 digest of every data file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if fmt == "csv":
        for tname, columns in result.tables.items():
            path = out / f"{tname}.csv"
            _atomic_write(path, _csv_text(columns))
            written.append(path)
        path = out / "checks.csv"
        lines = ["name, expected, actual, tolerance, passed, basis"]
        for c in result.checks:
            lines.append(
                f"{c.name}, {c.expected}, {c.actual}, {c.tolerance}, "
                f"{c.passed}, {c.basis}"
            )
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)
    elif fmt == "json":
        payload = {
            "scenario": result.name,
            "tables": {
                t: {k: [_json_float(v) for v in col] for k, col in cols.items()}
                for t, cols in result.tables.items()
            },
            "checks": _check_rows(result),
        }
        path = out / "result.json"
        _atomic_write(path, json.dumps(payload, indent=1) + "\n")
        written.append(path)
    else:
        raise ConfigError(f"unknown output format {fmt!r}")

    manifest = dict(result.manifest)
    manifest["files"] = [
        {
            "name": p.name,
            "sha256": hashlib.sha256(p.read_bytes()).hexdigest(),
        }
        for p in written
    ]
    manifest["checks"] = _check_rows(result)
    mpath = out / "manifest.json"
    _atomic_write(mpath, json.dumps(manifest, indent=1) + "\n")
    written.append(mpath)
    return written


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weylsim",
        description="run the bundled scenarios and write plot-ready tables",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "scenario",
        choices=SCENARIO_NAMES + ("all",),
        help="scenario to run, or 'all'",
    )
    parser.add_argument("--config", type=Path, help="INI config file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument(
        "--no-noise", action="store_true", help="disable the dephasing channel"
    )
    parser.add_argument("--n-max", type=int, help="truncation for both modes")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--quiet", action="store_true", help="suppress check lines")
    return parser


def _resolve(name: str, args) -> ScenarioConfig:
    if args.config is not None:
        cfg = load_config(args.config, name)
    else:
        cfg = build_config(name, {})
    overrides = {}
    if args.no_noise:
        overrides["noise"] = False
    if args.n_max is not None:
        overrides["n_max_x"] = args.n_max
        overrides["n_max_y"] = args.n_max
    if overrides:
        merged = _config_overrides(cfg) | overrides
        cfg = build_config(name, merged)
    return cfg


def _config_overrides(cfg: ScenarioConfig) -> dict:
    """Express a resolved config as a full override map."""
    d = config_dict(cfg)
    out = {
        "omega_khz": d["omega_khz"],
        "omega_probe_khz": d["omega_probe_khz"],
        "r": d["r"],
        "tau_d_x_ms": float(d["tau_d_x_ms"]),
        "tau_d_y_ms": float(d["tau_d_y_ms"]),
        "n_max_x": d["n_max_x"],
        "n_max_y": d["n_max_y"],
        "noise": d["noise_on"],
        "initial_spin": d["initial_spin"],
        "alpha_x": complex(d["alpha_x"]),
        "alpha_y": complex(d["alpha_y"]),
    }
    if "t_end_us" in d:
        out.update(
            t_start_us=d["t_start_us"],
            t_end_us=d["t_end_us"],
            n_samples=d["n_samples"],
            dt_max_us=d["dt_max_us"],
        )
    if "sweep" in d:
        out["sweep"] = tuple(d["sweep"])
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    names = list(SCENARIO_NAMES) if args.scenario == "all" else [args.scenario]

    try:
        configs = {name: _resolve(name, args) for name in names}
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    all_passed = True
    try:
        for name in names:
            result = RUNNERS[name](configs[name])
            out_dir = args.out / name if args.scenario == "all" else args.out
            write_tables(result, out_dir, args.format)
            for c in result.checks:
                all_passed &= c.passed
                if not args.quiet:
                    mark = "PASS" if c.passed else "FAIL"
                    print(
                        f"[{name}] {mark} {c.name}: expected {c.expected} "
                        f"got {c.actual} (tol {c.tolerance}, {c.basis})"
                    )
            if not args.quiet:
                print(f"[{name}] wrote {out_dir} in {result.manifest['wall_time_s']}s")
    except WeylSimError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 0 if all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
