"""Command-line entry point.

Subcommands: cert, simulate, sweep-umax, sweep-T, doa-figure. Every option
can also come from a ``--config`` file of ``key = value`` lines grouped under
any ``[section]`` headers; explicit flags win over the file.

Exit codes: 0 success, 2 configuration error, 3 every run diverged.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys
from pathlib import Path

from . import experiments as ex
from . import plots
from .core import DomainError, FxtsGains

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

log = logging.getLogger("fxts")


class ConfigError(ValueError):
    pass


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(t) for t in text)
    parts = str(text).replace(",", " ").split()
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> parser; flags are the same names with '-' for '_'
KEYS = {
    "model": str,
    "x0": _floats,
    "mu": float,
    "p_u": _floats,
    "p1": float,
    "q1": float,
    "t_bar": float,
    "u_max": float,
    "t_bar_list": _floats,
    "u_max_list": _floats,
    "dt": float,
    "t_end": float,
    "post_entry_horizon": float,
    "out": str,
    "k": float,
    "workers": int,
    "controlled": _bool,
    "alpha1": float,
    "alpha2": float,
    "delta1": float,
    "v0": float,
    "format": str,
    "r_m_list": _floats,
}

CERT_DEFAULTS = {"alpha1": 1.0, "alpha2": 1.0, "delta1": 0.0, "format": "text"}
DOA_DEFAULTS = {"r_m_list": (1.0, 1.25, 1.5, 2.0, 3.0, 5.0)}


def read_config(path: str | Path) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = {}
    for section in parser.sections():
        for raw_key, raw in parser.items(section):
            key = raw_key.replace("-", "_")
            if key not in KEYS:
                raise ConfigError(f"unknown config key {raw_key!r} in [{section}]")
            try:
                values[key] = KEYS[key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {raw_key!r}: {exc}") from exc
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file; flags override it")
    common.add_argument("-v", "--verbose", action="store_true")
    for key, conv in KEYS.items():
        flag = "--" + key.replace("_", "-")
        if conv is _bool:
            continue
        common.add_argument(flag, dest=key, default=None, type=str, metavar=key.upper())
    common.add_argument("--open-loop", dest="controlled", action="store_const", const=False, default=None,
                        help="disable the controller (u = 0)")

    parser = argparse.ArgumentParser(prog="fxts", description="Fixed-time stability certificates and CLF-QP experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cert", parents=[common], help="report regime, domain and settling-time bound")
    sub.add_parser("simulate", parents=[common], help="simulate one closed-loop run")
    sub.add_parser("sweep-umax", parents=[common], help="sweep the input bound at fixed T_bar")
    sub.add_parser("sweep-T", parents=[common], help="sweep the time budget at fixed u_max")
    sub.add_parser("doa-figure", parents=[common], help="domain-of-attraction boundaries for several r_M")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge config file values with explicit flags (flags win)."""
    values = read_config(args.config) if args.config else {}
    for key, conv in KEYS.items():
        raw = getattr(args, key, None)
        if raw is None:
            continue
        try:
            values[key] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for --{key.replace('_', '-')}: {exc}") from exc
    return values


def experiment_config(values: dict) -> ex.ExperimentConfig:
    fields = {f.name for f in dataclasses.fields(ex.ExperimentConfig)}
    kwargs = {k: v for k, v in values.items() if k in fields}
    try:
        return ex.ExperimentConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_cert(values: dict) -> int:
    merged = {**CERT_DEFAULTS, **values}
    try:
        gains = FxtsGains(merged["alpha1"], merged["alpha2"], merged["delta1"], merged.get("mu", 2.0))
        report = ex.cert_report(gains, merged.get("k", ex.cert.DEFAULT_K), merged.get("v0"))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    style = merged["format"]
    if style not in ("text", "csv"):
        raise ConfigError(f"format must be text or csv, got {style!r}")
    sys.stdout.write(ex.format_cert_report(report, style))
    return EXIT_OK


def cmd_simulate(values: dict) -> int:
    config = experiment_config(values)
    res = ex.run_case(config)
    out = Path(config.out)
    tag = ex.trajectory_tag(res) if config.controlled else "open_loop"
    ex.write_trajectory_csv(out / f"trajectory_{tag}.csv", res.trajectory)
    plots.trajectory_figure(out / f"trajectory_{tag}.svg", res.trajectory)
    print(ex.closed_loop_summary(res, config.k))
    for note in res.trajectory.notes:
        print(note)
    return EXIT_DIVERGED if res.diverged else EXIT_OK


def _finish_sweep(results, config, key, columns, name, xlabel) -> int:
    out = Path(config.out)
    rows = ex.sweep_rows(results, key)
    ex.write_csv(out / f"{name}.csv", columns, rows)
    ok = [r for r in rows if not r["diverged"]]
    plots.line_chart(out / f"{name}.svg", [r[key] for r in ok], [r["max_delta1"] for r in ok], xlabel, "max delta1*")
    value_key = "u_max" if key == "u_max" else "t_bar"
    plots.input_traces(
        out / f"{name}_inputs.svg",
        [(getattr(r, value_key), r.trajectory.times, r.trajectory.inputs) for r in results],
        label=xlabel,
    )
    for r in rows:
        print(", ".join(f"{c}={ex.fmt(r[c])}" for c in columns))
    if rows and all(r["diverged"] for r in rows):
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_sweep_umax(values: dict) -> int:
    config = experiment_config(values)
    results = ex.sweep_umax(config)
    return _finish_sweep(results, config, "u_max", ex.SWEEP_UMAX_COLUMNS, "sweep_umax", "u_max")


def cmd_sweep_T(values: dict) -> int:
    config = experiment_config(values)
    results = ex.sweep_T(config)
    return _finish_sweep(results, config, "T_bar", ex.SWEEP_T_COLUMNS, "sweep_T", "T_bar")


def cmd_doa_figure(values: dict) -> int:
    r_m_list = values.get("r_m_list", DOA_DEFAULTS["r_m_list"])
    mu = values.get("mu", 2.0)
    try:
        radii = ex.doa_radii(r_m_list, mu)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(values.get("out", "out"))
    plots.doa_circles(out / "doa.svg", r_m_list, radii)
    for r_m, rad in zip(r_m_list, radii):
        print(f"r_M={ex.fmt(r_m)} radius={ex.fmt(rad)} level={ex.fmt(rad * rad)}")
    return EXIT_OK


COMMANDS = {
    "cert": cmd_cert,
    "simulate": cmd_simulate,
    "sweep-umax": cmd_sweep_umax,
    "sweep-T": cmd_sweep_T,
    "doa-figure": cmd_doa_figure,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        values = resolve(args)
        return COMMANDS[args.command](values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

