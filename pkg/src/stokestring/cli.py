"""Command surface: run / diagnose / verify, config parsing, file output.

Config files are line-oriented `key = value` text; '#' starts a comment.
Keys: n, dt, t_final, scheme, dealias, output_every, preset, c1, c3,
lambda, B, s_op, epsilon, mode_k, seed, out_dir.  Unknown keys are errors;
missing keys take the documented defaults (n=256, dt=1e-3, t_final=1.0,
scheme=imex-euler, dealias=true, output_every=10, preset=equilibrium,
c1=c3=1, lambda=0, B=0, s_op=0, epsilon=0.01, mode_k=2, seed=0,
out_dir=out).

Outputs per run, all bit-stable for a fixed config and code version:
  timeseries.csv      one diagnostics row per output step
  snapshot_<k>.csv    state dump at step k (first and last step)
  manifest.txt        config echo, code version, wall times, termination
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import spectral as sp
from .backend import BACKEND
from .diagnostics import CSV_HEADER, build_record
from .dynamics import SimConfig, SimResult, run_simulation
from .errors import ConfigError, StokestringError
from .geometry import (CurveState, ForceParams, equilibrium_state,
                       normalize_initial_data)

_DEFAULTS = {
    "n": 256, "dt": 1e-3, "t_final": 1.0, "scheme": "imex-euler",
    "dealias": True, "output_every": 10, "preset": "equilibrium",
    "c1": 1.0, "c3": 1.0, "lambda": 0.0, "B": 0.0, "s_op": 0.0,
    "epsilon": 0.01, "mode_k": 2, "seed": 0, "out_dir": "out",
}

_INT_KEYS = {"n", "output_every", "mode_k", "seed"}
_FLOAT_KEYS = {"dt", "t_final", "c1", "c3", "lambda", "B", "s_op", "epsilon"}
_STR_KEYS = {"scheme", "preset", "out_dir"}
_BOOL_KEYS = {"dealias"}

PRESETS = ("equilibrium", "theta-mode", "y-mode", "mixed", "random")


def _parse_value(key, raw, lineno):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value {raw!r} for key {key!r}")


def parse_config_text(text: str) -> SimConfig:
    values = dict(_DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, raw, lineno)
    params = ForceParams(c1=values["c1"], c3=values["c3"], lam=values["lambda"],
                         B=values["B"], s_op=values["s_op"])
    if values["preset"] not in PRESETS:
        raise ConfigError(f"unknown preset {values['preset']!r}")
    try:
        return SimConfig(
            n=values["n"], dt=values["dt"], t_final=values["t_final"],
            scheme=values["scheme"], dealias=values["dealias"],
            output_every=values["output_every"], preset=values["preset"],
            params=params, epsilon=values["epsilon"], mode_k=values["mode_k"],
            seed=values["seed"], out_dir=values["out_dir"])
    except ValueError as exc:
        raise ConfigError(str(exc))


def parse_config(path) -> SimConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text())


def emit_config(config: SimConfig) -> str:
    params = config.params
    pairs = [("n", config.n), ("dt", repr(config.dt)),
             ("t_final", repr(config.t_final)), ("scheme", config.scheme),
             ("dealias", "true" if config.dealias else "false"),
             ("output_every", config.output_every), ("preset", config.preset),
             ("c1", repr(params.c1)), ("c3", repr(params.c3)),
             ("lambda", repr(params.lam)), ("B", repr(params.B)),
             ("s_op", repr(params.s_op)), ("epsilon", repr(config.epsilon)),
             ("mode_k", config.mode_k), ("seed", config.seed),
             ("out_dir", config.out_dir)]
    return "".join(f"{k} = {v}\n" for k, v in pairs)


# ----------------------------------------------------------------------
# presets
# ----------------------------------------------------------------------

def preset_state(name: str, config: SimConfig) -> CurveState:
    """Initial data for the named experiment, normalized to area pi."""
    n, eps, k = config.n, config.epsilon, config.mode_k
    alpha = sp.grid_points(n)
    sgrid = sp.grid_points(n)
    if name == "equilibrium":
        return equilibrium_state(n)
    if name == "theta-mode":
        return normalize_initial_data(alpha + eps * np.sin(k * alpha), np.zeros(n))
    if name == "y-mode":
        return normalize_initial_data(alpha, eps * np.sin(k * sgrid))
    if name == "mixed":
        return normalize_initial_data(alpha + eps * np.sin(k * alpha),
                                      eps * np.sin(k * sgrid))
    if name == "random":
        rng = np.random.default_rng(config.seed)
        modes = np.arange(1, 6)
        def band(x):
            amps = rng.standard_normal(modes.size)
            phases = rng.uniform(0, 2 * np.pi, modes.size)
            field = np.sum(amps[:, None] * np.sin(modes[:, None] * x
                                                  + phases[:, None]), axis=0)
            return field / max(1e-30, np.max(np.abs(field)))
        return normalize_initial_data(alpha + eps * band(alpha),
                                      eps * band(sgrid))
    raise ConfigError(f"unknown preset {name!r}")


# ----------------------------------------------------------------------
# output files
# ----------------------------------------------------------------------

def write_snapshot(path, step: int, state: CurveState):
    lines = [
        f"# t = {float(state.time)!r}",
        f"# s = {float(state.perim)!r}",
        f"# theta_mean = {float(state.theta_mean)!r}",
        f"# base_point = {float(state.base_point[0])!r} "
        f"{float(state.base_point[1])!r}",
        "alpha,D,y_s",
    ]
    alpha = sp.grid_points(state.n)
    osc = state.theta_osc.samples
    ys = state.stretch.samples
    lines += [f"{alpha[j]:.17e},{osc[j]:.17e},{ys[j]:.17e}"
              for j in range(state.n)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_snapshot(path) -> CurveState:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
        elif line and not line.startswith("alpha"):
            rows.append([float(x) for x in line.split(",")])
    data = np.array(rows)
    base = np.array([float(x) for x in meta["base_point"].split()])
    # fields were stored mean free at full precision: rebuild exactly,
    # without the re-projection of make_state
    return CurveState(
        sp.SpectralField.from_samples(data[:, 1], "alpha"),
        float(meta["theta_mean"]),
        sp.SpectralField.from_samples(data[:, 2], "s"),
        float(meta["s"]), base, float(meta["t"]))


def emit_outputs(result: SimResult, config: SimConfig, out_dir,
                 started: float, finished: float):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [CSV_HEADER] + [rec.csv_row() for rec in result.records]
    (out / "timeseries.csv").write_text("\n".join(rows) + "\n")
    for step, state in result.snapshots:
        write_snapshot(out / f"snapshot_{step}.csv", step, state)
    manifest = [
        "[stokestring run manifest]",
        f"version = {__version__}",
        f"backend = {BACKEND}",
        f"termination = {result.termination}",
        f"message = {result.message}",
        f"steps = {result.steps}",
        f"start_walltime = {started!r}",
        f"end_walltime = {finished!r}",
        "",
        "[config]",
        emit_config(config),
    ]
    (out / "manifest.txt").write_text("\n".join(manifest))


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------

def _cmd_run(args) -> int:
    config = parse_config(args.config)
    out_dir = args.out or config.out_dir
    initial = preset_state(config.preset, config)
    started = time.time()
    result = run_simulation(initial, config)
    finished = time.time()
    emit_outputs(result, config, out_dir, started, finished)
    print(f"{result.termination}: {result.steps} steps, "
          f"{result.wall_seconds:.1f}s, outputs in {out_dir}")
    if result.termination != "completed":
        print(result.message)
        return 1
    return 0


def _cmd_diagnose(args) -> int:
    state = load_snapshot(args.snapshot)
    params = parse_config(args.config).params if args.config else ForceParams()
    rec = build_record(state, params)
    width = max(len(k) for k in vars(rec))
    for key, val in vars(rec).items():
        print(f"{key:<{width}}  {val}")
    return 0


def _cmd_verify(args) -> int:
    from .acceptance import run_all
    ok = run_all(fast=args.fast)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stokestring",
        description="Elastic closed string in 2-D Stokes flow: "
                    "pseudo-spectral boundary-integral simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output directory override")

    p_diag = sub.add_parser("diagnose", help="print diagnostics for a snapshot")
    p_diag.add_argument("--snapshot", required=True)
    p_diag.add_argument("--config", default=None,
                        help="config supplying force parameters")

    p_ver = sub.add_parser("verify", help="run the acceptance suite")
    p_ver.add_argument("--fast", action="store_true",
                       help="skip the long decay runs")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "diagnose":
            return _cmd_diagnose(args)
        return _cmd_verify(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StokestringError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
