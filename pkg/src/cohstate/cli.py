"""Batch front-end: parse a run configuration, dispatch, emit reports.

One invocation runs one command against one configuration file and writes
its artifacts under the output directory. The JSON report is byte-stable
for a fixed config and artifact version; timing appears only in the
human-readable summary.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULT_TOL, Tolerances
from .dynamics import HamiltonianSchedule, SectionChart, van_hove_check
from .errors import DOMAIN_ERRORS, CohstateError, ParseError, ValidationError
from .family import FiducialVector, classify_informative, preset_fiducial
from .liealg import (
    build_spin_rep,
    exactness_orders,
    haar_quadrature,
    load_generator_file,
)
from .pathint import dirac_check, discrete_propagator, identity_resolution

__all__ = ["RunConfig", "Report", "parse_config", "run", "main"]

COMMANDS = ("analyze", "evolve", "identity", "berry", "pathint")

_TOP_KEYS = {"command", "rep", "fiducial", "params", "tolerances"}
_PARAM_KEYS = {
    "analyze": set(),
    "evolve": {"schedule", "segments", "dt", "t_final",
               "initial_theta", "initial_phi", "chart"},
    "identity": {"orders"},
    "berry": {"theta_min", "theta_max", "n_theta"},
    "pathint": {"h", "t_final", "n_values", "kernel", "orders"},
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    rep: object
    fiducial: FiducialVector
    params: dict
    tolerances: Tolerances
    echo: dict
    base_dir: Path


@dataclass(frozen=True)
class Report:
    command: str
    config_echo: dict
    payload: dict
    tolerances: Tolerances
    wall_time_s: float
    extra_files: tuple = ()
    table: str = ""

    def to_json_dict(self):
        """Deterministic report body; wall time deliberately excluded."""
        return {
            "artifact_version": __version__,
            "command": self.command,
            "config": self.config_echo,
            "tolerances": self.tolerances.as_dict(),
            "result": self.payload,
        }

    def to_json_bytes(self):
        doc = _sanitize(self.to_json_dict())
        return (json.dumps(doc, sort_keys=True, separators=(",", ": "),
                           indent=2, allow_nan=False) + "\n").encode()

    def summary_lines(self):
        lines = [f"command: {self.command}",
                 f"artifact version: {__version__}"]
        for key in sorted(self.payload):
            val = self.payload[key]
            if isinstance(val, (dict, list)):
                continue
            lines.append(f"  {key}: {val}")
        if self.table:
            lines.append(self.table)
        lines.append(f"wall time: {self.wall_time_s:.3f} s")
        return lines


def _sanitize(obj):
    """Round-trippable JSON: NaN/inf become null, numpy scalars native."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _parse_spin(text):
    num, _, den = str(text).partition("/")
    try:
        return float(num) / float(den) if den else float(num)
    except ValueError:
        raise ValidationError("spin must be a number or a fraction string",
                              got=text) from None


def parse_config(path, cli_command=None):
    """Parse and validate a run configuration file.

    Unknown keys are hard parse errors; all other constraint violations
    are collected and reported together in one VALIDATION_ERROR.
    """
    path = Path(path)
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError("invalid JSON in config", path=str(path),
                             line=exc.lineno, column=exc.colno) from exc
    if not isinstance(doc, dict):
        raise ParseError("config must be a JSON object", path=str(path))
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ParseError("unknown config key", key=unknown[0],
                         allowed=sorted(_TOP_KEYS))

    problems = []
    command = doc.get("command")
    if command not in COMMANDS:
        problems.append(f"command must be one of {list(COMMANDS)}, got {command!r}")
    if cli_command is not None and command is not None and command != cli_command:
        problems.append(f"config command {command!r} does not match the "
                        f"invoked command {cli_command!r}")

    tol = DEFAULT_TOL
    tol_doc = doc.get("tolerances", {})
    if not isinstance(tol_doc, dict):
        problems.append("tolerances must be an object")
    else:
        unknown_tol = sorted(set(tol_doc) - set(DEFAULT_TOL.as_dict()))
        if unknown_tol:
            raise ParseError("unknown tolerance key", key=unknown_tol[0])
        bad = [k for k, v in tol_doc.items()
               if not isinstance(v, (int, float)) or not v > 0]
        if bad:
            problems.append(f"tolerances must be positive numbers: {bad}")
        else:
            tol = DEFAULT_TOL.replace(**{k: float(v) for k, v in tol_doc.items()})

    base = path.parent
    rep = None
    rep_spec = doc.get("rep")
    if isinstance(rep_spec, dict) and set(rep_spec) == {"spin"}:
        try:
            rep = build_spin_rep(_parse_spin(rep_spec["spin"]), tol=tol)
        except (ValidationError, ValueError) as exc:
            problems.append(f"rep: {exc}")
    elif isinstance(rep_spec, dict) and set(rep_spec) == {"generator_file"}:
        try:
            rep = load_generator_file(base / rep_spec["generator_file"], tol=tol)
        except FileNotFoundError:
            problems.append(f"rep: generator file not found: "
                            f"{rep_spec['generator_file']}")
        except CohstateError as exc:
            problems.append(f"rep: {exc}")
    else:
        problems.append("rep must be {'spin': j} or {'generator_file': path}")

    fiducial = None
    fid_spec = doc.get("fiducial")
    if rep is not None and isinstance(fid_spec, dict) and set(fid_spec) == {"preset"}:
        try:
            fiducial = preset_fiducial(rep, fid_spec["preset"])
        except ValidationError as exc:
            problems.append(f"fiducial: {exc}")
    elif (rep is not None and isinstance(fid_spec, dict)
            and set(fid_spec) == {"amplitudes"}):
        arr = np.asarray(fid_spec["amplitudes"], dtype=float)
        if arr.ndim != 2 or arr.shape != (rep.d, 2):
            problems.append("fiducial amplitudes must be d pairs of [re, im]")
        else:
            try:
                fiducial = FiducialVector.normalized(arr[:, 0] + 1j * arr[:, 1],
                                                     rep.label, tol)
            except CohstateError as exc:
                problems.append(f"fiducial: {exc}")
    elif rep is not None:
        problems.append("fiducial must be {'preset': name} or "
                        "{'amplitudes': [[re, im], ...]}")

    params = doc.get("params", {})
    if not isinstance(params, dict):
        problems.append("params must be an object")
        params = {}
    elif command in _PARAM_KEYS:
        unknown_par = sorted(set(params) - _PARAM_KEYS[command])
        if unknown_par:
            raise ParseError("unknown parameter key", key=unknown_par[0],
                             command=command,
                             allowed=sorted(_PARAM_KEYS[command]))
        problems += _check_params(command, params)

    if problems:
        raise ValidationError("config violates constraints",
                              violations=problems, path=str(path))
    return RunConfig(command=command, rep=rep, fiducial=fiducial, params=params,
                     tolerances=tol, echo=doc, base_dir=base)


def _check_params(command, params):
    problems = []

    def positive(key, required=False, integer=False):
        if key not in params:
            if required:
                problems.append(f"params.{key} is required for {command}")
            return
        v = params[key]
        ok = isinstance(v, (int, float)) and v > 0
        if integer:
            ok = isinstance(v, int) and v > 0
        if not ok:
            problems.append(f"params.{key} must be a positive "
                            f"{'integer' if integer else 'number'}, got {v!r}")

    if command == "evolve":
        positive("dt", required=True)
        positive("t_final")
        has_sched = ("schedule" in params) + ("segments" in params)
        if has_sched != 1:
            problems.append("exactly one of params.schedule or params.segments "
                            "is required for evolve")
        if params.get("chart", "north") not in ("north", "south"):
            problems.append("params.chart must be 'north' or 'south'")
        for key in ("initial_theta", "initial_phi"):
            if key in params and not isinstance(params[key], (int, float)):
                problems.append(f"params.{key} must be a number")
    elif command == "identity":
        orders = params.get("orders")
        if orders is not None and (
                not isinstance(orders, list) or len(orders) != 3
                or not all(isinstance(o, int) and o >= 1 for o in orders)):
            problems.append("params.orders must be three integers >= 1")
    elif command == "berry":
        positive("n_theta", integer=True)
        for key in ("theta_min", "theta_max"):
            if key in params and not isinstance(params[key], (int, float)):
                problems.append(f"params.{key} must be a number")
    elif command == "pathint":
        if not isinstance(params.get("h"), list) or not params["h"] or \
                not all(isinstance(x, (int, float)) for x in params["h"]):
            problems.append("params.h must be a list of numbers")
        positive("t_final")
        nv = params.get("n_values", [1, 2, 4, 8])
        if not isinstance(nv, list) or not nv or \
                not all(isinstance(n, int) and n >= 1 for n in nv):
            problems.append("params.n_values must be a list of integers >= 1")
        if params.get("kernel", "exact") not in ("exact", "first-order"):
            problems.append("params.kernel must be 'exact' or 'first-order'")
    return problems


def _quadrature(config):
    rep = config.rep
    rep.require_spin(config.command)
    orders = config.params.get("orders") or exactness_orders(rep.spin)
    return haar_quadrature(rep, *orders)


def _run_analyze(config):
    report = classify_informative(config.rep, config.fiducial)
    dim_state, dim_moment = report.dims
    return {
        "mu": [float(x) for x in report.mu.mu],
        "mu_norm": float(report.mu.norm),
        "dim_state_isotropy": dim_state,
        "dim_moment_isotropy": dim_moment,
        "containment_ok": report.containment_ok,
        "informative": report.informative,
    }, ()


def _run_evolve(config, out_dir, fmt):
    params = config.params
    if "segments" in params:
        schedule = HamiltonianSchedule.from_segments(params["segments"])
    else:
        schedule = HamiltonianSchedule.from_json_file(
            config.base_dir / params["schedule"])
    chart = SectionChart(chart_id=params.get("chart", "north"),
                         delta=config.tolerances.chart_delta)
    record = van_hove_check(
        config.rep, config.fiducial, schedule,
        t_final=params.get("t_final"), dt=params["dt"],
        initial_theta=params.get("initial_theta", 0.0),
        initial_phi=params.get("initial_phi", 0.0), chart=chart)

    files = ["trajectory.jsonl"]
    record.write_jsonl(out_dir / "trajectory.jsonl")
    if fmt == "csv":
        record.write_csv(out_dir / "trajectory.csv")
        files.append("trajectory.csv")
    payload = {
        "n_points": int(record.times.size),
        "t_start": float(record.times[0]),
        "t_final": float(record.times[-1]),
        "dt": float(params["dt"]),
        "chart": chart.chart_id,
        "initial_theta": float(params.get("initial_theta", 0.0)),
        "initial_phi": float(params.get("initial_phi", 0.0)),
        "max_fidelity_deficit": max(0.0, float(np.max(1.0 - record.fidelity))),
        "min_fidelity": float(np.min(record.fidelity)),
        "max_abs_phase_residual": float(np.max(np.abs(record.phase_residual))),
        "final_action": float(record.action[-1]),
        "trajectory_files": files,
    }
    return payload, tuple(files)


def _run_identity(config):
    quad = _quadrature(config)
    result = identity_resolution(config.rep, config.fiducial, quad)
    return result.as_dict(), ()


def _run_berry(config):
    params = config.params
    theta_grid = None
    if params:
        theta_grid = np.linspace(params.get("theta_min", 0.1),
                                 params.get("theta_max", 2.5),
                                 params.get("n_theta", 25))
    verdict = dirac_check(config.rep, config.fiducial, theta_grid=theta_grid)
    payload = verdict.as_dict()
    payload["mu3"] = verdict.profile.mu3
    payload["samples"] = {
        "theta": [float(x) for x in verdict.profile.theta_grid],
        "connection": [float(x) for x in verdict.profile.a_phi],
    }
    return payload, ()


def _run_pathint(config):
    params = config.params
    quad = _quadrature(config)
    schedule = HamiltonianSchedule.constant(
        np.asarray(params["h"], dtype=float), params.get("t_final", 1.0))
    record = discrete_propagator(
        config.rep, config.fiducial, schedule,
        params.get("n_values", [1, 2, 4, 8]), quad,
        kernel_mode=params.get("kernel", "exact"))
    payload = {
        "kernel": record.kernel_mode,
        "slice_counts": [int(n) for n in record.slice_counts],
        "amplitudes": [[float(a.real), float(a.imag)] for a in record.amplitudes],
        "exact_amplitude": [float(record.exact_amplitude.real),
                            float(record.exact_amplitude.imag)],
        "errors": [float(e) for e in record.errors],
        "measured_order": float(record.measured_order),
        "quad_orders": list(quad.orders),
    }
    rows = ["    N     |A_N|        arg A_N      error"]
    for n, a, e in zip(record.slice_counts, record.amplitudes, record.errors):
        rows.append(f"  {n:5d}  {abs(a):.9f}  {np.angle(a):+.9f}  {e:.3e}")
    return payload, (), "\n".join(rows)


def run(config, out_dir=".", fmt="json"):
    """Dispatch a parsed configuration and return the Report."""
    out_dir = Path(out_dir)
    started = time.perf_counter()
    table = ""
    if config.command == "analyze":
        payload, files = _run_analyze(config)
    elif config.command == "evolve":
        payload, files = _run_evolve(config, out_dir, fmt)
    elif config.command == "identity":
        payload, files = _run_identity(config)
    elif config.command == "berry":
        payload, files = _run_berry(config)
    elif config.command == "pathint":
        payload, files, table = _run_pathint(config)
    else:
        raise ValidationError("unknown command", command=config.command)
    return Report(command=config.command, config_echo=config.echo,
                  payload=payload, tolerances=config.tolerances,
                  wall_time_s=time.perf_counter() - started,
                  extra_files=files, table=table)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # Usage errors are exit code 1; argparse defaults to 2, which this
        # artifact reserves for domain errors.
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def main(argv=None):
    parser = _Parser(prog="cohstate",
                     description="Coherent-state family analysis tools")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=".")
    parser.add_argument("--format", choices=("json", "csv", "text"),
                        default="json")
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config, cli_command=args.command)
    except FileNotFoundError as exc:
        print(f"error[CONFIG_NOT_FOUND]: {exc}", file=sys.stderr)
        return 1
    except CohstateError as exc:
        print(f"error[{exc.code}] in parse_config: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        report = run(config, out_dir=out_dir, fmt=args.format)
    except DOMAIN_ERRORS as exc:
        print(f"error[{exc.code}] in {config.command}: {exc}", file=sys.stderr)
        return 2
    except CohstateError as exc:
        print(f"error[{exc.code}] in {config.command}: {exc}", file=sys.stderr)
        return 1

    (out_dir / "report.json").write_bytes(report.to_json_bytes())
    summary = "\n".join(report.summary_lines())
    if args.format == "text":
        (out_dir / "report.txt").write_text(summary + "\n")
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
