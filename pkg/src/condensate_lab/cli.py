"""Command-line front end: JSON config in, CSV/JSON artifacts out.

    condensate-lab --config run.json [--output out/]

The config is a single JSON document; everything except the config and
output paths lives inside it, because experiment parametrizations are too
wide for flags and the config file doubles as the reproducibility record.

Commands: generate | exact | asymptotic | compare | tracer | identities |
q1rate.  Field output uses the fixed column set
x,t,re_psi,im_psi,abs_psi,method,cond_estimate sorted by (t, x); reports are
written as both JSON and CSV.  Exit codes: 0 success, 1 failed verdicts,
2 config parse error, 3 validation error, 4 I/O error.
"""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics as asym
from ._jsonfmt import dumps_canonical, fmt_num
from .exactsolver import FieldGrid, FieldSample, solve_grid
from .experiments import (ExperimentReport, convergence_sweep, identity_suite,
                          q1_rate_fit, tracer_velocity)
from .scattering import (CondensateSpec, DensitySpec, SamplerSpec,
                         galilean_boost, make_scattering_data)

__all__ = ["RunConfig", "ConfigError", "parse_config", "run_and_emit", "main"]

_COMMANDS = ("generate", "exact", "asymptotic", "compare", "tracer",
             "identities", "q1rate")

_KNOWN_KEYS = {
    "command", "a", "b", "absA", "theta", "N", "density", "sampler",
    "grid", "output", "format", "Ns", "lambda_o", "amplitude", "probes",
    "workers", "time", "boost",
}

_GRID_KEYS = {"xMin", "xMax", "xSteps", "tValues"}


class ConfigError(ValueError):
    def __init__(self, field_name: str, reason: str):
        super().__init__(f"error: {field_name}: {reason}")
        self.field_name = field_name
        self.reason = reason


@dataclass
class RunConfig:
    command: str
    spec: CondensateSpec
    grid: FieldGrid | None = None
    output: str = "out"
    format: str = "csv"
    Ns: list[int] = field(default_factory=list)
    lambda_o: complex | None = None
    amplitude: float = 1.0
    probes: list[complex] = field(default_factory=list)
    workers: int = 1
    time: float = 0.0
    boost: float = 0.0

    def to_json_dict(self) -> dict:
        doc = {
            "command": self.command,
            "a": self.spec.a,
            "b": self.spec.b,
            "N": self.spec.N,
            "density": {"kind": self.spec.density.kind,
                        "coeffs": list(self.spec.density.coeffs)},
            "sampler": {"kind": self.spec.sampler.kind,
                        "coeffs": list(self.spec.sampler.coeffs)},
            "output": self.output,
            "format": self.format,
            "workers": self.workers,
            "time": self.time,
            "boost": self.boost,
        }
        if self.grid is not None:
            doc["grid"] = {"xMin": self.grid.x_min, "xMax": self.grid.x_max,
                           "xSteps": self.grid.x_steps,
                           "tValues": list(self.grid.t_values)}
        if self.Ns:
            doc["Ns"] = list(self.Ns)
        if self.lambda_o is not None:
            doc["lambda_o"] = [self.lambda_o.real, self.lambda_o.imag]
            doc["amplitude"] = self.amplitude
        if self.probes:
            doc["probes"] = [[z.real, z.imag] for z in self.probes]
        return doc

    def to_json(self) -> str:
        return dumps_canonical(self.to_json_dict())


def parse_config(text: str) -> RunConfig:
    """Validate a JSON config document; unknown keys are rejected by name."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("json", f"invalid JSON ({exc.msg})") from exc
    if not isinstance(doc, dict):
        raise ConfigError("json", "top-level value must be an object")
    for key in doc:
        if key not in _KNOWN_KEYS:
            raise ConfigError(key, "unknown key")

    command = doc.get("command")
    if command not in _COMMANDS:
        raise ConfigError("command", f"must be one of {', '.join(_COMMANDS)}")

    # endpoint: either (a, b) or (absA, theta)
    if "a" in doc or "b" in doc:
        if "absA" in doc or "theta" in doc:
            raise ConfigError("a", "give either (a, b) or (absA, theta), not both")
        try:
            a = float(doc["a"])
            b = float(doc["b"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("a", "both a and b are required numbers") from None
    elif "absA" in doc or "theta" in doc:
        try:
            r = float(doc["absA"])
            th = float(doc["theta"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("absA", "both absA and theta are required numbers") from None
        if not 0.0 < th < math.pi / 2.0:
            raise ConfigError("theta", "must lie in (0, pi/2)")
        a, b = r * math.cos(th), r * math.sin(th)
    else:
        raise ConfigError("a", "endpoint missing: give (a, b) or (absA, theta)")
    if not (a > 0 and b > 0):
        raise ConfigError("a", "a and b must be positive")

    density = _parse_family(doc.get("density"), "density", DensitySpec, "uniform")
    sampler = _parse_family(doc.get("sampler"), "sampler", SamplerSpec, "constant")

    n = doc.get("N", 100)
    if not isinstance(n, int) or n < 0:
        raise ConfigError("N", "must be a non-negative integer")
    try:
        spec = CondensateSpec(a=a, b=b, N=n, density=density, sampler=sampler)
    except ValueError as exc:
        raise ConfigError("spec", str(exc)) from exc

    grid = None
    if "grid" in doc:
        g = doc["grid"]
        if not isinstance(g, dict):
            raise ConfigError("grid", "must be an object")
        for key in g:
            if key not in _GRID_KEYS:
                raise ConfigError(f"grid.{key}", "unknown key")
        try:
            grid = FieldGrid(float(g["xMin"]), float(g["xMax"]),
                             int(g["xSteps"]),
                             tuple(float(t) for t in g.get("tValues", (0.0,))))
        except KeyError as exc:
            raise ConfigError("grid", f"missing field {exc.args[0]}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError("grid", str(exc)) from exc
    if command in ("exact", "asymptotic", "compare", "tracer") and grid is None:
        raise ConfigError("grid", f"required for command {command!r}")

    ns = doc.get("Ns", [])
    if command == "compare":
        if (not isinstance(ns, list) or not ns
                or not all(isinstance(v, int) and v > 0 for v in ns)):
            raise ConfigError("Ns", "compare needs a non-empty list of positive integers")
    if command == "q1rate" and not ns:
        ns = [100, 200, 400, 800]

    lambda_o = None
    if "lambda_o" in doc:
        lo = doc["lambda_o"]
        if (not isinstance(lo, list) or len(lo) != 2
                or not all(isinstance(v, (int, float)) for v in lo)):
            raise ConfigError("lambda_o", "must be a [re, im] pair")
        lambda_o = complex(lo[0], lo[1])
    if command == "tracer" and lambda_o is None:
        raise ConfigError("lambda_o", "required for command 'tracer'")

    probes = []
    for i, p in enumerate(doc.get("probes", [])):
        if (not isinstance(p, list) or len(p) != 2
                or not all(isinstance(v, (int, float)) for v in p)):
            raise ConfigError(f"probes[{i}]", "must be a [re, im] pair")
        probes.append(complex(p[0], p[1]))
    if command == "q1rate" and not probes:
        probes = [2j * abs(spec.endpoint), complex(1.5 * a, 2 * b),
                  complex(-a, 3 * b)]

    fmt = doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format", "must be 'csv' or 'json'")
    workers = doc.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers", "must be a positive integer")

    amplitude = doc.get("amplitude", 1.0)
    if not isinstance(amplitude, (int, float)) or amplitude <= 0:
        raise ConfigError("amplitude", "must be a positive number")

    t0 = doc.get("time", 0.0)
    if not isinstance(t0, (int, float)):
        raise ConfigError("time", "must be a number")
    boost = doc.get("boost", 0.0)
    if not isinstance(boost, (int, float)):
        raise ConfigError("boost", "must be a number")

    return RunConfig(command=command, spec=spec, grid=grid,
                     output=str(doc.get("output", "out")), format=fmt,
                     Ns=list(ns), lambda_o=lambda_o, amplitude=float(amplitude),
                     probes=probes, workers=workers, time=float(t0),
                     boost=float(boost))


def _parse_family(node, name, cls, default_kind):
    if node is None:
        return cls()
    if not isinstance(node, dict):
        raise ConfigError(name, "must be an object with kind/coeffs")
    for key in node:
        if key not in ("kind", "coeffs"):
            raise ConfigError(f"{name}.{key}", "unknown key")
    kind = node.get("kind", default_kind)
    coeffs = node.get("coeffs", [1.0])
    if (not isinstance(coeffs, list) or not coeffs
            or not all(isinstance(v, (int, float)) for v in coeffs)):
        raise ConfigError(f"{name}.coeffs", "must be a non-empty number list")
    try:
        return cls(kind=kind, coeffs=tuple(float(c) for c in coeffs))
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from exc


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _field_csv(samples: list[FieldSample]) -> str:
    lines = ["x,t,re_psi,im_psi,abs_psi,method,cond_estimate"]
    for s in sorted(samples, key=lambda s: (s.t, s.x)):
        cond = "" if s.cond_estimate is None else fmt_num(s.cond_estimate)
        lines.append(",".join([
            fmt_num(s.x), fmt_num(s.t),
            fmt_num(float(np.real(s.psi))), fmt_num(float(np.imag(s.psi))),
            fmt_num(float(abs(s.psi))), s.method, cond,
        ]))
    return "\n".join(lines) + "\n"


def _field_json(samples: list[FieldSample]) -> str:
    rows = [{"x": s.x, "t": s.t,
             "re_psi": float(np.real(s.psi)), "im_psi": float(np.imag(s.psi)),
             "abs_psi": float(abs(s.psi)), "method": s.method,
             "cond_estimate": s.cond_estimate}
            for s in sorted(samples, key=lambda s: (s.t, s.x))]
    return dumps_canonical(rows, indent=2) + "\n"


def run_and_emit(config: RunConfig) -> int:
    """Dispatch a validated config; returns the process exit code."""
    out_dir = Path(config.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = int(os.environ.get("CONDENSATE_WORKERS", config.workers))

    def write(name: str, text: str) -> Path:
        path = out_dir / name
        path.write_text(text, encoding="utf-8", newline="\n")
        return path

    report: ExperimentReport | None = None
    artifact: Path

    if config.command == "generate":
        data = make_scattering_data(config.spec, t=config.time)
        if config.boost:
            data = galilean_boost(data, config.boost)
        artifact = write("scattering.json", data.to_json() + "\n")
    elif config.command in ("exact", "asymptotic"):
        if config.command == "exact":
            data = make_scattering_data(config.spec, t=config.time)
            if config.boost:
                data = galilean_boost(data, config.boost)
            samples = solve_grid(data, config.grid, workers=workers)
        else:
            cache = asym.build_cache(config.spec)
            samples = [
                FieldSample(x=x, t=t,
                            psi=asym.psi_leading_order(cache, x, t, config.spec.N),
                            method="asymptotic")
                for t in config.grid.t_values for x in config.grid.xs()
            ]
        if config.format == "csv":
            artifact = write("field.csv", _field_csv(samples))
        else:
            artifact = write("field.json", _field_json(samples))
        n_failed = sum(1 for s in samples if s.failed)
        if n_failed:
            print(f"warn: {n_failed} grid points failed", file=sys.stderr)
    elif config.command == "compare":
        report = convergence_sweep(config.spec, config.Ns, config.grid,
                                   workers=workers)
    elif config.command == "tracer":
        report = tracer_velocity(config.spec, config.lambda_o, config.amplitude,
                                 list(config.grid.t_values), config.grid,
                                 workers=workers)
    elif config.command == "identities":
        report = identity_suite(config.spec)
    elif config.command == "q1rate":
        report = q1_rate_fit(config.spec, config.probes, config.Ns)
    else:  # pragma: no cover - parse_config guards this
        raise ConfigError("command", "unhandled command")

    failed = 0
    if report is not None:
        artifact = write(f"{report.name}.json", report.to_json())
        write(f"{report.name}.csv", report.to_csv())
        failed = report.verdicts_failed
    print(dumps_canonical({"report": str(artifact), "verdicts_failed": failed}))
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        prog="condensate-lab",
        description="N-soliton condensate laboratory for the focusing NLS equation",
    )
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--output", default=None,
                        help="output directory (overrides the config)")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 4
    try:
        config = parse_config(text)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        code = 2 if exc.field_name == "json" else 3
        return code
    if args.output is not None:
        config.output = args.output
    try:
        return run_and_emit(config)
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 4
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: run: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
