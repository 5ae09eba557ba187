"""Command-line front end.

Exit codes: 0 success without negativity, 2 success with negativity
detected, 1 usage or validation error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .classical import CoherenceSpec, gamma_from_spec
from .config import COMMANDS, ScenarioConfig
from .distributions import JointDistribution, PhiGrid
from .errors import ValidationError
from .inversion import (
    PathologyReport,
    marking_kernels,
    pathology_report,
    pathology_threshold,
    reconstructed_joint_closed_form,
)
from .pipeline import (
    bisect_onset,
    classical_twin,
    max_deviation,
    observe_classical,
    quantum_state_on_sweep,
    reconstruct,
    run_classical,
    run_quantum,
)
from .quantum import marked_joint_probability, rho_from_bloch
from .stochastic import empirical_gamma, empirical_joint, project_density, sample_fields, sample_outcomes

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PATHOLOGY = 2
ONSET_TOL = 1e-9
ZERO_TOL = 1e-12


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for "pathology detected"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- CSV / JSON

def write_joint_csv(path, joint: JointDistribution, comment: Optional[str] = None) -> None:
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append("z,phi,value")
    for z, row in ((1, joint.row_plus), (-1, joint.row_minus)):
        lines.extend(f"{z},{phi:.17g},{value:.17g}" for phi, value in zip(joint.grid.nodes, row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_joint_csv(path, outcome_label="polarizer") -> JointDistribution:
    rows = []
    header_seen = False
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line.replace(" ", "") != "z,phi,value":
                raise ValidationError(f"{path}: expected header 'z,phi,value', got {line!r}")
            header_seen = True
            continue
        z, phi, value = line.split(",")
        rows.append((int(z), float(phi), float(value)))
    if not rows or len(rows) % 2:
        raise ValidationError(f"{path}: need an even, nonzero number of data rows")
    grid = PhiGrid(len(rows) // 2)
    plus = sorted((r for r in rows if r[0] == 1), key=lambda r: r[1])
    minus = sorted((r for r in rows if r[0] == -1), key=lambda r: r[1])
    if len(plus) != grid.n or len(minus) != grid.n:
        raise ValidationError(f"{path}: rows must split evenly between z=1 and z=-1")
    for block in (plus, minus):
        phis = np.array([r[1] for r in block])
        if np.max(np.abs(phis - grid.nodes)) > 1e-9:
            raise ValidationError(f"{path}: phi values are not the {grid.n}-node midpoint grid")
    return JointDistribution(grid, [r[2] for r in plus], [r[2] for r in minus], outcome_label)


def report_payload(report: PathologyReport, config: ScenarioConfig, **extra) -> dict:
    payload = {"version": __version__, "config": config.to_dict()}
    payload.update(report.to_dict())
    payload.update(extra)
    return payload


def emit_report(payload: dict, config: ScenarioConfig) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if config.report:
        Path(config.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def kernel_summary(config: ScenarioConfig) -> dict:
    kz, kphi = marking_kernels(config.marking())
    return {"path_condition": kz.condition(), "phase_fringe_gain": kphi.fringe_gain}


def _exit_for(report: PathologyReport) -> int:
    return EXIT_PATHOLOGY if report.is_pathological else EXIT_OK


# ---------------------------------------------------------------- commands

def cmd_classical(config: ScenarioConfig) -> int:
    spec = config.coherence_spec()
    result = run_classical(spec, config.marking(), config.phi_grid())
    if config.out:
        write_joint_csv(config.out, result.reconstructed)
    if config.observed:
        write_joint_csv(config.observed, result.observed)
    extra = {"mode": "classical", "kernels": kernel_summary(config)}
    if config.marking().is_optimal:
        closed = reconstructed_joint_closed_form(spec, config.phi_grid())
        extra["closed_form_max_deviation"] = max_deviation(result.reconstructed, closed)
    emit_report(report_payload(result.report, config, **extra), config)
    return _exit_for(result.report)


def cmd_quantum(config: ScenarioConfig) -> int:
    if not config.marking().is_optimal:
        raise CliError("quantum mode supports only the optimal marking (omit --theta)")
    s = config.bloch()
    grid = config.phi_grid()
    result = run_quantum(s, config.vartheta, grid)
    if config.out:
        write_joint_csv(config.out, result.reconstructed)
    if config.observed:
        write_joint_csv(config.observed, result.observed)
    closed = reconstructed_joint_closed_form(s, grid)
    extra = {
        "mode": "quantum",
        "kernels": kernel_summary(config),
        "closed_form_max_deviation": max_deviation(result.reconstructed, closed),
    }
    if config.compare_classical:
        twin = classical_twin(s, config.vartheta, grid)
        extra["compare_classical"] = {
            "observed_max_deviation": max_deviation(twin.observed, result.observed),
            "reconstructed_max_deviation": max_deviation(twin.reconstructed, result.reconstructed),
        }
    emit_report(report_payload(result.report, config, **extra), config)
    return _exit_for(result.report)


def _sweep_function(config: ScenarioConfig):
    grid = config.phi_grid()
    if config.sweep_param == "mu":
        marking = config.marking()

        def run(mu):
            return run_classical(CoherenceSpec.from_i1(config.i1, mu, config.delta), marking, grid).report

        threshold = pathology_threshold((config.i1, 1 - config.i1)) if 0 < config.i1 < 1 else None
        expected = [] if threshold is None or threshold >= 1 else [math.sqrt(threshold)]
        return run, expected

    mu = 1.0 if config.mu is None else config.mu

    def run(sz):
        return run_quantum(quantum_state_on_sweep(sz, mu, config.delta), config.vartheta, grid).report

    # |mu|^2 = (1 - |sz|)/(1 + |sz|)  <=>  |sz| = (1 - mu^2)/(1 + mu^2)
    onset = (1 - mu * mu) / (1 + mu * mu)
    expected = [] if onset == 0 else [onset, -onset]
    return run, expected


def cmd_sweep(config: ScenarioConfig) -> int:
    run, expected = _sweep_function(config)
    params = np.linspace(config.sweep_start, config.sweep_stop, config.sweep_steps)
    reports = [run(float(x)) for x in params]
    values = [r.min_value for r in reports]

    def f(x):
        return run(x).min_value

    # sign with a dead zone, so rounding noise around an exact zero is not a crossing
    signs = [0 if abs(v) <= ZERO_TOL else (1 if v > 0 else -1) for v in values]
    nonzero = [k for k, sgn in enumerate(signs) if sgn]
    crossings = []
    for k, m in zip(nonzero, nonzero[1:]):
        a, b = float(params[k]), float(params[m])
        if signs[k] > 0 > signs[m]:
            crossings.append(bisect_onset(f, a, b))
        elif signs[k] < 0 < signs[m]:
            crossings.append(-bisect_onset(lambda x: f(-x), -b, -a))

    checks = []
    for c in crossings:
        nearest = min(expected, key=lambda e: abs(e - c)) if expected else None
        error = None if nearest is None else abs(c - nearest)
        checks.append({"crossing": c, "expected": nearest, "error": error})
        if error is None or error > ONSET_TOL:
            raise CliError(f"negativity onset at {c!r} disagrees with the threshold law (expected {nearest!r})")

    if config.out:
        lines = ["parameter,min_value,is_pathological"]
        lines.extend(f"{x:.17g},{r.min_value:.17g},{str(r.is_pathological).lower()}" for x, r in zip(params, reports))
        Path(config.out).write_text("\n".join(lines) + "\n", encoding="utf-8")

    worst = min(reports, key=lambda r: r.min_value)
    boundary = [float(x) for x, sgn in zip(params, signs) if sgn == 0]
    extra = {
        "mode": config.mode,
        "sweep_param": config.sweep_param,
        "crossings": checks,
        "expected_onsets": expected,
        "boundary_zeros": boundary,
        "pathological_fraction": float(np.mean([r.is_pathological for r in reports])),
    }
    emit_report(report_payload(worst, config, **extra), config)
    return EXIT_PATHOLOGY if any(r.is_pathological for r in reports) else EXIT_OK


def _empirical_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(f"{p.stem}_empirical{p.suffix or '.csv'}")


def cmd_sample(config: ScenarioConfig) -> int:
    grid = config.phi_grid()
    marking = config.marking()
    extra = {"samples": config.samples, "seed": config.seed, "statistical_scale": 1 / math.sqrt(config.samples)}
    closed = None
    if config.input:
        observed = read_joint_csv(config.input)
        grid = observed.grid
        extra["mode"] = "external"
    elif config.mode == "classical":
        spec = config.coherence_spec()
        gamma = gamma_from_spec(spec)
        fields = sample_fields(gamma, config.samples, config.seed)
        raw = empirical_gamma(fields)
        gamma_hat = project_density(raw)
        extra["gamma_hat"] = {
            "raw_trace": raw.trace,
            "p": gamma_hat.p,
            "q": gamma_hat.q,
            "c": [gamma_hat.c.real, gamma_hat.c.imag],
            "max_entry_error": float(np.max(np.abs(gamma_hat.array - gamma.array))),
        }
        extra["mode"] = "classical"
        observed = observe_classical(gamma_hat, marking, grid)
        if marking.is_optimal:
            closed = reconstructed_joint_closed_form(spec, grid)
    else:
        if not marking.is_optimal:
            raise CliError("quantum mode supports only the optimal marking (omit --theta)")
        s = config.bloch()
        observed = marked_joint_probability(rho_from_bloch(s), config.vartheta, grid)
        closed = reconstructed_joint_closed_form(s, grid)
        extra["mode"] = "quantum"

    # seed stream for detection events is independent of the field stream
    counts = sample_outcomes(observed, config.samples, [config.seed, 1])
    empirical = empirical_joint(counts)
    reconstructed = reconstruct(empirical, marking)
    report = pathology_report(reconstructed)
    if closed is not None:
        closed_report = pathology_report(closed)
        extra["closed_form_min_value"] = closed_report.min_value
        extra["closed_form_max_deviation"] = max_deviation(reconstructed, closed)
        extra["min_value_deviation"] = abs(report.min_value - closed_report.min_value)
    if config.out:
        write_joint_csv(config.out, reconstructed, comment=f"reconstructed from {config.samples} events")
        write_joint_csv(
            _empirical_path(config.out),
            empirical,
            comment=f"empirical observed joint, n={config.samples}, mass={empirical.mass():.17g}",
        )
    emit_report(report_payload(report, config, **extra), config)
    return _exit_for(report)


def cmd_invert(config: ScenarioConfig) -> int:
    observed = read_joint_csv(config.input)
    if observed.min() < 0:
        raise CliError("input has negative entries; the kernels apply to an observed (nonnegative) joint")
    reconstructed = reconstruct(observed, config.marking())
    if config.out:
        write_joint_csv(config.out, reconstructed)
    report = pathology_report(reconstructed)
    emit_report(report_payload(report, config, mode="invert", kernels=kernel_summary(config)), config)
    return _exit_for(report)


HANDLERS = {
    "classical": cmd_classical,
    "quantum": cmd_quantum,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
    "invert": cmd_invert,
}


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    state = common.add_argument_group("state")
    state.add_argument("--i1", type=float, help="intensity at aperture z=+1 (classical)")
    state.add_argument("--mu", type=float, help="modulus of the degree of coherence")
    state.add_argument("--delta", type=float, help="phase of the degree of coherence [rad]")
    state.add_argument("--sx", type=float, help="Bloch component s_x (quantum)")
    state.add_argument("--sy", type=float, help="Bloch component s_y (quantum)")
    state.add_argument("--sz", type=float, help="Bloch component s_z (quantum)")
    setup = common.add_argument_group("measurement")
    setup.add_argument("--vartheta", type=float, help="polarizer angle [rad], default pi/3")
    setup.add_argument("--theta", type=float, help="wave-plate angle [rad], default 2*vartheta - pi/2")
    setup.add_argument("--grid", type=int, help="number of phase nodes, default 256")
    run = common.add_argument_group("run")
    run.add_argument("--seed", type=int)
    run.add_argument("--samples", type=int)
    run.add_argument("--out", help="CSV output path")
    run.add_argument("--report", help="JSON report path (default: stdout)")
    run.add_argument("--observed", help="also write the observed joint as CSV")
    run.add_argument("--input", help="joint CSV to read (invert, sample)")
    run.add_argument("--compare-classical", action="store_true", default=None, dest="compare_classical")
    run.add_argument("--config", help="load a config written by --dump-config")
    run.add_argument(
        "--dump-config", nargs="?", const="-", metavar="PATH", dest="dump_config",
        help="write the resolved config as JSON and exit",
    )
    sweep = common.add_argument_group("sweep")
    sweep.add_argument("--param", choices=("mu", "sz"), dest="sweep_param")
    sweep.add_argument("--start", type=float, dest="sweep_start")
    sweep.add_argument("--stop", type=float, dest="sweep_stop")
    sweep.add_argument("--steps", type=int, dest="sweep_steps")

    parser = _Parser(prog="complementarity", description="Young-interferometer complementarity lab")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "classical": "classical field pipeline",
        "quantum": "single-photon pipeline",
        "sweep": "scan coherence (or s_z) and locate the negativity onset",
        "sample": "Monte Carlo: sample, estimate, invert",
        "invert": "apply the kernels to an observed joint CSV",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    values = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "dump_config")}
    config = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    for key, value in values.items():
        setattr(config, key, value)
    return config.resolve()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        if args.dump_config:
            text = json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"
            if args.dump_config == "-":
                sys.stdout.write(text)
            else:
                Path(args.dump_config).write_text(text, encoding="utf-8")
            return EXIT_OK
        return HANDLERS[config.command](config)
    except (ValidationError, CliError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
