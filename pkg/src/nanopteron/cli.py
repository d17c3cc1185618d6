"""Command-line entry point.

Exit status is 0 on success, 1 for computation or regime errors and 2 for
usage errors. Tables go to standard output as CSV. Commands that emit
files write them under ``--output-dir`` (default ``$NANOPTERON_OUTPUT_DIR``
or the working directory), together with a JSON manifest.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (inner_half_width, lattice_remainder, remainder_caseA, remainder_caseB)
from .inner import prefactor_caseA, prefactor_caseB, prefactor_lattice
from .models import DomainError, ModelSpec, RegimeError
from .singulant import (WaveRegime, classify_regime, hierarchy_singulant_roots, lambda_crit,
                        lattice_5kdv_singulants, lattice_kdv_singulants)
from .solver import (ComparisonRow, IntegrationError, MeasurementError, ResolutionError,
                     SimulationConfig, Splitting, compare_sweep, run, write_comparison,
                     write_snapshots)

OUTPUT_ENV = "NANOPTERON_OUTPUT_DIR"


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def write(self, directory: Path) -> Path:
        path = Path(directory) / f"{self.command}_manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, default=str) + "\n")
        return path


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def emit(rows: list[list], header: list[str], out: Path | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    sys.stdout.write(text)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from exc


def int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from exc


def read_config(path: Path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _output_dir(args) -> Path:
    path = Path(args.output_dir or os.environ.get(OUTPUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "config")}


def _finish(args, command, outputs, started, **extra) -> None:
    manifest = RunManifest(command, _params(args), [str(p) for p in outputs],
                           wall_time=time.perf_counter() - started, extra=extra)
    path = manifest.write(_output_dir(args))
    print(f"# manifest: {path}", file=sys.stderr)


# ----------------------------------------------------------------- commands

def cmd_singulant(args) -> None:
    if args.model == "7kdv":
        roots = hierarchy_singulant_roots(2, _need(args, "lam"))
    elif args.model == "hierarchy":
        roots = hierarchy_singulant_roots(_need(args, "k"), _need(args, "lam"))
    elif args.model == "lattice-kdv":
        roots = lattice_kdv_singulants(args.n_max)
    else:
        fam1, fam2 = lattice_5kdv_singulants(_need(args, "kappa"), args.n_max)
        roots = fam1 + fam2
    roots = sorted(roots, key=lambda r: (abs(r.value.imag), r.value.real, r.value.imag))
    rows = [[r.value.real, r.value.imag, r.regime.value, r.family.value, r.branch_index] for r in roots]
    emit(rows, ["re", "im", "regime", "family", "branch"], args.out)


def cmd_lambda_crit(args) -> None:
    odd = [k for k in args.k if k % 2 or k < 2]
    if odd:
        raise UsageError(f"lambda-crit needs even k >= 2; got {odd}")
    rows = [[k, lambda_crit(k, args.tol).critical_value] for k in args.k]
    emit(rows, ["k", "lambda_crit"], args.out)


def cmd_prefactor(args) -> None:
    started = time.perf_counter()
    if args.model == "lattice-kdv":
        estimates = [("", prefactor_lattice(args.jmax))]
    else:
        lam = _need(args, "lam")
        if lam > 0.25:
            if args.case == "B":
                raise RegimeError(f"lambda = {lam} > 1/4 is Case A")
            one, two = prefactor_caseA(lam, args.jmax)
            estimates = [("_1", one), ("_2", two)]
        else:
            if args.case == "A":
                raise RegimeError(f"lambda = {lam} <= 1/4 is Case B")
            estimates = [("", prefactor_caseB(lam, args.jmax))]
    outdir = _output_dir(args)
    outputs = []
    for suffix, est in estimates:
        print(f"Lambda{suffix} = {fmt(est.value.real)} {'+' if est.value.imag >= 0 else '-'} "
              f"{fmt(abs(est.value.imag))}i  converged={fmt(est.converged)}  "
              f"rel_change={fmt(est.rel_change_last)}")
        path = outdir / f"prefactor_history_{args.model}{suffix}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["j", "re", "im"])
            for j, v in est.history:
                writer.writerow([j, fmt(v.real), fmt(v.imag)])
        outputs.append(path)
    _finish(args, "prefactor", outputs, started)


def cmd_amplitude(args) -> None:
    rows = []
    if args.model == "lattice-kdv":
        lam_prefactor = prefactor_lattice(args.jmax).value.real
        for c in args.c:
            for h in args.h:
                pred = lattice_remainder(h, c, prefactor=lam_prefactor)
                rows.append([h, c, pred.amplitude, pred.frequency])
    else:
        lam = _need(args, "lam")
        for c in args.c:
            model = ModelSpec.seventh_order(lam, c)
            regime = classify_regime(model)
            if regime is not WaveRegime.GENERALIZED_SOLITARY_WAVE:
                raise RegimeError(f"regime is {regime.value}; use envelope")
        prefactor = prefactor_caseB(lam, args.jmax).value.real
        for c in args.c:
            model = ModelSpec.seventh_order(lam, c)
            for eps in args.eps:
                pred = remainder_caseB(model, eps, prefactor=prefactor)
                rows.append([eps, c, pred.amplitude, pred.frequency])
    emit(rows, ["param", "c", "amplitude", "frequency"], args.out)


def cmd_envelope(args) -> None:
    started = time.perf_counter()
    outdir = _output_dir(args)
    c, eps = args.c, args.eps
    x = np.linspace(c * args.time - args.half_width, c * args.time + args.half_width, args.n)
    dist = np.abs(x - c * args.time)
    outputs = []
    left, _ = remainder_caseA(ModelSpec.seventh_order(args.lam, c), eps, args.jmax)
    b = remainder_caseB(ModelSpec.seventh_order(args.case_b_lambda, c), eps, args.jmax)
    for tag, pred in (("caseA", left), ("caseB", b)):
        delta = inner_half_width(eps, pred.chi_x, c)
        keep = dist >= delta
        log_env = np.log(pred.amplitude) - pred.envelope_rate * dist[keep]
        path = outdir / f"envelope_{tag}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "log_envelope"])
            for xv, lv in zip(x[keep], log_env):
                writer.writerow([fmt(xv), fmt(lv)])
        outputs.append(path)
        print(f"{tag}: amplitude={fmt(pred.amplitude)} envelope_rate={fmt(pred.envelope_rate)} "
              f"excluded_half_width={fmt(delta)} file={path}")
    _finish(args, "envelope", outputs, started)


def _sim_config(args) -> SimulationConfig:
    model = ModelSpec.seventh_order(_need(args, "lam"), args.c)
    return SimulationConfig(model, args.eps, args.dt, args.t_end, args.L, args.n_points,
                            dealias=not args.no_dealias, splitting=Splitting(args.splitting),
                            plain_kdv=args.plain_kdv, n_snapshots=args.snapshots)


def cmd_simulate(args) -> None:
    started = time.perf_counter()
    config = _sim_config(args)
    final, snaps = run(config)
    outdir = _output_dir(args)
    fields = snaps if snaps and snaps[-1].time == final.time else snaps + [final]
    paths = write_snapshots(fields, outdir)
    print(f"final time {fmt(final.time)}, mass {fmt(final.mass())}, {len(paths)} snapshot files")
    _finish(args, "simulate", paths, started, times=[f.time for f in fields])


def cmd_compare(args) -> None:
    started = time.perf_counter()
    lam = _need(args, "lam")
    template = {"dt": args.dt, "points_per_wavelength": args.points_per_wavelength}
    for key in ("t_end", "L", "n_points"):
        if getattr(args, key) is not None:
            template[key] = getattr(args, key)
    rows: list[ComparisonRow] = compare_sweep(lam, args.c, args.eps, template, args.jmax)
    path = write_comparison(rows, _output_dir(args) / "comparison.csv")
    emit([[r.eps, r.numeric_amplitude, r.asymptotic_amplitude, r.ratio, r.rel_error] for r in rows],
         ["eps", "numeric_amplitude", "asymptotic_amplitude", "ratio", "rel_error"], None)
    _finish(args, "compare", [path], started,
            steady=[r.steady for r in rows],
            runs=[{"eps": r.eps, "t_end": r.config.t_end, "L": r.config.L,
                   "n_points": r.config.n_points, "dt": r.config.dt} for r in rows])


def _need(args, name):
    value = getattr(args, name, None)
    if value is None:
        flag = {"lam": "--lambda"}.get(name, "--" + name.replace("_", "-"))
        raise UsageError(f"{args.command} --model {getattr(args, 'model', '')} requires {flag}")
    return value


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nanopteron", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--config", type=Path, help="file of 'key = value' lines; flags override it")
        p.add_argument("--output-dir", type=Path, default=None)
        return p

    p = add("singulant", cmd_singulant, "singulant roots and their classification")
    p.add_argument("--model", required=True, choices=["7kdv", "hierarchy", "lattice-kdv", "lattice-5kdv"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--n-max", type=int, default=1)
    p.add_argument("--out", type=Path)

    p = add("lambda-crit", cmd_lambda_crit, "critical lambda for even hierarchy orders")
    p.add_argument("--k", type=int_list, required=True, help="comma-separated even k values")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", type=Path)

    p = add("prefactor", cmd_prefactor, "prefactor constant from the inner recurrence")
    p.add_argument("--model", required=True, choices=["7kdv", "lattice-kdv"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--jmax", type=int, default=None)
    p.add_argument("--case", choices=["auto", "A", "B"], default="auto")

    p = add("amplitude", cmd_amplitude, "far-field amplitude over a parameter grid")
    p.add_argument("--model", required=True, choices=["7kdv", "lattice-kdv"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--eps", type=float_list, default=[0.5])
    p.add_argument("--h", type=float_list, default=[0.5])
    p.add_argument("--c", type=float_list, default=[1.0])
    p.add_argument("--jmax", type=int, default=None)
    p.add_argument("--out", type=Path)

    p = add("envelope", cmd_envelope, "log remainder envelope for a decaying and a non-decaying case")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--case-b-lambda", type=float, default=0.125)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--time", type=float, default=0.0)
    p.add_argument("--half-width", type=float, default=10.0)
    p.add_argument("--n", type=int, default=401)
    p.add_argument("--jmax", type=int, default=600)

    p = add("simulate", cmd_simulate, "split-step run from the soliton initial condition")
    _sim_flags(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--L", type=float, default=50.0)
    p.add_argument("--n-points", type=int, default=4096)
    p.add_argument("--no-dealias", action="store_true")
    p.add_argument("--splitting", choices=["Strang", "Lie"], default="Strang")
    p.add_argument("--plain-kdv", action="store_true")
    p.add_argument("--snapshots", type=int, default=1)

    p = add("compare", cmd_compare, "numerical tail amplitude against the asymptotic prediction")
    _sim_flags(p)
    p.add_argument("--eps", type=float_list, required=True)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--n-points", type=int, default=None)
    p.add_argument("--points-per-wavelength", type=int, default=24)
    p.add_argument("--jmax", type=int, default=600)
    return parser


def _sim_flags(p) -> None:
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=2e-3)


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Load ``--config`` values as subparser defaults so explicit flags win."""
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    values = read_config(known.config)
    command = next((a for a in argv if not a.startswith("-")), None)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sub = subparsers.choices.get(command)
    if sub is None:
        return
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        dest = "lam" if key == "lambda" else key
        action = actions.get(dest)
        if action is None:
            raise UsageError(f"unknown config key {key!r} for {command}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = raw.lower() in ("1", "true", "yes", "on")
        else:
            defaults[dest] = action.type(raw) if action.type else raw
        action.required = False
    sub.set_defaults(**defaults)


JMAX_DEFAULTS = {"7kdv": 600, "lattice-kdv": 200}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jmax", "") is None:
        args.jmax = JMAX_DEFAULTS[args.model]
    try:
        args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (RegimeError, ResolutionError, MeasurementError, IntegrationError,
            ArithmeticError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
