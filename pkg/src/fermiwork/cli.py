"""Command-line front end: ``fermiwork validate|minimize|ergotropy|activate|sweep``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 invalid physics
or exceeded capacity.
"""

import argparse
import csv
import io as _stringio
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from . import fock, gaussian, passivity
from .covariance import (
    CovarianceMatrix,
    canonical_form,
    energy_cm,
    is_pure,
    thermal_cm,
    two_mode_parameters,
    validate,
)
from .exceptions import (
    AsymmetryError,
    CapacityError,
    FermiworkError,
    ParseError,
    UnphysicalError,
    ValidationError,
)
from .io import fmt, read_cm_file, read_sweep_config
from .modes import ModeSystem

EXIT_OK, EXIT_INPUT, EXIT_INVALID = 0, 1, 2
METHODS = ("gaussian", "fock", "sampler")
MINIMIZE_HEADER = ["stage", "param", "energy", "a", "b", "e1", "e2"]
SWEEP_HEADER = [
    "beta_a", "beta_b", "omega_a", "omega_b", "E", "fock_erg", "gauss_erg", "passive", "gauss_passive", "boundary",
]


@dataclass
class RunConfig:
    command: str
    inputs: List[str] = field(default_factory=list)
    betas: Optional[Tuple[float, ...]] = None
    omegas: Optional[Tuple[float, ...]] = None
    methods: Tuple[str, ...] = ("gaussian",)
    trials: int = 10_000
    seed: int = 42
    max_copies: int = 3
    tol: Optional[float] = None
    output: Optional[str] = None


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    return values


def _method_list(text: str) -> Tuple[str, ...]:
    methods = tuple(m.strip() for m in text.split(","))
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be among {', '.join(METHODS)}")
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fermiwork", description="Work extraction from fermionic mode systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a covariance-matrix file")
    p.add_argument("path")

    p = sub.add_parser("minimize", help="run the two-mode Gaussian energy minimization")
    p.add_argument("path")
    p.add_argument("--trace", metavar="CSV", help="write the stage table as CSV")

    p = sub.add_parser("ergotropy", help="ergotropy of a CM file or a thermal product")
    p.add_argument("path", nargs="?")
    p.add_argument("--betas", type=_float_list)
    freq = p.add_mutually_exclusive_group()
    freq.add_argument("--omegas", type=_float_list)
    freq.add_argument("--omega", type=float)
    p.add_argument("--method", type=_method_list, default=("gaussian",))
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("activate", help="passivity and activation of a thermal product")
    p.add_argument("--betas", type=_float_list, required=True)
    freq = p.add_mutually_exclusive_group()
    freq.add_argument("--omegas", type=_float_list)
    freq.add_argument("--omega", type=float)
    p.add_argument("--max-copies", type=int, default=3)

    p = sub.add_parser("sweep", help="two-mode thermal grid sweep to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="CSV path (default: stdout)")
    p.add_argument("--tol", type=float, help="override the config tolerance")
    return parser


def _omegas(args, n: int) -> Tuple[float, ...]:
    if getattr(args, "omegas", None) is not None:
        if len(args.omegas) != n:
            raise ValidationError(f"{len(args.omegas)} frequencies for {n} inverse temperatures")
        return args.omegas
    omega = getattr(args, "omega", None)
    return (1.0 if omega is None else omega,) * n


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if getattr(args, "path", None):
        cfg.inputs.append(args.path)
    if args.command == "sweep":
        cfg.inputs.append(args.config)
        cfg.output = args.output
    if args.command == "minimize":
        cfg.output = args.trace
    if getattr(args, "betas", None) is not None:
        cfg.betas = args.betas
        cfg.omegas = _omegas(args, len(args.betas))
    for name in ("trials", "seed", "max_copies", "tol"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "method", None):
        cfg.methods = args.method
    return cfg


def _load_cm(path: str) -> Tuple[CovarianceMatrix, ModeSystem]:
    matrix, omegas = read_cm_file(path)
    return validate(matrix), ModeSystem(omegas)


def _write_csv(rows, header, path: Optional[str], out) -> None:
    buf = _stringio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if path:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(buf.getvalue())
    else:
        out.write(buf.getvalue())


def cmd_validate(cfg: RunConfig, out) -> int:
    matrix, omegas = read_cm_file(cfg.inputs[0])
    n = matrix.shape[0] // 2
    print(f"modes {n}", file=out)
    try:
        cm = validate(matrix)
    except AsymmetryError as exc:
        print(f"invalid: {exc}", file=out)
        return EXIT_INVALID
    except UnphysicalError as exc:
        print(f"unphysical: max singular value {fmt(exc.max_singular_value)}", file=out)
        return EXIT_INVALID
    ModeSystem(omegas)
    values = canonical_form(cm).values
    purity = "pure" if is_pure(cm) else "mixed"
    print(f"{purity}, physical, values {' '.join(fmt(v) for v in values)}", file=out)
    return EXIT_OK


def cmd_minimize(cfg: RunConfig, out) -> int:
    cm, modes = _load_cm(cfg.inputs[0])
    if cm.n_modes != 2:
        raise ValidationError(f"minimize needs a two-mode covariance matrix, got {cm.n_modes} modes")
    trace = gaussian.gaussian_minimize(cm, modes)
    rows = []
    for stage in trace.stages:
        param = "" if stage.param is None else fmt(stage.param)
        a, b, e1, e2 = two_mode_parameters(stage.cm.matrix)
        rows.append([stage.name, param, fmt(stage.energy), fmt(a), fmt(b), fmt(e1), fmt(e2)])
        label = "" if stage.param is None else f"  {'r' if stage.name == 'squeeze' else 'theta'}* = {param}"
        print(f"{stage.name:<14} energy {fmt(stage.energy)}{label}", file=out)
    a, b, _, _ = two_mode_parameters(trace.final_cm.matrix)
    print(f"final values {fmt(a)} {fmt(b)}", file=out)
    print(f"gaussian ergotropy {fmt(max(trace.initial_energy - trace.final_energy, 0.0))}", file=out)
    if cfg.output:
        _write_csv(rows, MINIMIZE_HEADER, cfg.output, out)
    return EXIT_OK


def cmd_ergotropy(cfg: RunConfig, out) -> int:
    if cfg.inputs:
        if cfg.betas is not None:
            raise ValidationError("give either a CM file or --betas, not both")
        cm, modes = _load_cm(cfg.inputs[0])
        state = None
    elif cfg.betas is not None:
        modes = ModeSystem(cfg.omegas)
        cm = thermal_cm(cfg.betas, modes)
        state = "thermal"
    else:
        raise ValidationError("give a CM file or --betas")
    if cm.n_modes != modes.n_modes:
        raise ValidationError(f"{modes.n_modes} frequencies for a {cm.n_modes}-mode covariance matrix")
    results = {}
    for method in cfg.methods:
        if method == "gaussian":
            results[method] = gaussian.gaussian_ergotropy(cm, modes)
        elif method == "fock":
            if cm.n_modes > fock.MAX_MODES:
                raise CapacityError(
                    f"fock method supports up to {fock.MAX_MODES} modes, got {cm.n_modes}; use --method gaussian"
                )
            rho = fock.thermal_state(cfg.betas, modes) if state == "thermal" else fock.cm_to_density(cm)
            results[method] = fock.ergotropy(rho, modes)
        else:
            low = gaussian.random_orthogonal_search(cm, modes, trials=cfg.trials, seed=cfg.seed)
            results[method] = max(energy_cm(cm, modes) - low, 0.0)
    for method, value in results.items():
        print(f"{method:<9} {fmt(value)}", file=out)
    if len(results) > 1:
        vals = list(results.values())
        spread = max(abs(x - y) for x in vals for y in vals)
        print(f"max discrepancy {fmt(spread)}", file=out)
    return EXIT_OK


def cmd_activate(cfg: RunConfig, out) -> int:
    betas, modes = cfg.betas, ModeSystem(cfg.omegas)
    n = modes.n_modes
    if cfg.max_copies < 1:
        raise ValidationError("--max-copies must be at least 1")
    if n * cfg.max_copies > passivity.MAX_BITS:
        raise CapacityError(f"{cfg.max_copies} copies of {n} modes exceed the {passivity.MAX_BITS}-mode limit")
    thermal = passivity.is_thermal(betas, modes)
    witness = passivity.nonpassivity_witness(betas, modes)
    if witness is None:
        print(f"{'passive (thermal)' if thermal else 'passive'}; no witness", file=out)
    else:
        s, s_prime = (passivity.format_bits(x) for x in witness)
        print(f"active; witness {s} <-> {s_prime}", file=out)
        w_raw = passivity.activation_work(betas, modes, witness, normalized=False)
        w = passivity.activation_work(betas, modes, witness)
        print(f"work unnormalized {fmt(w_raw)}", file=out)
        print(f"work normalized {fmt(w)}", file=out)
        print("protocol:", file=out)
        for cond in passivity.protocol_check(witness, betas, modes):
            print(f"  {cond.name:<30} {cond.status:<9} {cond.detail}", file=out)
    state = passivity.DiagonalState.thermal(betas, modes)
    k = passivity.activation_number(state, cfg.max_copies)
    print(f"activating copies {'none up to ' + str(cfg.max_copies) if k is None else k}", file=out)
    return EXIT_OK


def _boundary(beta_a: float, beta_b: float, omega_a: float, omega_b: float) -> int:
    """Sign of ``omega_a / omega_b - T_a / T_b``."""
    lhs, rhs = omega_a * beta_a, omega_b * beta_b
    if abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs)):
        return 0
    return 1 if lhs > rhs else -1


def sweep_row(point, tol: float) -> List[str]:
    ba, bb, wa, wb = point
    modes = ModeSystem((wa, wb))
    rho = fock.thermal_state((ba, bb), modes)
    cm = thermal_cm((ba, bb), modes)
    e = fock.energy(rho, modes)
    f_erg = fock.ergotropy(rho, modes)
    g_erg = gaussian.gaussian_ergotropy(cm, modes)
    return [
        fmt(ba), fmt(bb), fmt(wa), fmt(wb), fmt(e), fmt(f_erg), fmt(g_erg),
        str(int(f_erg <= tol)), str(int(g_erg <= tol)), str(_boundary(ba, bb, wa, wb)),
    ]


def run_sweep(grid, tol: Optional[float] = None) -> List[List[str]]:
    tol = grid.tol if tol is None else tol
    points = list(grid.points())
    if grid.workers > 1:
        with ThreadPoolExecutor(max_workers=grid.workers) as pool:
            return list(pool.map(lambda p: sweep_row(p, tol), points))
    return [sweep_row(p, tol) for p in points]


def cmd_sweep(cfg: RunConfig, out) -> int:
    grid = read_sweep_config(cfg.inputs[0])
    _write_csv(run_sweep(grid, cfg.tol), SWEEP_HEADER, cfg.output, out)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "minimize": cmd_minimize,
    "ergotropy": cmd_ergotropy,
    "activate": cmd_activate,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg, out)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=err)
        return EXIT_INVALID
    except FermiworkError as exc:
        print(f"invalid: {exc}", file=err)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
