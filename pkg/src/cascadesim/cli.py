"""Command-line front end.

Every command writes one CSV table (to ``--out`` or stdout) headed by
``#``-prefixed metadata lines.  Exit codes: 0 success, 1 invalid input,
2 numerical failure (unstable dynamics, truncation leak, failed oracle check).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from cascadesim.chain import ChainError, InteractionChain, parse_chain
from cascadesim.delays import DelaySpec, delay_corrected_matrix, delay_validity
from cascadesim.errors import NumericalError
from cascadesim.fock import FockConfig, oracle_compare
from cascadesim.gaussian import drift_diffusion, evolve, phonon_numbers, steady_state, thermal_state
from cascadesim.geometries import SQUEEZE_SCHEMES, multipass_squeeze
from cascadesim.meq import backaction_rates, effective_matrices, jump_operators, \
    split_hamiltonian_dissipator, system_blocks
from cascadesim.metrics import bs_tms_weights, chain_rates, cooperativity_generic, \
    epr_variance, log_negativity, squeezing_ratio
from cascadesim.presets import FIGURE_PRESETS, GEOMETRY_PRESETS, PRESETS, preset
from cascadesim import studies

COMMANDS = ("build", "rates", "evolve", "steady", "cooperativity", "entangle", "squeeze",
            "sweep", "oracle-check", "delays")
AXES = ("loss", "coupling", "phase", "time")


class UsageError(ChainError):
    pass


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# -- formatting ------------------------------------------------------------

def fmt(value) -> str:
    """Shortest round-trip text for numbers; plain text otherwise."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(stream, columns, rows, meta):
    for key, value in meta.items():
        stream.write(f"# {key}: {value}\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt(v) for v in row) + "\n")


def plot_script(csv_path: str, columns) -> str:
    lines = [
        "# gnuplot script; run: gnuplot -p <this file>",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set xlabel '{columns[0]}'",
    ]
    numeric = [i + 1 for i, c in enumerate(columns) if c not in ("error", "note", "ok", "matrix")]
    plots = [f"'{csv_path}' using 1:{i} with lines" for i in numeric[1:]]
    lines.append("plot " + ", \\\n     ".join(plots) if plots else "# no numeric columns")
    return "\n".join(lines) + "\n"


# -- argument handling ------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> list[float]:
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise UsageError(f"--grid: expected start:stop:count, got {text!r}") from None
    if count < 1:
        raise UsageError("--grid: empty grid")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise UsageError("--grid: bounds must be finite")
    return [float(v) for v in np.linspace(start, stop, count)]


def _params(args) -> dict:
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise UsageError(f"--param: expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--param {key}: not a number: {value!r}") from None
    for flag in ("eta", "g", "phi"):
        value = getattr(args, flag, None)
        if value is not None:
            params[flag] = value
    if getattr(args, "pump", False):
        params["pump_copropagating"] = True
    return params


def _geometry_defaults(name, params):
    # Geometry presets need explicit couplings; the CLI defaults them to 1.
    if name in GEOMETRY_PRESETS:
        params.setdefault("g1", 1.0)
        params.setdefault("g2", 1.0)
    return params


def load_chain(args, overrides: dict | None = None) -> InteractionChain:
    if args.preset and args.config:
        raise UsageError("give either --preset or --config, not both")
    params = _params(args)
    params.update(overrides or {})
    if args.preset:
        return preset(args.preset, _geometry_defaults(args.preset, params))
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc.strerror}") from None
        chain = parse_chain(text)
        if "eta" in params:
            chain = chain.replace(link_etas=(params["eta"],) * len(chain.link_etas))
        return chain
    raise UsageError("a chain is required: use --preset or --config")


def _meta(args, extra=None):
    meta = {"cascadesim": _version(), "command": args.command}
    if getattr(args, "preset", None):
        meta["preset"] = args.preset
    if getattr(args, "config", None):
        meta["config"] = args.config
    params = _params(args)
    if params:
        meta["params"] = json.dumps(params, sort_keys=True)
    meta.update(extra or {})
    return meta


def _time_grid(args) -> list[float]:
    if args.grid:
        grid = parse_grid(args.grid)
        if grid[0] != 0.0:
            raise UsageError("--grid: time grids must start at 0")
        return grid
    if not args.t_max > 0:
        raise UsageError("--t-max must be positive")
    return [float(v) for v in np.linspace(0.0, args.t_max, 101)]


# -- commands --------------------------------------------------------------

def cmd_build(args):
    chain = load_chain(args)
    m = effective_matrices(chain)
    rows = []
    for name, mat in (("A", m.A), ("R", m.R), ("L", m.L)):
        for (i, j), v in np.ndenumerate(mat):
            rows.append((name, i + 1, j + 1, v.real, v.imag))
    for k, jump in enumerate(jump_operators(m.L, scale=float(np.linalg.norm(m.At, 2)))):
        rows.append(("jump_rate", k + 1, 0, jump.rate, 0.0))
    return ["matrix", "row", "col", "re", "im"], rows, {}


def _rate_row(chain):
    if chain.n_systems == 2:
        rates = chain_rates(chain)
        try:
            C = cooperativity_generic(rates)
        except ZeroDivisionError:
            C = math.inf
        return ([rates.g, *rates.Gamma, rates.Gamma_12, *rates.gamma_th, *rates.gamma_tot, C],
                ["g", "Gamma_1", "Gamma_2", "Gamma_12", "gamma_th_1", "gamma_th_2",
                 "gamma_tot_1", "gamma_tot_2", "C"])
    back = backaction_rates(chain)
    return list(back.values()), [f"Gamma_{sid}" for sid in back]


def cmd_rates(args):
    values, columns = _rate_row(load_chain(args))
    return columns, [values], {}


def cmd_cooperativity(args):
    chain = load_chain(args)
    if chain.n_systems != 2:
        raise UsageError("cooperativity needs a two-system chain")
    rates = chain_rates(chain)
    C = cooperativity_generic(rates)
    return ["C", "g", "gamma_tot_1", "gamma_tot_2"], [[C, rates.g, *rates.gamma_tot]], {}


def _state_columns(n):
    return [f"C_{i + 1}{j + 1}" for i in range(2 * n) for j in range(i, 2 * n)] + \
        [f"n_{i + 1}" for i in range(n)]


def _state_values(C):
    d = C.shape[0]
    return [C[i, j] for i in range(d) for j in range(i, d)] + phonon_numbers(C)


def cmd_evolve(args):
    chain = load_chain(args)
    t = _time_grid(args)
    Cs = evolve(drift_diffusion(chain), thermal_state(chain.systems), t, dt=args.dt)
    columns = ["t"] + _state_columns(chain.n_systems)
    rows = [[ti, *_state_values(C)] for ti, C in zip(t, Cs)]
    return columns, rows, {"dt": args.dt if args.dt else "default"}


def _entanglement_columns(chain, C):
    if chain.n_systems != 2:
        return [], []
    return ["E_N", "Delta_EPR"], [log_negativity(C), epr_variance(C)]


def cmd_steady(args):
    chain = load_chain(args)
    C = steady_state(drift_diffusion(chain))
    extra_cols, extra = _entanglement_columns(chain, C)
    columns = _state_columns(chain.n_systems) + extra_cols
    return columns, [_state_values(C) + extra], {}


def cmd_entangle(args):
    chain = load_chain(args)
    if chain.n_systems != 2:
        raise UsageError("entangle needs a two-system chain")
    C = studies.stationary_covariance(chain)
    rates = chain_rates(chain)
    first = {}
    for p in chain.passes:
        first.setdefault(p.system, p)
    _, beta = bs_tms_weights(first[chain.systems[0].id].theta, first[chain.systems[1].id].theta)
    try:
        coop = cooperativity_generic(rates)
    except ZeroDivisionError:
        coop = math.inf
    try:
        r = squeezing_ratio(rates, abs(beta))
    except ZeroDivisionError:
        r = math.inf
    eta = chain.link_etas[0] if chain.link_etas else 1.0
    row = [1 - eta**2, coop, log_negativity(C), epr_variance(C), r]
    return ["eta_sq_loss", "C", "E_N", "Delta_EPR", "r"], [row], {}


def cmd_squeeze(args):
    eta = 1.0 if args.eta is None else args.eta
    rep = multipass_squeeze(args.scheme, eta, phi=args.phi)
    return (["g_sq", "Gamma", "r", "alpha_re", "alpha_im"],
            [[rep.g_sq, rep.Gamma, rep.r, rep.alpha.real, rep.alpha.imag]],
            {"scheme": args.scheme, "eta": eta})


def cmd_oracle_check(args):
    chain = load_chain(args)
    cfg = FockConfig((args.dims,) * chain.n_systems)
    t = _time_grid(args)
    rep = oracle_compare(chain, cfg, t, tol=args.tol)
    table = (["max_abs_deviation", "tol", "pass"], [[rep.max_abs_deviation, rep.tol, rep.passed]],
             {"dims": args.dims})
    if not rep.passed:
        raise _Failed(table, f"oracle deviation {rep.max_abs_deviation:.3e} exceeds {rep.tol}")
    return table


def cmd_delays(args):
    chain = load_chain(args)
    if not args.delays:
        raise UsageError("delays: --delays tau1,tau2,... is required")
    try:
        taus = [float(v) for v in args.delays.split(",")]
    except ValueError:
        raise UsageError(f"--delays: expected comma-separated numbers, got {args.delays!r}") from None
    spec = DelaySpec(tuple(taus))
    report = delay_validity(chain, spec, threshold=args.threshold)
    order = "exact" if args.delay_order == "exact" else 1
    _, L = split_hamiltonian_dissipator(delay_corrected_matrix(chain, spec, order))
    meta = {"delay_order": args.delay_order}
    for s, block in zip(chain.systems, system_blocks(L, chain.n_systems)):
        meta[f"Gamma_{s.id}"] = fmt(float(np.trace(block).real))
    rows = [[r.j, r.k, r.margin, r.ok, r.note] for r in report]
    return ["j", "k", "margin", "ok", "note"], rows, meta


class _Failed(Exception):
    """Carries a finished table for a command that must still exit non-zero."""

    def __init__(self, table, message):
        super().__init__(message)
        self.table = table


# -- sweeps ------------------------------------------------------------------

def _sweep_row(task):
    """Evaluate one grid point; failures become an error string."""
    kind, name, base, axis, value = task
    try:
        values = _sweep_values(kind, name, dict(base), axis, value)
        return values, ""
    except (ChainError, NumericalError, ArithmeticError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _axis_params(axis, value, params):
    if axis == "loss":
        if not 0 <= value <= 1:
            raise ChainError(f"loss must lie in [0, 1], got {value}")
        params["eta"] = math.sqrt(1 - value)
    elif axis == "coupling":
        params["g"] = value
    elif axis == "phase":
        params["phi"] = value
    return params


def _sweep_values(kind, name, params, axis, value):
    if kind == "fig6":
        return list(studies.cooperativity_curves([value])[0][1:])
    if kind == "fig7":
        chain = preset("fig7", _axis_params(axis, value, params))
        return phonon_numbers(steady_state(drift_diffusion(chain)))
    if kind == "fig8":
        chain = preset(name, _axis_params(axis, value, params))
        return [log_negativity(studies.stationary_covariance(chain))]
    if kind == "config":
        chain = parse_chain(params.pop("__doc__"))
        if axis == "loss":
            eta = math.sqrt(1 - value)
            chain = chain.replace(link_etas=(eta,) * len(chain.link_etas))
        else:
            raise ChainError(f"--config sweeps support only the loss axis, got {axis}")
        return _rate_row(chain)[0]
    chain = preset(name, _geometry_defaults(name, _axis_params(axis, value, params)))
    return _rate_row(chain)[0]


def run_sweep(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_sweep_row(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def cmd_sweep(args):
    if args.axis is None:
        raise UsageError("sweep: --axis is required")
    if not args.grid:
        raise UsageError("sweep: --grid is required")
    grid = parse_grid(args.grid)
    name = args.preset
    base = _params(args)

    if args.axis == "time":
        if name not in FIGURE_PRESETS or not name.startswith("fig8"):
            raise UsageError("time sweeps are available for the fig8_* presets")
        if grid[0] != 0.0:
            raise UsageError("--grid: time grids must start at 0")
        rows = studies.entanglement_trajectory(name, grid, eta=base.get("eta", 1.0), dt=args.dt)
        return ["t", "E_N", "Delta_EPR", "error"], [[*r, ""] for r in rows], {"axis": "time"}

    if name == "fig6":
        if args.axis != "loss":
            raise UsageError("fig6 sweeps run along the loss axis")
        kind, columns = "fig6", ["C_single_loop", "C_double_loop",
                                 "C_single_loop_c", "C_double_loop_c"]
    elif name == "fig7":
        kind, columns = "fig7", ["n_1", "n_2"]
    elif name and name.startswith("fig8"):
        kind, columns = "fig8", ["E_N"]
    elif args.config:
        kind = "config"
        try:
            base["__doc__"] = Path(args.config).read_text()
        except OSError as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc.strerror}") from None
        columns = _rate_row(parse_chain(base["__doc__"]))[1]
    elif name in GEOMETRY_PRESETS:
        kind = "geometry"
        columns = _rate_row(preset(name, _geometry_defaults(name, dict(base))))[1]
    else:
        raise UsageError("sweep needs --preset or --config")

    axis_column = {"loss": "loss", "coupling": "g", "phase": "phi"}[args.axis]
    tasks = [(kind, name, base, args.axis, v) for v in grid]
    results = run_sweep(tasks, args.jobs or os.cpu_count() or 1)
    rows = []
    for v, (values, error) in zip(grid, results):
        values = values if values is not None else [None] * len(columns)
        rows.append([v, *values, error])
    return [axis_column, *columns, "error"], rows, {"axis": args.axis}


HANDLERS = {
    "build": cmd_build,
    "rates": cmd_rates,
    "evolve": cmd_evolve,
    "steady": cmd_steady,
    "cooperativity": cmd_cooperativity,
    "entangle": cmd_entangle,
    "squeeze": cmd_squeeze,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
    "delays": cmd_delays,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cascadesim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--preset", choices=PRESETS)
        p.add_argument("--config", help="JSON chain document")
        p.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="extra preset parameter (repeatable), e.g. g1=0.5")
        p.add_argument("--eta", type=float, help="amplitude transmission per link")
        p.add_argument("--g", type=float, help="coherent coupling (fig7)")
        p.add_argument("--phi", type=float, help="loop phase (rad)")
        p.add_argument("--pump", action="store_true", help="pump co-propagates with the probe")
        p.add_argument("--out", help="output CSV path (default stdout)")
        p.add_argument("--axis", choices=AXES)
        p.add_argument("--grid", help="start:stop:count")
        p.add_argument("--t-max", type=float, default=10.0)
        p.add_argument("--dt", type=float)
        p.add_argument("--dims", type=int, default=10)
        p.add_argument("--tol", type=float, default=1e-3)
        p.add_argument("--jobs", type=int)
        p.add_argument("--delays", help="per-pass arrival times tau1,tau2,...")
        p.add_argument("--delay-order", choices=("1", "exact"), default="1")
        p.add_argument("--threshold", type=float, default=0.1)
        p.add_argument("--scheme", choices=SQUEEZE_SCHEMES, default="three_pass")
        p.add_argument("--emit-plotscript", metavar="PATH",
                       help="also write a gnuplot script for the CSV")
    return parser


def _emit(args, table):
    columns, rows, extra = table
    buf = io.StringIO()
    write_csv(buf, columns, rows, _meta(args, extra))
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if args.emit_plotscript:
        Path(args.emit_plotscript).write_text(plot_script(args.out or "data.csv", columns))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _emit(args, HANDLERS[args.command](args))
        return 0
    except _Failed as exc:
        _emit(args, exc.table)
        print(f"cascadesim: {exc}", file=sys.stderr)
        return 2
    except ChainError as exc:
        print(f"cascadesim: error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, ArithmeticError) as exc:
        print(f"cascadesim: numerical error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"cascadesim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
