"""Command-line front end.

Subcommands: ``evolve``, ``brach``, ``ancilla``, ``closed``, ``compare``,
``check``. Parameters come from built-in defaults, then an optional
``--config`` file of ``key = value`` lines, then command-line flags.

Exit codes: 0 success, 1 validation error, 2 numerical-tolerance breach,
3 diagnostic-suite failure.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import ancilla, brachistochrone as bc, diagnostics, lindblad as lb, nqubit
from .errors import DimensionError, NotHermitianError, ToleranceError, ValidationError
from .qalg import pauli_matrix
from .trajectory import TrajectoryRecord, format_number, read_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TOLERANCE = 2
EXIT_SUITE = 3

SOUTH_POLE = (0.0, 0.0, -1.0)


# ---------------------------------------------------------------------------
# option parsing
# ---------------------------------------------------------------------------


def _vector(n: int | None = None, kind: Callable = float):
    def parse(text):
        if isinstance(text, (list, tuple)):
            vals = [kind(x) for x in text]
        else:
            text = str(text).strip()
            vals = [kind(x.strip()) for x in text.split(",")] if text else []
        if n is not None and len(vals) != n:
            raise ValidationError(f"expected {n} comma-separated values, got {len(vals)}")
        return vals
    return parse


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def _lindblad_list(text):
    """``'lx,ly,lz; lx,ly,lz'`` with complex entries such as ``0.5j``."""
    text = str(text).strip()
    if not text:
        return []
    return [_vector(3, complex)(part) for part in text.split(";") if part.strip()]


def _sign(text):
    v = int(float(text))
    if v not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    return v


@dataclass(frozen=True)
class Option:
    parse: Callable
    default: Any
    help: str
    flag: bool = False


OPTIONS = {
    "out": Option(str, None, "output path (data goes to stdout when omitted)"),
    "format": Option(str, "csv", "output format: csv or json"),
    "dt": Option(float, 1e-3, "time step / grid spacing"),
    "t_max": Option(float, 5.0, "final time"),
    "omega": Option(float, 1.0, "Hamiltonian strength omega"),
    "gammas": Option(_vector(3), "1,0,0", "Lindblad magnitudes, descending-eigenvalue order"),
    "angle_n": Option(_vector(None, int), "0,1,2,3,4,5", "initial angles k*pi/6 to run"),
    "tau": Option(float, 1e-3, "collision duration tau"),
    "steps": Option(int, 5000, "number of collisions"),
    "p": Option(float, 1.0, "coupling p"),
    "q": Option(float, 0.0, "coupling q"),
    "b": Option(float, 1.0, "ancilla polarization b along z"),
    "n_qubits": Option(_vector(None, int), "1,2,3", "total qubit counts"),
    "threshold": Option(float, 0.99, "fidelity threshold"),
    "seed": Option(int, 0, "seed for randomized suites"),
    "hamiltonian": Option(_vector(3), None, "Pauli coefficients hx,hy,hz (default 0,0,omega)"),
    "lindblad": Option(_lindblad_list, "", "Lindblad vectors 'lx,ly,lz;...' (complex allowed)"),
    "r0": Option(_vector(3), None, "initial Bloch vector"),
    "sign": Option(_sign, 1, "branch of the optimal Hamiltonian (+1/-1)"),
    "stride": Option(int, 1, "record every k-th step"),
    "parallel": Option(_bool, False, "run the parallel (r x s = 0) case and compare with its closed form", True),
    "convergence": Option(_bool, False, "also run with tau/2 and report the error ratio", True),
}

COMMANDS = {
    "evolve": ("integrate the master equation for fixed H and L",
               ["dt", "t_max", "omega", "hamiltonian", "lindblad", "r0"], {"r0": "0,0,1"}),
    "brach": ("time-optimal one-qubit trajectories for a family of initial angles",
              ["dt", "t_max", "omega", "gammas", "angle_n", "r0", "sign", "stride", "parallel"],
              {"r0": "0,0,0.8", "out": "brach.csv"}),
    "ancilla": ("collision model with a re-prepared ancilla",
                ["tau", "steps", "p", "q", "b", "r0", "convergence"], {"r0": "0,0,0"}),
    "closed": ("closed n-qubit model: fidelity curves and optimal times",
               ["n_qubits", "omega", "dt", "t_max"], {"t_max": str(np.pi)}),
    "compare": ("repeated-measurement vs single-measurement fidelity curves",
                ["n_qubits", "omega", "p", "tau", "threshold", "dt", "t_max"],
                {"t_max": str(np.pi), "p": None, "tau": None}),
    "check": ("run the randomized invariant suites", ["seed"], {}),
}

COMMON = ["out", "format"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qbrach", description="Time-optimal evolution of open quantum systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (helptext, keys, overrides) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("--config", default=None, help="key = value file; flags override it")
        for key in COMMON + keys:
            opt = OPTIONS[key]
            default = overrides.get(key, opt.default)
            flag = "--" + key.replace("_", "-")
            if opt.flag:
                p.add_argument(flag, dest=key, action="store_const", const="true", default=None,
                               help=f"{opt.help} (default: {default})")
            else:
                p.add_argument(flag, dest=key, default=None, help=f"{opt.help} (default: {default})")
    return parser


def read_config(path) -> dict[str, str]:
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ValidationError(f"cannot read config file: {exc}") from exc
    with fh:
        for num, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{num}: expected 'key = value'")
            key, value = (x.strip() for x in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, config file and flags, and parse every value."""
    _, keys, overrides = COMMANDS[args.command]
    allowed = COMMON + keys
    cfg_file = read_config(args.config) if args.config else {}
    unknown = sorted(set(cfg_file) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown config keys for '{args.command}': {', '.join(unknown)}")
    params = {}
    for key in allowed:
        opt = OPTIONS[key]
        raw = getattr(args, key)
        if raw is None:
            raw = cfg_file.get(key, overrides.get(key, opt.default))
        try:
            params[key] = None if raw is None else opt.parse(raw)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"invalid value for {key}: {raw!r} ({exc})") from exc
    if params["format"] not in ("csv", "json"):
        raise ValidationError("format must be csv or json")
    return params


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _summary(summary: dict, params) -> None:
    """Summary JSON goes to stdout, or stderr when data occupies stdout."""
    text = _dump_json(summary)
    if params["out"] is None:
        sys.stderr.write(text)
    else:
        sys.stdout.write(text)


def validate_trajectory_file(path, fmt: str = "csv", norm_tol: float = 1e-9) -> None:
    """Re-read an emitted trajectory file and check its basic invariants."""
    if fmt == "json":
        with open(path) as fh:
            samples = json.load(fh)["samples"]
        cols = {k: np.array([np.nan if s[k] is None else s[k] for s in samples], dtype=float)
                for k in samples[0] if k != "lindblad"}
    else:
        cols = read_csv(path)
    t = cols["t"]
    if len(t) > 1 and np.any(np.diff(t) <= 0):
        raise ToleranceError(f"{path}: time column is not strictly increasing")
    for name, col in cols.items():
        if not np.all(np.isfinite(col)) and not np.all(np.isnan(col)):
            raise ToleranceError(f"{path}: column {name} has missing or non-finite values")
    r2 = cols["r_x"] ** 2 + cols["r_y"] ** 2 + cols["r_z"] ** 2
    if np.max(np.sqrt(r2)) > 1 + norm_tol:
        raise ToleranceError(f"{path}: Bloch vector outside the unit ball")
    if np.max(np.abs(cols["purity"] - 0.5 * (1 + r2))) > 1e-12:
        raise ToleranceError(f"{path}: purity column inconsistent with r")


def _write_record(rec: TrajectoryRecord, path, fmt: str, **validate_kw) -> None:
    rec.validate(**validate_kw)
    text = rec.to_csv() if fmt == "csv" else rec.to_json()
    _emit(text, path)
    if path is not None:
        validate_trajectory_file(path, fmt)


def _write_table(header: list, rows: np.ndarray, path, fmt: str) -> None:
    rows = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(rows)):
        raise ToleranceError("non-finite values in output table")
    if header[0] == "t" and len(rows) > 1 and np.any(np.diff(rows[:, 0]) <= 0):
        raise ToleranceError("time column is not strictly increasing")
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(format_number(x) for x in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = _dump_json({h: [float(x) for x in rows[:, i]] for i, h in enumerate(header)})
    _emit(text, path)


def _sibling(path, suffix: str) -> str:
    stem, _ = os.path.splitext(path)
    return f"{stem}{suffix}"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_evolve(params) -> int:
    omega = params["omega"]
    h = np.array(params["hamiltonian"] if params["hamiltonian"] is not None else [0.0, 0.0, omega])
    ls = [np.array(l) for l in params["lindblad"]]
    r0 = np.array(params["r0"])
    if np.linalg.norm(r0) > 1 + 1e-12:
        raise ValidationError("|r0| must not exceed 1")
    dt, t_max = params["dt"], params["t_max"]
    if not (dt > 0 and t_max > 0 and dt < t_max):
        raise ValidationError("need 0 < dt < t_max")
    n_steps = int(np.floor(t_max / dt + 1e-9))
    states = lb.evolve_density(bc.density_from_bloch(r0), pauli_matrix(h.astype(complex)),
                               [pauli_matrix(l) for l in ls], dt, n_steps)
    rs = np.array([bc.bloch_from_density(s) for s in states])
    rec = TrajectoryRecord(t=np.arange(n_steps + 1) * dt, r=rs, spacing=dt,
                           h=np.tile(h, (n_steps + 1, 1)))
    norms = np.linalg.norm(rs, axis=1)
    summary = {
        "command": "evolve",
        "rows": n_steps + 1,
        "max_norm_drift": float(np.max(np.abs(norms - norms[0]))),
        "final_r": rs[-1].tolist(),
    }
    _write_record(rec, params["out"], params["format"])
    _summary(summary, params)
    return EXIT_OK


def _brach_config(params) -> bc.BrachConfig:
    return bc.BrachConfig(omega=params["omega"], gammas=tuple(params["gammas"]), sign=params["sign"],
                          dt=params["dt"], t_max=params["t_max"])


def cmd_brach(params) -> int:
    cfg = _brach_config(params)
    out = params["out"] or "brach.csv"
    ext = "." + params["format"]
    if params["parallel"]:
        r0 = np.array(params["r0"])
        rec = bc.integrate(cfg, r0, -r0 / np.linalg.norm(r0), params["stride"], SOUTH_POLE)
        s_hat = rec.s[0] / np.linalg.norm(rec.s[0])
        along = bc.rotating_frame(rec) @ s_hat
        g = cfg.gammas
        closed = bc.parallel_case_solution(rec.t, along[0], (g[0], g[2]))
        path = _sibling(out, "_parallel" + ext)
        _write_record(rec, path, params["format"], conservation_tol=cfg.conservation_tol)
        summary = {
            "command": "brach",
            "mode": "parallel",
            "file": path,
            "max_deviation_from_closed_form": float(np.max(np.abs(along - closed))),
            "max_conservation_drift": rec.diagnostics["max_conservation_drift"],
        }
    else:
        runs = []
        for k in params["angle_n"]:
            angle = k * np.pi / 6
            rec = bc.integrate(cfg, params["r0"], bc.initial_costate(params["r0"], angle),
                               params["stride"], SOUTH_POLE)
            path = _sibling(out, f"_n{k}{ext}")
            _write_record(rec, path, params["format"], conservation_tol=cfg.conservation_tol)
            rot = bc.rotating_frame(rec)[-1]
            runs.append({
                "angle_n": k,
                "initial_angle": angle,
                "file": path,
                "max_conservation_drift": rec.diagnostics["max_conservation_drift"],
                "max_eigen_residual": rec.diagnostics["max_eigen_residual"],
                "branch_changes": rec.diagnostics["branch_changes"],
                "final_r": rec.r[-1].tolist(),
                "final_r_rotating": rot.tolist(),
                "final_distance": float(np.linalg.norm(rec.r[-1] - SOUTH_POLE)),
                "final_distance_rotating": float(np.linalg.norm(rot - SOUTH_POLE)),
            })
        summary = {"command": "brach", "mode": "family", "runs": runs}
    summary_path = _sibling(out, "_summary.json")
    _emit(_dump_json(summary), summary_path)
    sys.stdout.write(_dump_json(summary))
    return EXIT_OK


def _micro_run(params, tau, steps):
    c, b = ancilla.special_case_build(params["p"], params["q"], params["b"])
    return ancilla.run_micro(ancilla.MicroConfig(tau, steps, c, b), params["r0"])


def cmd_ancilla(params) -> int:
    tau, steps = params["tau"], params["steps"]
    rec = _micro_run(params, tau, steps)
    dev = ancilla.damping_deviation(rec, params["p"], params["b"], tau) if rec.r[0, 0] == rec.r[0, 1] == 0 else None
    summary = {
        "command": "ancilla",
        "tau": tau,
        "steps": steps,
        "final_r": rec.r[-1].tolist(),
        "final_fidelity": float(rec.fidelity[-1]),
    }
    if dev is not None:
        summary["max_damping_deviation"] = float(np.max(dev))
        summary["damping_deviation"] = [float(x) for x in dev]
    if params["convergence"]:
        if dev is None:
            raise ValidationError("the convergence check needs r0 on the z axis")
        half = _micro_run(params, tau / 2, 2 * steps)
        dev_half = ancilla.damping_deviation(half, params["p"], params["b"], tau / 2)
        summary["max_damping_deviation_half_tau"] = float(np.max(dev_half))
        summary["error_ratio"] = float(np.max(dev) / np.max(dev_half)) if np.max(dev_half) > 0 else None
    _write_record(rec, params["out"], params["format"])
    if params["out"] is not None:
        _emit(_dump_json(summary), _sibling(params["out"], "_summary.json"))
    # the per-sample deviation lives in the summary file only
    _summary({k: v for k, v in summary.items() if k != "damping_deviation"}, params)
    return EXIT_OK


def _grid(dt, t_max, extra=()):
    if not (dt > 0 and t_max > 0):
        raise ValidationError("need positive dt and t_max")
    n = int(np.floor(t_max / dt + 1e-9))
    g = np.arange(n + 1) * dt
    extra = [x for x in extra if 0 <= x <= t_max]
    return np.unique(np.concatenate([g, extra]))


def cmd_closed(params) -> int:
    rows = []
    times = {}
    for n in params["n_qubits"]:
        cfg = nqubit.NQubitConfig(n, params["omega"])
        T = nqubit.optimal_time(cfg)
        times[str(n)] = T
        curve = nqubit.fidelity_curve(cfg, _grid(params["dt"], params["t_max"], [T]))
        if np.any(curve[:, 1] > 1 + 1e-12) or np.any(curve[:, 1] < -1e-12):
            raise ToleranceError("fidelity outside [0, 1]")
        rows += [(n, t, f) for t, f in curve]
    _write_table(["n", "t", "fidelity"], rows, params["out"], params["format"])
    _summary({"command": "closed", "optimal_time": times}, params)
    return EXIT_OK


def dashed_fidelity(t, rate):
    """Repeated-measurement model from the up state with b = 1: ``1 - exp(-rate t)``."""
    return 1 - np.exp(-rate * np.asarray(t, dtype=float))


def solid_fidelity(t, n, omega):
    g = np.sqrt(2.0 ** (n - 1)) * omega
    return np.sin(g * np.asarray(t, dtype=float)) ** 2


def first_crossing(f: Callable, grid, xtol: float = 1e-13):
    """First sign change of ``f`` on ``grid`` (excluding ``grid[0]``), refined by bisection."""
    vals = f(grid)
    for k in range(2, len(grid)):
        if vals[k - 1] == 0:
            return float(grid[k - 1])
        if np.sign(vals[k]) != np.sign(vals[k - 1]) and vals[k] != 0:
            lo, hi = grid[k - 1], grid[k]
            flo = vals[k - 1]
            while hi - lo > xtol:
                mid = 0.5 * (lo + hi)
                fm = f(np.array([mid]))[0]
                if np.sign(fm) == np.sign(flo):
                    lo, flo = mid, fm
                else:
                    hi = mid
            return float(0.5 * (lo + hi))
    return None


def compare_models(n_values, omega, rate, threshold, t_max, dt):
    """Crossings and threshold arrival times for the dashed and solid curves."""
    grid = _grid(dt, t_max)
    if threshold < 1:
        t_dashed = float(-np.log(1 - threshold) / rate)
    else:
        t_dashed = None
    report = {"rate": rate, "omega": omega, "threshold": threshold,
              "dashed_threshold_time": t_dashed, "solid": {}}
    for n in n_values:
        g = np.sqrt(2.0 ** (n - 1)) * omega
        t_solid = float(np.arcsin(np.sqrt(threshold)) / g) if 0 <= threshold <= 1 else None
        cross = first_crossing(lambda t: dashed_fidelity(t, rate) - solid_fidelity(t, n, omega), grid)
        if t_solid is None and t_dashed is None:
            leader = "neither"
        elif t_dashed is None or (t_solid is not None and t_solid < t_dashed):
            leader = "single_measurement"
        elif t_solid is None or t_dashed < t_solid:
            leader = "repeated_measurement"
        else:
            leader = "tie"
        report["solid"][str(n)] = {
            "crossing_time": cross,
            "crossing_found": cross is not None,
            "threshold_time": t_solid,
            "first_to_threshold": leader,
            "optimal_time": float(np.pi / (2 * g)),
        }
    return report


def cmd_compare(params) -> int:
    omega = params["omega"]
    p, tau = params["p"], params["tau"]
    if p is None and tau is None:
        tau = 1e-2
    if p is None:
        p = float(np.sqrt(omega / (4 * tau)))
    if tau is None:
        tau = float(omega / (4 * p**2))
    rate = 4 * p**2 * tau
    if not rate > 0:
        raise ValidationError("the repeated-measurement rate 4 p^2 tau must be positive")
    report = compare_models(params["n_qubits"], omega, rate, params["threshold"], params["t_max"], params["dt"])
    report.update({"command": "compare", "p": p, "tau": tau})
    for n, item in report["solid"].items():
        if not item["crossing_found"]:
            logger.warning("no crossing found for n=%s in (0, %g]", n, params["t_max"])
    grid = _grid(params["dt"], params["t_max"])
    cols = [grid, dashed_fidelity(grid, rate)] + [solid_fidelity(grid, n, omega) for n in params["n_qubits"]]
    header = ["t", "dashed"] + [f"solid_n{n}" for n in params["n_qubits"]]
    _write_table(header, np.column_stack(cols), params["out"], params["format"])
    _summary(report, params)
    return EXIT_OK


def cmd_check(params, generator=lb.adjoint_generator) -> int:
    results = diagnostics.run_all(params["seed"], generator=generator)
    text = "".join(r.line() + "\n" for r in results)
    ok = all(r.passed for r in results)
    text += ("all suites passed\n" if ok else "suite failures detected\n")
    _emit(text, params["out"])
    if params["out"] is not None:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_SUITE


HANDLERS = {
    "evolve": cmd_evolve,
    "brach": cmd_brach,
    "ancilla": cmd_ancilla,
    "closed": cmd_closed,
    "compare": cmd_compare,
    "check": cmd_check,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        params = resolve(args)
        return HANDLERS[args.command](params)
    except ToleranceError as exc:
        print(f"tolerance breach: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (ValidationError, DimensionError, NotHermitianError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
