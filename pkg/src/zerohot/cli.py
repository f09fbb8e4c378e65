"""Command-line front end.

Exit status is 0 on success, 1 for invalid input and 2 for size, convergence
or analysis failures. Errors are written to stderr as a single line
``error: <kind>: <reason>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from zerohot import exact_qa
from zerohot.encoding import (
    ONE_HOT,
    ZERO_HOT,
    Infeasible,
    decode,
    encode_one_hot,
    encode_zero_hot,
    is_feasible,
    lambda_big,
    model_to_dict,
    spin_ground_states,
    verify_energy_consistency,
)
from zerohot.exceptions import AnalysisError, InputError, SizeError
from zerohot.meanfield import (
    MFParams,
    default_temperature_grid,
    detect_first_order,
    gamma_T_boundary,
    rho1_threshold,
    standard_branches,
    sweep_control,
    sweep_rows,
)
from zerohot.meanfield.transitions import SWEEP_COLUMNS as MF_COLUMNS
from zerohot.meanfield.transitions import parallel_map
from zerohot.potts import brute_force_optima, load_instance, potts_energy

EXIT_OK, EXIT_INPUT, EXIT_FAILURE = 0, 1, 2
BOUNDARY_COLUMNS = ("T", "gamma_low", "gamma_high")
THRESHOLD_COLUMNS = ("q", "lambda", "rho1_threshold")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# -- output ------------------------------------------------------------------


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if not np.isfinite(v) else v
    if isinstance(v, np.ndarray):
        return [_json_value(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return v


def _table(columns, records, fmt, summary=None):
    if fmt == "json":
        doc = {"columns": list(columns), "records": [{c: r[c] for c in columns} for r in records]}
        if summary is not None:
            doc["summary"] = summary
        return json.dumps(_json_value(doc), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _note(msg):
    print(msg, file=sys.stderr)


# -- shared argument groups --------------------------------------------------


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_instance(sp, with_mode=True):
    sp.add_argument("--instance", required=True, help="instance JSON path")
    if with_mode:
        sp.add_argument("--mode", choices=(ONE_HOT, ZERO_HOT), default=ZERO_HOT)
    sp.add_argument("--lambda", dest="lam", type=float, default=None, help="penalty weight (default: lambda_big)")


def _add_solver(sp):
    sp.add_argument("--damping", type=float, default=0.5)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=_positive_int, default=100_000)
    sp.add_argument(
        "--inits",
        default=None,
        help="comma-separated init families; default: zero on the down sweep, ferro on the up sweep",
    )


def _grid(lo, hi, points, spacing):
    if points < 1:
        raise InputError("--points must be >= 1")
    if points > 1 and not hi > lo:
        raise InputError("grid maximum must exceed its minimum")
    if spacing == "log":
        if lo <= 0:
            raise InputError("log spacing needs a positive minimum")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def build_parser():
    ap = _Parser(prog="zerohot", description="Zero-hot Ising encodings, exact annealing spectra and mean-field sweeps.")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--jobs", type=_positive_int, default=1)
    ap.add_argument("--output", default="-", help="output path (default stdout)")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("encode", help="instance JSON -> Ising model JSON")
    _add_instance(sp)

    sp = sub.add_parser("verify", help="energy consistency and brute-force optimum check")
    _add_instance(sp, with_mode=False)
    sp.add_argument("--mode", choices=(ONE_HOT, ZERO_HOT, "both"), default="both")
    sp.add_argument("--trials", type=_positive_int, default=100)

    sp = sub.add_parser("penalty-sweep", help="ground-state probabilities of the isolated penalty")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--gamma-min", type=float, default=1e-3)
    sp.add_argument("--gamma-max", type=float, default=1e2)
    sp.add_argument("--points", type=int, default=300)
    sp.add_argument("--spacing", choices=("log", "linear"), default="log")

    sp = sub.add_parser("gap", help="gap above the ground level along a Gamma grid")
    _add_instance(sp)
    sp.add_argument("--gamma-min", type=float, default=1e-3)
    sp.add_argument("--gamma-max", type=float, default=3.0)
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--spacing", choices=("log", "linear"), default="linear")

    sp = sub.add_parser("anneal", help="adiabatic-limit readout on a small instance")
    _add_instance(sp)
    sp.add_argument("--gamma-final", type=float, default=1e-6)

    sp = sub.add_parser("mf-sweep", help="mean-field Gamma sweep")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--rho1", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--gamma-min", type=float, default=0.0)
    sp.add_argument("--gamma-max", type=float, default=3.0)
    sp.add_argument("--points", type=int, default=301)
    _add_solver(sp)

    sp = sub.add_parser("mf-tsweep", help="mean-field temperature sweep")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--rho1", type=float, default=1.0)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--t-min", type=float, default=None)
    sp.add_argument("--t-max", type=float, default=2.0)
    sp.add_argument("--points", type=int, default=201)
    _add_solver(sp)

    sp = sub.add_parser("mf-boundary", help="first-order region on the Gamma-T plane")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--rho1", type=float, default=1.0)
    sp.add_argument("--t-min", type=float, default=0.0)
    sp.add_argument("--t-max", type=float, default=2.0)
    sp.add_argument("--t-points", type=int, default=41)
    sp.add_argument("--gamma-max", type=float, default=3.0)
    sp.add_argument("--gamma-points", type=int, default=301)
    sp.add_argument("--damping", type=float, default=0.5)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=_positive_int, default=100_000)

    sp = sub.add_parser("mf-threshold", help="rho1 threshold of the T=0 first-order transition")
    sp.add_argument("--q", type=_int_list, required=True, help="one or more Q values, comma-separated")
    sp.add_argument("--lambda", dest="lam", type=_float_list, required=True, help="one or more lambda values")
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--gamma-max", type=float, default=3.0)
    sp.add_argument("--gamma-points", type=int, default=301)
    return ap


# -- commands ----------------------------------------------------------------


def _load(args, need_candidate):
    instance, candidate = load_instance(args.instance)
    if need_candidate and candidate is None:
        raise InputError("zero-hot encoding needs a 'candidate' field in the instance")
    return instance, candidate


def _model(args, mode=None):
    mode = mode or args.mode
    instance, candidate = _load(args, mode == ZERO_HOT)
    lam = lambda_big(instance) if args.lam is None else args.lam
    if mode == ZERO_HOT:
        return instance, encode_zero_hot(instance, candidate, lam)
    return instance, encode_one_hot(instance, lam)


def cmd_encode(args):
    _, model = _model(args)
    return json.dumps(_json_value(model_to_dict(model)), indent=2) + "\n"


def cmd_verify(args):
    modes = (ONE_HOT, ZERO_HOT) if args.mode == "both" else (args.mode,)
    instance, candidate = _load(args, args.mode == ZERO_HOT)
    if args.mode == "both" and candidate is None:
        modes = (ONE_HOT,)
        _note("note: instance has no candidate; verifying one-hot only")
    best, optima = brute_force_optima(instance)
    records, ok = [], True
    for mode in modes:
        lam = lambda_big(instance) if args.lam is None else args.lam
        model = encode_zero_hot(instance, candidate, lam) if mode == ZERO_HOT else encode_one_hot(instance, lam)
        rep = verify_energy_consistency(instance, model, args.trials, args.seed)
        argmin_ok = None
        if model.n_spins <= 22:
            _, states = spin_ground_states(model)
            argmin_ok = all(
                is_feasible(model, s) and tuple(int(v) for v in decode(model, s)) in optima for s in states
            )
        ok &= rep.passed and argmin_ok is not False
        records.append(
            {
                "mode": mode,
                "lambda": lam,
                "n_spins": model.n_spins,
                "trials": rep.trials,
                "max_deviation": rep.max_deviation,
                "consistent": rep.passed,
                "potts_minimum": best,
                "argmin_decodes_to_optimum": argmin_ok,
            }
        )
    cols = tuple(records[0])
    return _table(cols, records, args.format), (EXIT_OK if ok else EXIT_FAILURE)


def cmd_penalty_sweep(args):
    grid = _grid(args.gamma_min, args.gamma_max, args.points, args.spacing)
    curve = exact_qa.penalty_probability_sweep(args.q, args.lam, grid)
    cols = exact_qa.SWEEP_COLUMNS
    records = [dict(zip(cols, row)) for row in curve.rows(cols)]
    return _table(cols, records, args.format)


def cmd_gap(args):
    _, model = _model(args)
    grid = _grid(args.gamma_min, args.gamma_max, args.points, args.spacing)
    g_at, gap, curve = exact_qa.min_gap(model, grid)
    _note(f"min gap {gap!r} at gamma {g_at!r}")
    cols = exact_qa.SWEEP_COLUMNS
    records = [dict(zip(cols, row)) for row in curve.rows(cols)]
    return _table(cols, records, args.format, {"gamma_at_min": g_at, "min_gap": gap})


def cmd_anneal(args):
    instance, model = _model(args)
    s = exact_qa.adiabatic_solution(model, args.gamma_final)
    if isinstance(s, Infeasible):
        rec = {"feasible": False, "assignment": "", "potts_energy": None, "infeasible_sites": " ".join(map(str, s.sites))}
    else:
        rec = {
            "feasible": True,
            "assignment": " ".join(str(int(v)) for v in s),
            "potts_energy": potts_energy(instance, s),
            "infeasible_sites": "",
        }
    return _table(tuple(rec), [rec], args.format)


def _branches(args, p, control, grid):
    kw = dict(damping=args.damping, tol=args.tol, max_iter=args.max_iter, seed=args.seed)
    if args.inits is None:
        return standard_branches(p, control, grid, **kw)
    inits = [s.strip() for s in args.inits.split(",") if s.strip()]
    return sweep_control(p, control, grid, "down", inits, **kw) + sweep_control(p, control, grid, "up", inits, **kw)


def _sweep_output(args, branches):
    rep = detect_first_order(branches)
    summary = {
        "first_order": rep.first_order,
        "jump_size": rep.jump_size,
        "hysteresis_interval": list(rep.hysteresis_interval),
        "crossing_point": rep.crossing_point,
        "branches": [{"branch_id": k, "direction": b.direction, "init": b.init} for k, b in enumerate(branches)],
    }
    _note(
        f"first_order={rep.first_order} jump={rep.jump_size:.6g} "
        f"hysteresis={list(rep.hysteresis_interval)} crossing={rep.crossing_point}"
    )
    return _table(MF_COLUMNS, sweep_rows(branches), args.format, summary)


def cmd_mf_sweep(args):
    p = MFParams.symmetric(args.q, args.rho1, args.lam, 0.0, args.t)
    grid = _grid(args.gamma_min, args.gamma_max, args.points, "linear")
    return _sweep_output(args, _branches(args, p, "gamma", grid))


def cmd_mf_tsweep(args):
    p = MFParams.symmetric(args.q, args.rho1, args.lam, args.gamma, 0.0)
    if args.t_min is None and args.t_max == 2.0 and args.points == 201:
        grid = default_temperature_grid()
    else:
        lo = args.t_max / args.points if args.t_min is None else args.t_min
        grid = _grid(lo, args.t_max, args.points, "linear")
    return _sweep_output(args, _branches(args, p, "temperature", grid))


def cmd_mf_boundary(args):
    T = _grid(args.t_min, args.t_max, args.t_points, "linear")
    G = _grid(0.0, args.gamma_max, args.gamma_points, "linear")
    kw = dict(damping=args.damping, tol=args.tol, max_iter=args.max_iter, seed=args.seed)
    pb = gamma_T_boundary(args.q, args.lam, args.rho1, T, G, jobs=args.jobs, **kw)
    if pb.unconverged.any():
        _note(f"note: unconverged points at {int(pb.unconverged.sum())} temperatures")
    return _table(BOUNDARY_COLUMNS, pb.rows(), args.format)


def _threshold_task(task):
    q, lam, tol, grid = task
    return rho1_threshold(q, lam, tol, grid)


def cmd_mf_threshold(args):
    G = _grid(0.0, args.gamma_max, args.gamma_points, "linear")
    # validate everything before the expensive part
    for q in args.q:
        MFParams.symmetric(q, 1.0, args.lam[0])
    for lam in args.lam:
        MFParams.symmetric(args.q[0], 1.0, lam)
    tasks = [(q, lam, args.tol, G) for q in args.q for lam in args.lam]
    values = parallel_map(_threshold_task, tasks, args.jobs)
    records = [{"q": q, "lambda": lam, "rho1_threshold": v} for (q, lam, _, _), v in zip(tasks, values)]
    return _table(THRESHOLD_COLUMNS, records, args.format)


COMMANDS = {
    "encode": cmd_encode,
    "verify": cmd_verify,
    "penalty-sweep": cmd_penalty_sweep,
    "gap": cmd_gap,
    "anneal": cmd_anneal,
    "mf-sweep": cmd_mf_sweep,
    "mf-tsweep": cmd_mf_tsweep,
    "mf-boundary": cmd_mf_boundary,
    "mf-threshold": cmd_mf_threshold,
}


def run(argv=None):
    """Parse ``argv``, dispatch and return the exit status."""
    try:
        args = build_parser().parse_args(argv)
        out = COMMANDS[args.command](args)
        code = EXIT_OK
        if isinstance(out, tuple):
            out, code = out
        _emit(out, args.output)
        return code
    except InputError as exc:
        _note(f"error: input: {_one_line(exc)}")
        return EXIT_INPUT
    except SizeError as exc:
        _note(f"error: size: {_one_line(exc)}")
        return EXIT_FAILURE
    except AnalysisError as exc:
        _note(f"error: analysis: {_one_line(exc)}")
        return EXIT_FAILURE


def _one_line(exc):
    return " ".join(str(exc).split())


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
