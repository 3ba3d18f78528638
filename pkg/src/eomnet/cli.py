"""Batch command-line front end.

Frequencies given on the command line are detunings in units of the
spec's ``kappa_ref``, measured in each mode's rotating frame: the physical
signal frequency at cavity i is its resonance plus omega.

Exit status: 0 success, 1 invalid input, 2 numerical failure, 3 a preset's
acceptance checks failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import circulator_check, optimize_isolation
from .errors import ConfigError, InvalidSpecError, TopologyError
from .model import PRESETS, SystemSpec, preset, require_valid, with_loop_phase
from .reduction import check_nonreciprocity_conditions, eliminate_cavity3
from .scattering import scattering_matrix, sweep

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 1, 2, 3
MAX_COUNT = 10**6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in parameter set")
    src.add_argument("--spec", metavar="PATH", help="JSON system description")
    common.add_argument("--theta", type=float, help="override the loop phase (radians)")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")

    p = _Parser(prog="eomnet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"eomnet {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", parents=[common], help="transmission sweep")
    sp.add_argument("--omega", nargs=2, type=float, metavar=("MIN", "MAX"), default=[-4.0, 4.0])
    sp.add_argument("--count", type=int, default=1001)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sub.add_parser("verify", parents=[common], help="nonreciprocity conditions report")

    sc = sub.add_parser("circulate", parents=[common], help="circulation direction at given frequencies")
    sc.add_argument("--omega", nargs="+", type=float, metavar="W", default=[-0.5, 0.5])
    sc.add_argument("--pass-min", type=float, default=0.85)
    sc.add_argument("--leak-max", type=float, default=0.1)

    so = sub.add_parser("optimize", parents=[common], help="maximise isolation over free couplings")
    so.add_argument("--free", nargs="+", default=["strengths"],
                    help="parameter handles: strengths, phases, theta, strength:CAV:MECH, phase:CAV:MECH")
    so.add_argument("--target", type=float, default=0.5, help="target detuning")
    so.add_argument("--direction", nargs=2, default=["a2", "a1"], metavar=("SRC", "DST"))
    so.add_argument("--seed", type=int, default=0)
    so.add_argument("--max-evals", type=int, default=2000)
    so.add_argument("--history", metavar="PATH", help="write evaluation history CSV here")

    sub.add_parser("preset-dump", parents=[common], help="canonical JSON of a spec")
    return p


def load_spec(args) -> SystemSpec:
    if args.preset:
        spec = preset(args.preset)
    else:
        try:
            text = Path(args.spec).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.spec}: {exc.strerror}") from None
        spec = SystemSpec.from_json(text)
    require_valid(spec)
    if args.theta is not None:
        spec = with_loop_phase(spec, args.theta)
    return spec


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


# -- commands ----------------------------------------------------------


def cmd_spectrum(args, spec) -> int:
    if not 2 <= args.count <= MAX_COUNT:
        raise UsageError(f"--count must be in [2, {MAX_COUNT}]")
    grid = sweep(spec, args.omega[0], args.omega[1], args.count)
    _emit(grid.to_csv() if args.format == "csv" else grid.to_json(), args.out)
    return EXIT_OK


def _isolator_checks(spec: SystemSpec, forward_at_plus: bool) -> list[dict]:
    # T[0, 1] is a2 -> a1, T[1, 0] is a1 -> a2
    checks = []
    for w in (0.5, -0.5):
        t = scattering_matrix(spec, w).t
        hi, lo = (t[0, 1], t[1, 0]) if (w > 0) == forward_at_plus else (t[1, 0], t[0, 1])
        checks.append({"name": f"peak_omega_{w:+g}", "omega": w, "open": float(hi), "blocked": float(lo),
                       "passed": bool(hi >= 0.9 and lo <= 0.02)})
    return checks


def _circulator_checks(spec: SystemSpec, cw_at_minus: bool) -> list[dict]:
    checks = []
    for w in (-0.5, 0.5):
        rep = circulator_check(spec, w)
        want = "clockwise" if (w < 0) == cw_at_minus else "counterclockwise"
        checks.append({"name": f"circulation_omega_{w:+g}", "omega": w, "direction": rep.direction.value,
                       "expected": want, "trio": list(rep.trio), "leakage": rep.leakage,
                       "passed": bool(rep.passed and rep.direction.value == want)})
    return checks


def cmd_verify(args, spec) -> int:
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        n_cav = len(spec.cavity_ids())
        reduced = eliminate_cavity3(spec) if n_cav == 3 else spec
        report = check_nonreciprocity_conditions(reduced)
    caught = sorted({str(w.message) for w in rec})
    out = {"spec_digest": spec.digest(), "kappa_ref": spec.kappa_ref,
           "reduced_from_modes": spec.n if reduced is not spec else None,
           "report": report.to_dict(), "warnings": caught}

    name = args.preset if args.theta is None else None
    status = EXIT_OK
    if name:
        if name.startswith("fig2"):
            checks = _isolator_checks(spec, forward_at_plus=name == "fig2_theta_half_pi")
            imp = report.impedance["max_residual"]
            checks.append({"name": "impedance_residual", "value": imp, "passed": bool(imp < 0.1)})
        else:
            checks = _circulator_checks(spec, cw_at_minus=name == "fig4_theta_half_pi")
        suite_ok = all(c["passed"] for c in checks)
        out["acceptance"] = {"preset": name, "checks": checks, "passed": suite_ok}
        if not suite_ok:
            status = EXIT_ACCEPTANCE
    _emit(dumps(out), args.out)
    return status


def cmd_circulate(args, spec) -> int:
    reports = [circulator_check(spec, w, pass_min=args.pass_min, leak_max=args.leak_max).to_dict()
               for w in args.omega]
    _emit(dumps({"spec_digest": spec.digest(), "kappa_ref": spec.kappa_ref, "reports": reports}), args.out)
    return EXIT_OK


def cmd_optimize(args, spec) -> int:
    res = optimize_isolation(spec, args.free, args.target, tuple(args.direction),
                             seed=args.seed, max_evals=args.max_evals)
    out = {
        "best_spec": res.best_spec.to_dict(),
        "best_params": res.best_params,
        "parameter_order": list(res.handles),
        "best_objective": res.best_objective,
        "start_objective": res.start_objective,
        "evaluations": res.evaluations,
        "converged": res.converged,
        "seed": args.seed,
        "objective_note": "isolation dB minus 100 per dB of insertion loss beyond 3 dB (engineering default)",
    }
    _emit(dumps(out), args.out)
    if args.history:
        _emit(res.history_csv(), args.history)
    return EXIT_OK


def cmd_preset_dump(args, spec) -> int:
    _emit(spec.to_json(), args.out)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "circulate": cmd_circulate,
    "optimize": cmd_optimize,
    "preset-dump": cmd_preset_dump,
}


def _fail(code: int, kind: str, exc: BaseException) -> int:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"eomnet: {kind}: {msg}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        spec = load_spec(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return COMMANDS[args.command](args, spec)
    except (UsageError, ConfigError, InvalidSpecError, TopologyError, ValueError) as exc:
        return _fail(EXIT_INPUT, "error", exc)
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERIC, "numerical failure", exc)
    except OSError as exc:
        return _fail(EXIT_INPUT, "error", exc)


if __name__ == "__main__":
    sys.exit(main())
