"""Figures of merit: isolation, circulation, spectral extrema, coupling search."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .model import ModeKind, SystemSpec, is_stable, loop_phase, with_loop_phase, wrap_phase
from .scattering import SweepGrid, scattering_matrix

#: engineering defaults, not physical constants
DEFAULT_ISOLATION_DB = 20.0
DEFAULT_PASS_MIN = 0.85
DEFAULT_LEAK_MAX = 0.1
INSERTION_LOSS_BUDGET_DB = 3.0
INSERTION_LOSS_PENALTY = 100.0
STRENGTH_BOUNDS = (0.0, 10.0)


def to_db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def _isolation_db(forward: float, backward: float) -> float:
    if forward == 0 and backward == 0:
        return 0.0
    return to_db(forward) - to_db(backward)


# -- isolation ---------------------------------------------------------


@dataclass(frozen=True)
class IsolationReport:
    omega_star: float
    forward: float
    backward: float
    forward_db: float
    backward_db: float
    isolation_db: float
    insertion_loss_db: float
    bandwidth: float
    band: tuple[float, float] | None
    threshold_db: float
    no_transmission: bool

    def to_dict(self) -> dict:
        d = {k: _json_float(v) for k, v in self.__dict__.items() if k != "band"}
        d["band"] = list(self.band) if self.band else None
        d["threshold_note"] = "engineering default, not derived from the model"
        return d


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def isolation(spec: SystemSpec, src: int | str, dst: int | str, omega: float,
              threshold_db: float = DEFAULT_ISOLATION_DB, resolution: float = 1e-3,
              step: float = 0.01, span: float = 20.0) -> IsolationReport:
    """Forward (src -> dst) versus backward transmission at ``omega``.

    The bandwidth is the contiguous frequency interval around ``omega`` where
    isolation stays at or above ``threshold_db``: found by stepping outward in
    ``step`` increments (at most ``span`` away) and then bisecting each edge
    down to ``resolution``.
    """
    i, j = spec.index(src), spec.index(dst)
    if i == j:
        raise ValueError("src and dst must differ")
    for k in (i, j):
        if spec.modes[k].kind is not ModeKind.CAVITY:
            raise ValueError(f"mode {spec.labels[k]!r} is not a cavity")
    if not threshold_db > 0:
        raise ValueError("threshold_db must be positive")

    def iso_at(w: float) -> float:
        t = scattering_matrix(spec, w).t
        return _isolation_db(float(t[j, i]), float(t[i, j]))

    t = scattering_matrix(spec, omega).t
    fwd, bwd = float(t[j, i]), float(t[i, j])
    iso = _isolation_db(fwd, bwd)

    band = None
    if iso >= threshold_db:
        edges = []
        for sign in (-1.0, 1.0):
            good, bad = omega, None
            while abs(good - omega) < span:
                probe = good + sign * step
                if iso_at(probe) >= threshold_db:
                    good = probe
                else:
                    bad = probe
                    break
            if bad is not None:
                while abs(bad - good) > resolution:
                    mid = 0.5 * (good + bad)
                    if iso_at(mid) >= threshold_db:
                        good = mid
                    else:
                        bad = mid
            edges.append(good)
        band = (edges[0], edges[1])
    return IsolationReport(
        omega_star=float(omega),
        forward=fwd,
        backward=bwd,
        forward_db=to_db(fwd),
        backward_db=to_db(bwd),
        isolation_db=iso,
        insertion_loss_db=-to_db(fwd),
        bandwidth=band[1] - band[0] if band else 0.0,
        band=band,
        threshold_db=threshold_db,
        no_transmission=fwd == 0 and bwd == 0,
    )


# -- circulator --------------------------------------------------------


class Direction(str, Enum):
    CLOCKWISE = "clockwise"
    COUNTERCLOCKWISE = "counterclockwise"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class CirculatorReport:
    """Which way a three-cavity network circulates at one frequency.

    Clockwise means a1 -> a2 -> a3 -> a1, i.e. the trio (T21, T32, T13).
    """

    omega_star: float
    direction: Direction
    trio: tuple[float, float, float]
    leakage: float
    passed: bool
    pass_min: float
    leak_max: float
    cavity_t: tuple[tuple[float, ...], ...]
    label: str | None = None

    def to_dict(self) -> dict:
        return {
            "omega_star": self.omega_star,
            "label": self.label,
            "direction": self.direction.value,
            "trio": list(self.trio),
            "leakage": self.leakage,
            "passed": self.passed,
            "pass_min": self.pass_min,
            "leak_max": self.leak_max,
            "cavity_t": [list(r) for r in self.cavity_t],
        }


def circulator_check(spec5: SystemSpec, omega: float, label: str | None = None,
                     pass_min: float = DEFAULT_PASS_MIN, leak_max: float = DEFAULT_LEAK_MAX) -> CirculatorReport:
    cav = spec5.cavity_ids()
    if len(cav) != 3:
        from .errors import TopologyError

        raise TopologyError(f"circulator check needs exactly 3 cavities, got {len(cav)}")
    t = scattering_matrix(spec5, omega).t
    c1, c2, c3 = cav
    cw = (float(t[c2, c1]), float(t[c3, c2]), float(t[c1, c3]))
    ccw = (float(t[c1, c2]), float(t[c2, c3]), float(t[c3, c1]))
    if abs(min(cw) - min(ccw)) < 1e-6:
        direction, trio, leak, passed = Direction.INDETERMINATE, cw, max(ccw), False
    elif min(cw) > min(ccw):
        direction, trio, leak = Direction.CLOCKWISE, cw, max(ccw)
        passed = min(trio) >= pass_min and leak <= leak_max
    else:
        direction, trio, leak = Direction.COUNTERCLOCKWISE, ccw, max(cw)
        passed = min(trio) >= pass_min and leak <= leak_max
    block = tuple(tuple(float(t[r, c]) for c in cav) for r in cav)
    return CirculatorReport(float(omega), direction, trio, leak, passed, pass_min, leak_max, block, label)


# -- extrema -----------------------------------------------------------


class Extremum(NamedTuple):
    omega: float
    value: float
    kind: str  # "max" or "min"
    boundary: bool


def extrema_1d(omegas: Sequence[float], values: Sequence[float]) -> list[Extremum]:
    """Local extrema by three-point comparison with parabolic refinement.

    Endpoints are reported (``boundary=True``) whenever they differ from
    their neighbour, so a monotone series yields just its two ends.
    """
    x = np.asarray(omegas, dtype=float)
    y = np.asarray(values, dtype=float)
    n = len(x)
    if n == 0:
        raise ValueError("empty grid")
    if n == 1:
        return [Extremum(float(x[0]), float(y[0]), "max", True)]
    out = []
    if y[0] != y[1]:
        out.append(Extremum(float(x[0]), float(y[0]), "max" if y[0] > y[1] else "min", True))
    for k in range(1, n - 1):
        if y[k] > y[k - 1] and y[k] >= y[k + 1]:
            kind = "max"
        elif y[k] < y[k - 1] and y[k] <= y[k + 1]:
            kind = "min"
        else:
            continue
        xv, yv = _parabola_vertex(x[k - 1 : k + 2], y[k - 1 : k + 2])
        out.append(Extremum(xv, yv, kind, False))
    if y[-1] != y[-2]:
        out.append(Extremum(float(x[-1]), float(y[-1]), "max" if y[-1] > y[-2] else "min", True))
    return out


def _parabola_vertex(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    (x0, x1, x2), (y0, y1, y2) = x, y
    d01 = (y1 - y0) / (x1 - x0)
    d12 = (y2 - y1) / (x2 - x1)
    curv = (d12 - d01) / (x2 - x0)
    if curv == 0:
        return float(x1), float(y1)
    # y = y1 + d (x - x1) + curv (x - x1)^2 with d the centred slope at x1
    d = d01 + curv * (x1 - x0)
    xv = x1 - d / (2 * curv)
    # keep the refined point within the bracketing cell
    xv = min(max(xv, x0), x2)
    yv = y1 + d * (xv - x1) + curv * (xv - x1) ** 2
    return float(xv), float(yv)


def find_extrema(grid: SweepGrid, entry: tuple[int | str, int | str]) -> list[Extremum]:
    """Local maxima/minima of ``T[row, col]`` across a sweep."""
    return extrema_1d(grid.omegas, grid.entry(*entry))


# -- optimisation ------------------------------------------------------


def nelder_mead(func: Callable[[np.ndarray], float], x0: Sequence[float], steps: Sequence[float],
                basis: np.ndarray | None = None, max_evals: int = 2000, xtol: float = 1e-6,
                alpha: float = 1.0, gamma: float = 2.0, rho: float = 0.5, sigma: float = 0.5):
    """Minimise ``func`` by the Nelder-Mead simplex method.

    The initial simplex is ``x0`` plus ``steps[i] * basis[:, i]`` for each
    column of the orthonormal ``basis`` (identity by default). Stops when
    the simplex diameter drops below ``xtol`` or after ``max_evals`` calls.

    Returns ``(x_best, f_best, evals, converged)``.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = len(x0)
    basis = np.eye(dim) if basis is None else np.asarray(basis, dtype=float)
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        return func(x)

    pts = [x0] + [x0 + steps[i] * basis[:, i] for i in range(dim)]
    vals = [f(p) for p in pts]
    converged = False
    while evals < max_evals:
        order = sorted(range(dim + 1), key=lambda k: vals[k])
        pts = [pts[k] for k in order]
        vals = [vals[k] for k in order]
        diam = max(np.max(np.abs(p - pts[0])) for p in pts[1:])
        if diam < xtol:
            converged = True
            break
        centroid = np.mean(pts[:-1], axis=0)
        worst = pts[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = f(xr)
        if vals[0] <= fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                pts[-1], vals[-1] = xe, fe
            else:
                pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = centroid + rho * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (worst - centroid)
            fc = f(xc)
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        for k in range(1, dim + 1):
            if evals >= max_evals:
                break
            pts[k] = pts[0] + sigma * (pts[k] - pts[0])
            vals[k] = f(pts[k])
    best = int(np.argmin(vals))
    return pts[best], vals[best], evals, converged


class _Param(NamedTuple):
    handle: str
    kind: str  # "strength", "phase" or "theta"
    pair: tuple[int, int] | None


_ALIASES = {"G": "strength", "phi": "phase"}


def _resolve_handles(spec: SystemSpec, free: Iterable[str]) -> list[_Param]:
    out: list[_Param] = []
    lab = spec.labels
    for h in free:
        if h == "strengths":
            out += [_Param(f"strength:{lab[c.cavity_id]}:{lab[c.mech_id]}", "strength", c.pair) for c in spec.couplings]
        elif h == "phases":
            out += [_Param(f"phase:{lab[c.cavity_id]}:{lab[c.mech_id]}", "phase", c.pair) for c in spec.couplings]
        elif h == "theta":
            out.append(_Param("theta", "theta", None))
        else:
            parts = h.split(":")
            if parts and parts[0] in _ALIASES:
                parts[0] = _ALIASES[parts[0]]
                h = ":".join(parts)
            if len(parts) != 3 or parts[0] not in ("strength", "phase"):
                raise ValueError(f"unknown parameter handle {h!r}")
            pair = (spec.index(parts[1]), spec.index(parts[2]))
            if spec.coupling(*pair) is None:
                raise ValueError(f"no coupling {parts[1]}-{parts[2]}")
            out.append(_Param(h, parts[0], pair))
    seen, uniq = set(), []
    for p in out:
        if p.handle not in seen:
            seen.add(p.handle)
            uniq.append(p)
    return uniq


def _apply(spec: SystemSpec, params: list[_Param], x: Sequence[float]) -> SystemSpec:
    out = spec
    theta = None
    for p, v in zip(params, x):
        if p.kind == "theta":
            theta = v
        elif p.kind == "strength":
            out = out.with_coupling(*p.pair, strength=float(v))
        else:
            out = out.with_coupling(*p.pair, phase=wrap_phase(v))
    if theta is not None:
        out = with_loop_phase(out, wrap_phase(theta))
    return out


def _current(spec: SystemSpec, params: list[_Param]) -> np.ndarray:
    vals = []
    for p in params:
        if p.kind == "theta":
            vals.append(loop_phase(spec))
        else:
            c = spec.coupling(*p.pair)
            vals.append(c.strength if p.kind == "strength" else c.phase)
    return np.array(vals, dtype=float)


@dataclass(frozen=True)
class OptimizationResult:
    best_spec: SystemSpec
    best_params: dict
    best_objective: float
    start_objective: float
    history: list = field(repr=False)
    handles: tuple[str, ...] = ()
    evaluations: int = 0
    converged: bool = False

    def history_csv(self) -> str:
        k = len(self.handles)
        buf = io.StringIO()
        buf.write(",".join(["eval_index", *(f"param_{i + 1}" for i in range(k)), "objective"]) + "\n")
        for idx, x, obj in self.history:
            buf.write(",".join([str(idx), *(f"{v:.12g}" for v in x), f"{obj:.12g}"]) + "\n")
        return buf.getvalue()


def isolation_objective(spec: SystemSpec, src: int, dst: int, omega: float) -> float:
    """Isolation in dB minus a steep penalty for insertion loss beyond 3 dB."""
    t = scattering_matrix(spec, omega).t
    fwd, bwd = float(t[dst, src]), float(t[src, dst])
    iso = _isolation_db(fwd, bwd)
    loss = -to_db(fwd)
    return iso - INSERTION_LOSS_PENALTY * max(0.0, loss - INSERTION_LOSS_BUDGET_DB)


def optimize_isolation(spec: SystemSpec, free: Iterable[str], target_omega: float,
                       direction: tuple[int | str, int | str], seed: int = 0, restarts: int = 3,
                       max_evals: int = 2000, xtol: float = 1e-6) -> OptimizationResult:
    """Maximise isolation from ``direction[0]`` to ``direction[1]`` at ``target_omega``.

    ``free`` holds parameter handles: ``"theta"`` (loop phase),
    ``"strength:<cavity>:<mech>"``, ``"phase:<cavity>:<mech>"``, or the
    shorthands ``"strengths"`` / ``"phases"`` for every coupling. Strengths
    are confined to [0, 10]; points outside, or unstable ones, score -inf.

    One Nelder-Mead run from the start point is followed by ``restarts``
    runs from the incumbent, each with a random orthogonal initial simplex
    drawn from ``seed``. All runs share the ``max_evals`` budget.
    """
    params = _resolve_handles(spec, free)
    if not params:
        raise ValueError("optimize_isolation needs at least one free parameter")
    src, dst = spec.index(direction[0]), spec.index(direction[1])
    x_start = _current(spec, params)
    lo, hi = STRENGTH_BOUNDS
    history: list[tuple[int, tuple[float, ...], float]] = []

    def objective(x) -> float:
        for p, v in zip(params, x):
            if p.kind == "strength" and not lo <= v <= hi:
                val = -math.inf
                break
        else:
            cand = _apply(spec, params, x)
            val = isolation_objective(cand, src, dst, target_omega) if is_stable(cand).stable else -math.inf
        if math.isnan(val):
            val = -math.inf
        history.append((len(history), tuple(float(v) for v in x), val))
        return val

    start_obj = objective(x_start)
    best_x, best_val = x_start, start_obj
    rng = np.random.default_rng(seed)
    steps = np.array([0.1 * max(abs(v), 0.5) if p.kind == "strength" else 0.1 for p, v in zip(params, x_start)])
    converged = False
    for run in range(restarts + 1):
        budget = max_evals - len(history)
        if budget <= len(params) + 1:
            break
        if run == 0:
            basis = np.eye(len(params))
        else:
            q, r = np.linalg.qr(rng.standard_normal((len(params), len(params))))
            basis = q * np.sign(np.diag(r))
        x, negval, _, conv = nelder_mead(lambda v: -objective(v), best_x, steps, basis,
                                         max_evals=budget, xtol=xtol)
        if -negval > best_val:
            best_x, best_val = x, -negval
        converged = conv
    best_spec = _apply(spec, params, best_x)
    return OptimizationResult(
        best_spec=best_spec,
        best_params={p.handle: float(wrap_phase(v) if p.kind != "strength" else v) for p, v in zip(params, best_x)},
        best_objective=best_val,
        start_objective=start_obj,
        history=history,
        handles=tuple(p.handle for p in params),
        evaluations=len(history),
        converged=converged,
    )
