"""Adiabatic elimination and closed-form two-port transmission.

Two reductions are provided:

* :func:`eliminate_mech2` removes the heavily damped mechanical mode of the
  two-cavity/two-mechanical network, leaving cavities a1, a2 and the slow
  mechanical mode b1 with an induced dissipative link J2 and extra cavity
  damping ``4 G_i2**2 / gamma2``.
* :func:`eliminate_cavity3` removes the auxiliary cavity of the circulator
  network, folding it into the damping of the mechanical mode it drives.

Both are static Schur complements of the drift matrix (the eliminated mode's
own ``-i omega`` is dropped), which is exactly the adiabatic approximation.

The closed forms in :func:`effective_params` and
:func:`analytic_transmission` are written in the gauge where the loop phase
sits on the a2-b1 coupling (see :func:`eomnet.model.normalize_loop_phase`).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import RegimeWarning, TopologyError
from .model import Coupling, ModeKind, SystemSpec, build_coefficient_matrix, require_valid, wrap_phase

#: a "much less than" relation is flagged when the ratio falls below this
REGIME_RATIO = 3.0


class FourModeLayout(NamedTuple):
    a1: int
    a2: int
    b1: int
    b2: int


def four_mode_layout(spec: SystemSpec, fast: int | str | None = None) -> FourModeLayout:
    """Identify (a1, a2, slow b1, fast b2) in a two-cavity/two-mechanical spec.

    Cavities keep declaration order. The fast mechanical mode is ``fast`` if
    given, otherwise the mechanical mode with the larger damping (the later
    one on a tie).
    """
    require_valid(spec)
    cav, mech = spec.cavity_ids(), spec.mechanical_ids()
    if len(cav) != 2 or len(mech) != 2:
        raise TopologyError(f"expected 2 cavities and 2 mechanical modes, got {len(cav)} and {len(mech)}")
    if fast is not None:
        f = spec.index(fast)
        if spec.modes[f].kind is not ModeKind.MECHANICAL:
            raise TopologyError(f"fast mode {spec.labels[f]!r} is not a mechanical mode")
    else:
        f = max(mech, key=lambda i: (spec.modes[i].damping, i))
    slow = mech[0] if mech[1] == f else mech[1]
    return FourModeLayout(cav[0], cav[1], slow, f)


def _edge(spec: SystemSpec, i: int, j: int) -> Coupling:
    c = spec.coupling(i, j)
    return c if c is not None else Coupling(i, j, 0.0, 0.0)


def _layout_theta(spec: SystemSpec, lay: FourModeLayout) -> float:
    ph = lambda i, j: _edge(spec, i, j).phase  # noqa: E731
    return wrap_phase(ph(lay.a2, lay.b1) - ph(lay.a1, lay.b1) + ph(lay.a1, lay.b2) - ph(lay.a2, lay.b2))


def regime_warnings(spec: SystemSpec, lay: FourModeLayout | None = None, emit: bool = True) -> list[str]:
    """Check gamma1 << G_ij ~ kappa_1 = kappa_2 << gamma2 (each "<<" at ratio 3)."""
    lay = lay or four_mode_layout(spec)
    d = [m.damping for m in spec.modes]
    g1, g2 = d[lay.b1], d[lay.b2]
    lab = spec.labels
    out = []

    def need(small, big, what):
        if not big >= REGIME_RATIO * small:
            out.append(f"{what}: ratio {big / small if small else math.inf:.3g} < {REGIME_RATIO:g}")

    for a in (lay.a1, lay.a2):
        need(g1, d[a], f"damping {lab[lay.b1]} << decay {lab[a]}")
        need(d[a], g2, f"decay {lab[a]} << damping {lab[lay.b2]}")
        for b in (lay.b1, lay.b2):
            g = _edge(spec, a, b).strength
            if g > 0:
                need(g1, g, f"damping {lab[lay.b1]} << G({lab[a]},{lab[b]})")
                need(g, g2, f"G({lab[a]},{lab[b]}) << damping {lab[lay.b2]}")
    if any(d[i] >= g2 for i in range(spec.n) if i != lay.b2):
        out.append(f"{lab[lay.b2]} does not have the strictly largest damping")
    if emit:
        for msg in out:
            warnings.warn(msg, RegimeWarning, stacklevel=3)
    return out


# -- mechanical-mode elimination ---------------------------------------


@dataclass(frozen=True)
class ReducedModel:
    """Three-mode model (a1, a2, b1) after eliminating the fast mechanical mode.

    ``noise_column`` is the drive that the eliminated mode's input noise
    feeds into each retained mode, ``-i sqrt(gamma_i2)`` in the normalised
    gauge.
    """

    m_prime: np.ndarray
    gamma_prime: np.ndarray
    noise_column: np.ndarray
    j2: float
    gamma_induced: tuple[float, float]
    labels: tuple[str, str, str]
    regime_warnings: tuple[str, ...] = field(default=(), compare=False)


def _schur(m: np.ndarray, keep: list[int], drop: int) -> tuple[np.ndarray, np.ndarray]:
    """Static elimination of mode ``drop``: returns (reduced drift, noise column).

    The dropped mode's damping is ``2 * m[drop, drop]``; its unit-normalised
    input noise reaches the kept modes through ``-2 m[keep, drop] / sqrt(gamma)``.
    """
    gamma = 2.0 * m[drop, drop].real
    col = m[np.ix_(keep, [drop])][:, 0]
    row = m[np.ix_([drop], keep)][0]
    reduced = m[np.ix_(keep, keep)] - np.outer(col, row) * (2.0 / gamma)
    noise = -2.0 * col / math.sqrt(gamma)
    return reduced, noise


def eliminate_mech2(spec: SystemSpec, fast: int | str | None = None) -> ReducedModel:
    lay = four_mode_layout(spec, fast)
    msgs = regime_warnings(spec, lay)
    cm = build_coefficient_matrix(spec)
    keep = [lay.a1, lay.a2, lay.b1]
    m_prime, noise = _schur(np.asarray(cm.m), keep, lay.b2)
    gamma2 = cm.gamma[lay.b2]
    g12 = _edge(spec, lay.a1, lay.b2).strength
    g22 = _edge(spec, lay.a2, lay.b2).strength
    return ReducedModel(
        m_prime=m_prime,
        gamma_prime=np.array([cm.gamma[i] for i in keep]),
        noise_column=noise,
        j2=2 * g12 * g22 / gamma2,
        gamma_induced=(4 * g12**2 / gamma2, 4 * g22**2 / gamma2),
        labels=tuple(spec.labels[i] for i in keep),
        regime_warnings=tuple(msgs),
    )


class ReducedScattering(NamedTuple):
    u_prime: np.ndarray
    noise_out: np.ndarray


def reduced_scattering(rm: ReducedModel, omega: float) -> ReducedScattering:
    """Scattering of the retained ports plus the eliminated bath's output column."""
    n = rm.m_prime.shape[0]
    s = np.sqrt(rm.gamma_prime)
    a = rm.m_prime - 1j * omega * np.eye(n)
    rhs = np.column_stack([np.diag(s), rm.noise_column])
    x = linalg.lu_solve(a, rhs)
    x = s[:, None] * x
    return ReducedScattering(x[:, :n] - np.eye(n), x[:, n])


# -- closed forms ------------------------------------------------------


@dataclass(frozen=True)
class EffectiveParams:
    omega: float
    theta: float
    j1: complex
    j1_prime: complex
    j2: float
    gamma_m1: tuple[float, float]
    gamma_m2: tuple[float, float]
    shift: tuple[float, float]
    kappa_tot: tuple[float, float]
    d: complex


def _params(spec: SystemSpec, lay: FourModeLayout, omega: float) -> EffectiveParams:
    dmp = [m.damping for m in spec.modes]
    k1, k2, g1, g2 = dmp[lay.a1], dmp[lay.a2], dmp[lay.b1], dmp[lay.b2]
    G11 = _edge(spec, lay.a1, lay.b1).strength
    G21 = _edge(spec, lay.a2, lay.b1).strength
    G12 = _edge(spec, lay.a1, lay.b2).strength
    G22 = _edge(spec, lay.a2, lay.b2).strength
    theta = _layout_theta(spec, lay)
    w = float(omega)

    denom = g1 - 2j * w
    j1 = 2 * G11 * G21 * cmath.exp(1j * theta) / denom
    j1p = 2 * G11 * G21 * cmath.exp(-1j * theta) / denom
    j2 = 2 * G12 * G22 / g2
    lor = g1**2 + 4 * w**2
    gm1 = (4 * G11**2 * g1 / lor, 4 * G21**2 * g1 / lor)
    shift = (4 * G11**2 * w / lor, 4 * G21**2 * w / lor)
    gm2 = (4 * G12**2 / g2, 4 * G22**2 / g2)
    ktot = (k1 + gm1[0] + gm2[0], k2 + gm1[1] + gm2[1])
    d = (ktot[0] / 2 - 1j * (w - shift[0])) * (ktot[1] / 2 - 1j * (w - shift[1])) - (j1 + j2) * (j1p + j2)
    return EffectiveParams(w, theta, j1, j1p, j2, gm1, gm2, shift, ktot, d)


def effective_params(spec: SystemSpec, omega: float) -> EffectiveParams:
    """Frequency-dependent couplings, dampings and shifts seen by the cavities."""
    return _params(spec, four_mode_layout(spec), omega)


class AnalyticTransmission(NamedTuple):
    u12: complex
    u21: complex


#: |D(omega)| below this signals corrupted input
D_FLOOR = 1e-14


def analytic_transmission(spec: SystemSpec, omega: float) -> AnalyticTransmission:
    """Closed-form cavity-cavity entries of the reduced scattering matrix.

    ``u12`` is a2 -> a1, ``u21`` is a1 -> a2.
    """
    lay = four_mode_layout(spec)
    regime_warnings(spec, lay)
    p = _params(spec, lay, omega)
    if abs(p.d) < D_FLOOR:
        raise ArithmeticError(f"D(omega) = {p.d!r} vanished at omega = {omega}")
    k1 = spec.modes[lay.a1].damping
    k2 = spec.modes[lay.a2].damping
    pref = -math.sqrt(k1 * k2)
    return AnalyticTransmission(pref * (p.j1_prime + p.j2) / p.d, pref * (p.j1 + p.j2) / p.d)


# -- auxiliary-cavity elimination --------------------------------------


def eliminate_cavity3(spec5: SystemSpec) -> SystemSpec:
    """Fold the auxiliary (third) cavity into its mechanical partner's damping.

    The returned four-mode spec has ``gamma2 = gamma2_0 + 4 G32**2 / kappa3``.
    Its ``metadata`` records the intrinsic and induced parts and the weights
    with which the partner's and the auxiliary cavity's input noise make up
    the new effective bath; the retained-port transmissions do not depend on
    that split.
    """
    require_valid(spec5)
    cav, mech = spec5.cavity_ids(), spec5.mechanical_ids()
    if len(cav) != 3 or len(mech) != 2:
        raise TopologyError(f"expected 3 cavities and 2 mechanical modes, got {len(cav)} and {len(mech)}")
    aux = cav[2]
    aux_edges = [c for c in spec5.couplings if c.cavity_id == aux]
    if len(aux_edges) != 1:
        raise TopologyError(f"auxiliary cavity {spec5.labels[aux]!r} must couple to exactly one mechanical mode")
    edge = aux_edges[0]
    partner = edge.mech_id
    kappa3 = spec5.modes[aux].damping
    gamma20 = spec5.modes[partner].damping
    g32 = edge.strength

    for small, what in ((g32, "G32"), (gamma20, "intrinsic damping")):
        if not kappa3 > REGIME_RATIO * small:
            warnings.warn(
                f"auxiliary decay {kappa3:g} is not >> {what} {small:g} (ratio < {REGIME_RATIO:g})",
                RegimeWarning,
                stacklevel=2,
            )

    gamma_id = 4.0 * g32 * g32 / kappa3
    gamma2 = gamma20 + gamma_id
    remap = {old: new for new, old in enumerate(i for i in range(spec5.n) if i != aux)}
    modes = []
    for m in spec5.modes:
        if m.id == aux:
            continue
        modes.append(replace(m, id=remap[m.id], damping=gamma2 if m.id == partner else m.damping))
    couplings = tuple(
        Coupling(remap[c.cavity_id], remap[c.mech_id], c.strength, c.phase) for c in spec5.couplings if c.cavity_id != aux
    )
    meta = {
        "eliminated_mode": spec5.labels[aux],
        "partner_mode": spec5.labels[partner],
        "gamma_intrinsic": gamma20,
        "gamma_induced": gamma_id,
        "noise_weights": {
            spec5.labels[partner]: math.sqrt(gamma20 / gamma2) if gamma2 > 0 else 0.0,
            spec5.labels[aux]: -1j * math.sqrt(gamma_id / gamma2) if gamma2 > 0 else 0j,
        },
    }
    return SystemSpec(tuple(modes), couplings, spec5.kappa_ref, meta)


# -- design rules and conditions --------------------------------------


@dataclass(frozen=True)
class CouplingDesign:
    g11: float
    g21: float
    g12: float
    g22: float
    omega_peaks: tuple[float, float]
    theta_options: tuple[float, float]

    def to_spec(self, kappa: float, gamma2: float, gamma1: float | None = None, theta: float = math.pi / 2) -> SystemSpec:
        """Two-port spec realising this design (gamma1 defaults to kappa / 1000)."""
        gamma1 = kappa / 1000 if gamma1 is None else gamma1
        return SystemSpec.build(
            modes=[("a1", "cavity", kappa), ("a2", "cavity", kappa),
                   ("b1", "mechanical", gamma1), ("b2", "mechanical", gamma2)],
            couplings=[("a1", "b1", self.g11), ("a1", "b2", self.g12),
                       ("a2", "b1", self.g21, theta), ("a2", "b2", self.g22)],
        )


def design_couplings(kappa: float, gamma2: float) -> CouplingDesign:
    """Symmetric coupling choice for perfect nonreciprocity at omega = +-kappa/2."""
    if not (kappa > 0 and gamma2 > 0):
        raise ValueError("kappa and gamma2 must be positive")
    if gamma2 < 8 * kappa:
        warnings.warn(f"gamma2/kappa = {gamma2 / kappa:.3g} < 8; the design rule assumes gamma2 >> kappa",
                      RegimeWarning, stacklevel=2)
    g1 = kappa / 2
    g2 = math.sqrt(gamma2 * kappa) / 2
    return CouplingDesign(g1, g1, g2, g2, (-kappa / 2, kappa / 2), (math.pi / 2, 3 * math.pi / 2))


@dataclass(frozen=True)
class NonreciprocityReport:
    """Residuals of the conditions for perfect one-way transmission.

    Keys in :meth:`to_dict` are the wire-format names: ``eq26`` (coherent
    and dissipative couplings cancel), ``eq28`` (loop phase at pi/2 or
    3pi/2), ``eq30`` (frequency sits on the induced shifts) and ``eq31``
    (impedance match ``8 J2 sqrt(k1 k2) = k1_tot k2_tot``).
    """

    candidate_omegas: tuple[float, ...]
    cancellation: dict
    phase: dict
    alignment: dict
    impedance: dict
    regime_warnings: tuple[str, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(part["satisfied"] for part in (self.cancellation, self.phase, self.alignment, self.impedance))

    def to_dict(self) -> dict:
        return {
            "conditions": {
                "eq26": self.cancellation,
                "eq28": self.phase,
                "eq30": self.alignment,
                "eq31": self.impedance,
            },
            "candidate_omegas": list(self.candidate_omegas),
            "regime_warnings": list(self.regime_warnings),
            "tolerance": self.tol,
            "passed": self.passed,
        }


def check_nonreciprocity_conditions(spec: SystemSpec, tol: float = 0.1) -> NonreciprocityReport:
    """Evaluate every perfect-nonreciprocity condition; never raises on bad physics.

    Candidate frequencies are ``+-(G11 G21)/(G12 G22) * gamma2/2``. Relative
    residuals are compared against ``tol``.
    """
    lay = four_mode_layout(spec)
    msgs = regime_warnings(spec, lay, emit=False)
    dmp = [m.damping for m in spec.modes]
    k1, k2, g1, g2 = dmp[lay.a1], dmp[lay.a2], dmp[lay.b1], dmp[lay.b2]
    G11 = _edge(spec, lay.a1, lay.b1).strength
    G21 = _edge(spec, lay.a2, lay.b1).strength
    G12 = _edge(spec, lay.a1, lay.b2).strength
    G22 = _edge(spec, lay.a2, lay.b2).strength

    if G12 * G22 > 0:
        w_c = G11 * G21 / (G12 * G22) * g2 / 2
        candidates = (-w_c, w_c) if w_c > 0 else (0.0,)
    else:
        candidates = ()

    j2 = 2 * G12 * G22 / g2
    # magnitude match |J1| = J2 solved exactly
    if j2 > 0 and 2 * G11 * G21 / j2 >= g1:
        w_mag = 0.5 * math.sqrt((2 * G11 * G21 / j2) ** 2 - g1**2)
    else:
        w_mag = None

    cancel_rows, align_rows, imp_rows = [], [], []
    for w in candidates:
        p = _params(spec, lay, w)
        r = abs(p.j1 + p.j2) / p.j2 if p.j2 else math.inf
        rp = abs(p.j1_prime + p.j2) / p.j2 if p.j2 else math.inf
        cancel_rows.append({"omega": w, "j1_plus_j2": r, "j1_prime_plus_j2": rp})
        align_rows.append({
            "omega": w,
            "shift_1": p.shift[0],
            "shift_2": p.shift[1],
            "residual_1": abs(w - p.shift[0]) / abs(w) if w else math.inf,
            "residual_2": abs(w - p.shift[1]) / abs(w) if w else math.inf,
        })
        lhs = 8 * p.j2 * math.sqrt(k1 * k2)
        rhs = p.kappa_tot[0] * p.kappa_tot[1]
        imp_rows.append({"omega": w, "lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs) / rhs})

    def worst(rows, keys):
        vals = [row[k] for row in rows for k in keys]
        return max(vals) if vals else math.inf

    min_cancel = min((min(r["j1_plus_j2"], r["j1_prime_plus_j2"]) for r in cancel_rows), default=math.inf)
    cancellation = {
        "omega_magnitude_match": w_mag,
        "residuals": cancel_rows,
        "min_residual": min_cancel,
        "satisfied": min_cancel <= tol,
    }
    theta = _layout_theta(spec, lay)
    dist = min(_circ_dist(theta, math.pi / 2), _circ_dist(theta, 3 * math.pi / 2))
    phase = {
        "theta": theta,
        "distance": dist,
        "reciprocal": abs(math.sin(theta)) < 1e-12,
        "satisfied": dist <= tol * math.pi / 2,
    }
    align_worst = worst(align_rows, ("residual_1", "residual_2"))
    alignment = {"rows": align_rows, "max_residual": align_worst, "satisfied": align_worst <= tol}
    imp_worst = worst(imp_rows, ("residual",))
    impedance = {"rows": imp_rows, "max_residual": imp_worst, "satisfied": imp_worst <= tol}
    return NonreciprocityReport(tuple(candidates), cancellation, phase, alignment, impedance, tuple(msgs), tol)


def _circ_dist(a: float, b: float) -> float:
    d = abs(wrap_phase(a - b))
    return min(d, 2 * math.pi - d)
