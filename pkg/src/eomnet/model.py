"""Mode/coupling graphs and their drift (coefficient) matrices.

A network is a list of bosonic modes, each either a cavity (a scattering
port) or a mechanical resonator, joined by beam-splitter couplings that
always connect one cavity to one mechanical mode. All rates are
dimensionless, in units of ``kappa_ref``.

For a coupling of strength G and phase phi between cavity i and mechanical
mode j the drift matrix carries ``M[i, j] = i G exp(+i phi)`` and
``M[j, i] = i G exp(-i phi)``; the diagonal is half the damping rate.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from . import linalg
from .errors import ConfigError, InvalidSpecError, TopologyError

TWO_PI = 2.0 * math.pi


class ModeKind(str, Enum):
    CAVITY = "cavity"
    MECHANICAL = "mechanical"


def wrap_phase(phase: float) -> float:
    """Reduce a phase to [0, 2 pi)."""
    p = math.fmod(float(phase), TWO_PI)
    if p < 0:
        p += TWO_PI
    # fmod of a value just below 0 can round up to exactly 2 pi
    return 0.0 if p >= TWO_PI else p


@dataclass(frozen=True)
class Mode:
    id: int
    label: str
    kind: ModeKind
    damping: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        object.__setattr__(self, "damping", float(self.damping))

    @property
    def is_cavity(self) -> bool:
        return self.kind is ModeKind.CAVITY


@dataclass(frozen=True)
class Coupling:
    cavity_id: int
    mech_id: int
    strength: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "strength", float(self.strength))
        if math.isfinite(self.phase):
            object.__setattr__(self, "phase", wrap_phase(self.phase))

    @property
    def pair(self) -> tuple[int, int]:
        return (self.cavity_id, self.mech_id)


@dataclass(frozen=True)
class SystemSpec:
    """An electro-optomechanical network.

    Construction does not validate; call :func:`validate` or let the
    builders reject invalid specs. ``metadata`` is free-form annotation
    (for example, bookkeeping left by an adiabatic elimination) and takes no
    part in equality, hashing or serialisation.
    """

    modes: tuple[Mode, ...]
    couplings: tuple[Coupling, ...]
    kappa_ref: float = 1.0
    metadata: Mapping = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "couplings", tuple(self.couplings))

    @classmethod
    def build(cls, modes: Iterable[tuple], couplings: Iterable[tuple] = (), kappa_ref: float = 1.0) -> "SystemSpec":
        """Assemble a spec from ``(label, kind, damping)`` and
        ``(cavity_label, mech_label, strength[, phase])`` tuples."""
        mode_objs = tuple(Mode(i, label, ModeKind(kind), damping) for i, (label, kind, damping) in enumerate(modes))
        index = {m.label: m.id for m in mode_objs}
        coup_objs = []
        for entry in couplings:
            cav, mech, strength, *rest = entry
            coup_objs.append(Coupling(index[cav], index[mech], strength, rest[0] if rest else 0.0))
        return cls(mode_objs, tuple(coup_objs), kappa_ref)

    @property
    def n(self) -> int:
        return len(self.modes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    def index(self, key: int | str) -> int:
        """Mode id for a label, or the id itself after a range check."""
        if isinstance(key, str):
            for m in self.modes:
                if m.label == key:
                    return m.id
            raise KeyError(f"no mode labelled {key!r}")
        key = int(key)
        if not 0 <= key < self.n:
            raise KeyError(f"mode id {key} out of range")
        return key

    def cavity_ids(self) -> list[int]:
        return [m.id for m in self.modes if m.kind is ModeKind.CAVITY]

    def mechanical_ids(self) -> list[int]:
        return [m.id for m in self.modes if m.kind is ModeKind.MECHANICAL]

    def coupling(self, cavity: int | str, mech: int | str) -> Coupling | None:
        pair = (self.index(cavity), self.index(mech))
        for c in self.couplings:
            if c.pair == pair:
                return c
        return None

    def strength(self, cavity: int | str, mech: int | str) -> float:
        c = self.coupling(cavity, mech)
        return 0.0 if c is None else c.strength

    def with_coupling(self, cavity: int | str, mech: int | str, strength: float | None = None,
                      phase: float | None = None) -> "SystemSpec":
        """Copy with one coupling's strength and/or phase replaced (added if absent)."""
        pair = (self.index(cavity), self.index(mech))
        out, found = [], False
        for c in self.couplings:
            if c.pair == pair:
                found = True
                c = Coupling(c.cavity_id, c.mech_id,
                             c.strength if strength is None else strength,
                             c.phase if phase is None else phase)
            out.append(c)
        if not found:
            out.append(Coupling(pair[0], pair[1], strength or 0.0, phase or 0.0))
        return replace(self, couplings=tuple(out))

    def with_damping(self, mode: int | str, damping: float) -> "SystemSpec":
        i = self.index(mode)
        modes = tuple(replace(m, damping=damping) if m.id == i else m for m in self.modes)
        return replace(self, modes=modes)

    # -- serialisation -------------------------------------------------

    def to_dict(self) -> dict:
        labels = self.labels
        return {
            "kappa_ref": self.kappa_ref,
            "modes": [{"label": m.label, "kind": m.kind.value, "damping": m.damping} for m in self.modes],
            "couplings": [
                {"cavity": labels[c.cavity_id], "mech": labels[c.mech_id], "strength": c.strength, "phase": c.phase}
                for c in self.couplings
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def digest(self) -> str:
        """Content hash (sha256) of the canonical serialisation."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: Mapping) -> "SystemSpec":
        return _spec_from_dict(data)

    @classmethod
    def from_json(cls, text: str) -> "SystemSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return _spec_from_dict(data)


def _check_keys(obj, where: str, required: set, optional: set = frozenset()):
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(obj) - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing key(s) {sorted(missing)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _spec_from_dict(data) -> SystemSpec:
    _check_keys(data, "config", {"modes", "couplings"}, {"kappa_ref"})
    if not isinstance(data["modes"], list) or not isinstance(data["couplings"], list):
        raise ConfigError("config: 'modes' and 'couplings' must be lists")
    modes = []
    for i, m in enumerate(data["modes"]):
        where = f"modes[{i}]"
        _check_keys(m, where, {"label", "kind", "damping"})
        if not isinstance(m["label"], str):
            raise ConfigError(f"{where}.label: expected a string")
        try:
            kind = ModeKind(m["kind"])
        except ValueError:
            raise ConfigError(f"{where}.kind: expected 'cavity' or 'mechanical', got {m['kind']!r}") from None
        modes.append(Mode(i, m["label"], kind, _number(m["damping"], f"{where}.damping")))
    index = {m.label: m.id for m in modes}
    couplings = []
    for i, c in enumerate(data["couplings"]):
        where = f"couplings[{i}]"
        _check_keys(c, where, {"cavity", "mech", "strength"}, {"phase"})
        ids = []
        for key in ("cavity", "mech"):
            if c[key] not in index:
                raise ConfigError(f"{where}.{key}: unknown mode {c[key]!r}")
            ids.append(index[c[key]])
        couplings.append(Coupling(ids[0], ids[1], _number(c["strength"], f"{where}.strength"),
                                  _number(c.get("phase", 0.0), f"{where}.phase")))
    kappa_ref = _number(data.get("kappa_ref", 1.0), "kappa_ref")
    return SystemSpec(tuple(modes), tuple(couplings), kappa_ref)


# -- validation --------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


def validate(spec: SystemSpec) -> list[Violation]:
    """Every invariant violation in ``spec``; empty means valid.

    Order is deterministic: mode problems by id, then coupling problems by
    (cavity, mech) pair, then spec-level problems.
    """
    out: list[Violation] = []
    seen_labels: set[str] = set()
    for pos, m in enumerate(spec.modes):
        if m.id != pos:
            out.append(Violation("bad_id", f"mode {m.label!r} has id {m.id}, expected {pos}"))
        if not m.label or m.label in seen_labels:
            out.append(Violation("duplicate_label", f"mode {pos} label {m.label!r} is empty or repeated"))
        seen_labels.add(m.label)
        if not math.isfinite(m.damping) or m.damping <= 0:
            out.append(Violation("nonpositive_damping", f"mode {m.label!r} damping {m.damping} must be > 0"))

    n = spec.n
    seen_pairs: set[tuple[int, int]] = set()
    for c in sorted(spec.couplings, key=lambda c: c.pair):
        where = f"coupling ({c.cavity_id}, {c.mech_id})"
        if not (0 <= c.cavity_id < n and 0 <= c.mech_id < n):
            out.append(Violation("unknown_mode", f"{where} references a missing mode"))
            continue
        if spec.modes[c.cavity_id].kind is not ModeKind.CAVITY or spec.modes[c.mech_id].kind is not ModeKind.MECHANICAL:
            kinds = f"{spec.modes[c.cavity_id].kind.value}-{spec.modes[c.mech_id].kind.value}"
            out.append(Violation("illegal_edge", f"{where} joins {kinds}; only cavity-mechanical edges are allowed"))
        if c.pair in seen_pairs:
            out.append(Violation("duplicate_coupling", f"{where} declared more than once"))
        seen_pairs.add(c.pair)
        if not math.isfinite(c.strength) or c.strength < 0:
            out.append(Violation("bad_strength", f"{where} strength {c.strength} must be finite and >= 0"))
        if not math.isfinite(c.phase):
            out.append(Violation("bad_phase", f"{where} phase is not finite"))

    if not math.isfinite(spec.kappa_ref) or spec.kappa_ref <= 0:
        out.append(Violation("bad_kappa_ref", f"kappa_ref {spec.kappa_ref} must be > 0"))
    if n == 0:
        out.append(Violation("empty", "spec has no modes"))
    return out


def require_valid(spec: SystemSpec) -> None:
    problems = validate(spec)
    if problems:
        raise InvalidSpecError(problems)


# -- drift matrix ------------------------------------------------------


@dataclass(frozen=True)
class CoefficientMatrix:
    m: np.ndarray
    gamma: np.ndarray

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    @property
    def sqrt_gamma(self) -> np.ndarray:
        return np.sqrt(self.gamma)


def build_coefficient_matrix(spec: SystemSpec) -> CoefficientMatrix:
    """Drift matrix M = Gamma/2 + i K (K Hermitian) in declaration order."""
    require_valid(spec)
    n = spec.n
    gamma = np.array([m.damping for m in spec.modes], dtype=float)
    m = np.zeros((n, n), dtype=complex)
    m[np.diag_indices(n)] = gamma / 2
    for c in spec.couplings:
        if c.phase == 0.0:
            m[c.cavity_id, c.mech_id] = 1j * c.strength
            m[c.mech_id, c.cavity_id] = 1j * c.strength
        else:
            rot = complex(math.cos(c.phase), math.sin(c.phase))
            m[c.cavity_id, c.mech_id] = 1j * c.strength * rot
            m[c.mech_id, c.cavity_id] = 1j * c.strength * rot.conjugate()
    m.setflags(write=False)
    gamma.setflags(write=False)
    return CoefficientMatrix(m, gamma)


class Stability(NamedTuple):
    stable: bool
    margin: float


def is_stable(spec: SystemSpec) -> Stability:
    """Stable iff every eigenvalue of M has positive real part.

    ``margin`` is the smallest real part.
    """
    cm = build_coefficient_matrix(spec)
    margin = min(z.real for z in linalg.eigenvalues(cm.m))
    return Stability(margin > 0, margin)


# -- phase gauge -------------------------------------------------------


def _loop_modes(spec: SystemSpec) -> tuple[int, int, int, int]:
    cav, mech = spec.cavity_ids(), spec.mechanical_ids()
    if len(cav) < 2 or len(mech) < 2:
        raise TopologyError("loop phase needs at least two cavities and two mechanical modes")
    a1, a2, b1, b2 = cav[0], cav[1], mech[0], mech[1]
    for pair in ((a1, b1), (a1, b2), (a2, b1), (a2, b2)):
        if spec.coupling(*pair) is None:
            raise TopologyError(f"loop edge {spec.labels[pair[0]]}-{spec.labels[pair[1]]} is missing")
    return a1, a2, b1, b2


def normalize_loop_phase(spec: SystemSpec) -> SystemSpec:
    """Gauge-transform so the loop phase sits on the (second cavity, first
    mechanical) edge and every other loop and tree edge has phase 0.

    Mode phases are chosen along a spanning tree of the coupling graph, so
    only couplings that close a loop keep a phase. Loop sums, and therefore
    all ``|U_ij|``, are unchanged.
    """
    require_valid(spec)
    a1, a2, b1, b2 = _loop_modes(spec)
    preferred = [(a1, b1), (a1, b2), (a2, b2)]
    order = sorted(spec.couplings, key=lambda c: (c.pair not in preferred,
                                                  preferred.index(c.pair) if c.pair in preferred else 0))
    parent = list(range(spec.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = []
    for c in order:
        ra, rb = find(c.cavity_id), find(c.mech_id)
        if ra != rb:
            parent[ra] = rb
            tree.append(c)

    # potentials: new phase = phase + pot[mech] - pot[cavity]
    pot: dict[int, float] = {}
    pending = list(tree)
    while pending:
        progressed = False
        for c in list(pending):
            i, j = c.pair
            if i not in pot and j not in pot:
                continue
            if i in pot:
                pot[j] = pot[i] - c.phase
            else:
                pot[i] = pot[j] + c.phase
            pending.remove(c)
            progressed = True
        if not progressed:
            # new component: root it
            c = pending[0]
            pot[c.cavity_id] = 0.0
    tree_pairs = {c.pair for c in tree}
    new = []
    for c in spec.couplings:
        if c.pair in tree_pairs:
            phase = 0.0
        else:
            phase = c.phase + pot.get(c.mech_id, 0.0) - pot.get(c.cavity_id, 0.0)
        new.append(Coupling(c.cavity_id, c.mech_id, c.strength, phase))
    return replace(spec, couplings=tuple(new))


def loop_phase(spec: SystemSpec) -> float:
    """Gauge-invariant phase around the a1-b1-a2-b2 loop, in [0, 2 pi)."""
    require_valid(spec)
    a1, a2, b1, b2 = _loop_modes(spec)
    ph = lambda i, j: spec.coupling(i, j).phase  # noqa: E731
    return wrap_phase(ph(a2, b1) - ph(a1, b1) + ph(a1, b2) - ph(a2, b2))


def with_loop_phase(spec: SystemSpec, theta: float) -> SystemSpec:
    """Gauge-normalised copy whose loop phase is ``theta``."""
    norm = normalize_loop_phase(spec)
    a1, a2, b1, b2 = _loop_modes(norm)
    return norm.with_coupling(a2, b1, phase=theta)


# -- published parameter sets -----------------------------------------


def _two_port(theta: float) -> SystemSpec:
    return SystemSpec.build(
        modes=[("a1", "cavity", 1.0), ("a2", "cavity", 1.0), ("b1", "mechanical", 1e-3), ("b2", "mechanical", 16.0)],
        couplings=[("a1", "b1", 0.5), ("a1", "b2", 2.0), ("a2", "b1", 0.5, theta), ("a2", "b2", 2.0)],
    )


def _circulator(theta: float) -> SystemSpec:
    return SystemSpec.build(
        modes=[
            ("a1", "cavity", 1.0),
            ("a2", "cavity", 1.0),
            ("a3", "cavity", 10.0),
            ("b1", "mechanical", 1e-3),
            ("b2", "mechanical", 1e-3),
        ],
        couplings=[
            ("a1", "b1", 0.5),
            ("a1", "b2", 2.0),
            ("a2", "b1", 0.5, theta),
            ("a2", "b2", 2.0),
            ("a3", "b2", math.sqrt(40.0)),
        ],
    )


PRESETS = {
    "fig2_theta_half_pi": lambda: _two_port(math.pi / 2),
    "fig2_theta_3half_pi": lambda: _two_port(3 * math.pi / 2),
    "fig4_theta_half_pi": lambda: _circulator(math.pi / 2),
    "fig4_theta_3half_pi": lambda: _circulator(3 * math.pi / 2),
}


def preset(name: str) -> SystemSpec:
    """Published isolator (``fig2_*``) and circulator (``fig4_*``) parameter sets."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
