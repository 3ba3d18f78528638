"""Input-output scattering matrices, transmission spectra and sweeps.

Frequencies are detunings in each mode's rotating frame, in units of
``kappa_ref``; a physical signal at cavity i sits at its resonance plus
``omega``. The Fourier kernel is exp(+i omega t), which gives

    U(omega) = sqrt(Gamma) (M - i omega I)^-1 sqrt(Gamma) - I

and ``T[v, w] = |U[v, w]|**2`` is the probability of scattering from mode w
(column) into mode v (row). Flipping the kernel sign would conjugate U and
leave T untouched.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .model import ModeKind, SystemSpec, build_coefficient_matrix, is_stable
from .errors import UnstableSpecError


@dataclass(frozen=True)
class ScatteringResult:
    omega: float
    u: np.ndarray
    t: np.ndarray
    labels: tuple[str, ...] = ()

    @classmethod
    def from_u(cls, omega: float, u: np.ndarray, labels=()) -> "ScatteringResult":
        return cls(float(omega), u, np.abs(u) ** 2, tuple(labels))

    def unitarity_error(self) -> float:
        n = self.u.shape[0]
        return float(np.max(np.abs(self.u.conj().T @ self.u - np.eye(n))))


def scattering_matrix(spec: SystemSpec, omega: float) -> ScatteringResult:
    """Scattering matrix and transmission probabilities at one frequency."""
    cm = build_coefficient_matrix(spec)
    u = _backend.scattering_stack(cm.m, cm.sqrt_gamma, np.array([float(omega)]))[0]
    return ScatteringResult.from_u(omega, u, spec.labels)


class TransmissionPair(NamedTuple):
    forward: float
    backward: float


def transmission_pair(spec: SystemSpec, omega: float, src: int | str, dst: int | str) -> TransmissionPair:
    """Forward (src -> dst) and backward (dst -> src) probabilities between two cavities."""
    i, j = spec.index(src), spec.index(dst)
    for k in (i, j):
        if spec.modes[k].kind is not ModeKind.CAVITY:
            raise ValueError(f"mode {spec.labels[k]!r} is not a cavity")
    t = scattering_matrix(spec, omega).t
    return TransmissionPair(float(t[j, i]), float(t[i, j]))


def propagate_spectrum(spec: SystemSpec, omega: float, s_in: Sequence[float]) -> np.ndarray:
    """Output flux spectra ``T(omega) @ s_in``.

    ``s_in`` is a non-negative one-sided flux density per port. The vacuum
    "+1" terms are not carried: for unitary U they cancel row by row.
    """
    s = np.asarray(s_in, dtype=float)
    if s.shape != (spec.n,):
        raise ValueError(f"s_in must have length {spec.n}")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ValueError("input spectra must be finite and non-negative")
    return scattering_matrix(spec, omega).t @ s


@dataclass(frozen=True)
class SweepGrid:
    """Scattering data on a frequency grid.

    ``u`` and ``t`` are stacked with shape ``(len(omegas), n, n)``.
    """

    omegas: np.ndarray
    u: np.ndarray
    t: np.ndarray
    labels: tuple[str, ...]
    kinds: tuple[ModeKind, ...]
    spec_digest: str
    kappa_ref: float = 1.0

    def __len__(self) -> int:
        return len(self.omegas)

    def __getitem__(self, k: int) -> ScatteringResult:
        return ScatteringResult(float(self.omegas[k]), self.u[k], self.t[k], self.labels)

    @property
    def results(self) -> list[ScatteringResult]:
        return [self[k] for k in range(len(self))]

    def entry(self, row: int | str, col: int | str) -> np.ndarray:
        """``T[row, col]`` across the grid (labels or ids)."""
        r = self.labels.index(row) if isinstance(row, str) else row
        c = self.labels.index(col) if isinstance(col, str) else col
        return self.t[:, r, c]

    def column_order(self) -> list[tuple[int, int]]:
        """(row, col) pairs in export order: cavity-cavity entries first."""
        n = len(self.labels)
        cav = [self.kinds[i] is ModeKind.CAVITY for i in range(n)]
        pairs = [(i, j) for i in range(n) for j in range(n)]
        return [p for p in pairs if cav[p[0]] and cav[p[1]]] + [p for p in pairs if not (cav[p[0]] and cav[p[1]])]

    def column_names(self) -> list[str]:
        return [f"T_{self.labels[i]}_{self.labels[j]}" for i, j in self.column_order()]

    def to_csv(self) -> str:
        """CSV text: ``omega`` then one column per T entry, 12 significant digits, LF endings."""
        order = self.column_order()
        buf = io.StringIO()
        buf.write(",".join(["omega", *self.column_names()]) + "\n")
        for k, w in enumerate(self.omegas):
            vals = [w, *(self.t[k, i, j] for i, j in order)]
            buf.write(",".join(_fmt(v) for v in vals) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        order = self.column_order()
        return {
            "spec_digest": self.spec_digest,
            "kappa_ref": self.kappa_ref,
            "labels": list(self.labels),
            "omega": [float(_fmt(w)) for w in self.omegas],
            "T": {
                name: [float(_fmt(v)) for v in self.t[:, i, j]]
                for name, (i, j) in zip(self.column_names(), order)
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _fmt(x: float) -> str:
    s = f"{float(x):.12g}"
    return "0" if s == "-0" else s


def sweep(spec: SystemSpec, omega_min: float, omega_max: float, count: int) -> SweepGrid:
    """Uniform grid (endpoints included) of scattering results.

    Each frequency is solved independently; a singular frequency aborts the
    sweep with its index attached to the error.
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    if not omega_min < omega_max:
        raise ValueError("omega_min must be < omega_max")
    stab = is_stable(spec)
    if not stab.stable:
        raise UnstableSpecError(stab.margin)
    omegas = np.linspace(float(omega_min), float(omega_max), int(count))
    return sweep_at(spec, omegas)


def sweep_at(spec: SystemSpec, omegas: Sequence[float]) -> SweepGrid:
    """Scattering results on an explicit, strictly increasing grid."""
    ws = np.asarray(omegas, dtype=float).reshape(-1)
    if len(ws) > 1 and not np.all(np.diff(ws) > 0):
        raise ValueError("omegas must be strictly increasing")
    if not np.all(np.isfinite(ws)):
        raise ValueError("omegas must be finite")
    cm = build_coefficient_matrix(spec)
    u = _backend.scattering_stack(cm.m, cm.sqrt_gamma, ws)
    return SweepGrid(
        omegas=ws,
        u=u,
        t=np.abs(u) ** 2,
        labels=spec.labels,
        kinds=tuple(m.kind for m in spec.modes),
        spec_digest=spec.digest(),
        kappa_ref=spec.kappa_ref,
    )


def max_unitarity_error(grid: SweepGrid) -> float:
    """max over the grid of ``max|U^dagger U - I|``."""
    n = grid.u.shape[1]
    prod = np.einsum("kji,kjl->kil", grid.u.conj(), grid.u)
    return float(np.max(np.abs(prod - np.eye(n))))


def max_stochasticity_error(grid: SweepGrid) -> float:
    """Largest deviation of any row or column sum of T from 1."""
    rows = np.abs(grid.t.sum(axis=2) - 1.0).max()
    cols = np.abs(grid.t.sum(axis=1) - 1.0).max()
    return float(max(rows, cols))


__all__ = [
    "ScatteringResult",
    "SweepGrid",
    "TransmissionPair",
    "max_stochasticity_error",
    "max_unitarity_error",
    "propagate_spectrum",
    "scattering_matrix",
    "sweep",
    "sweep_at",
    "transmission_pair",
]
