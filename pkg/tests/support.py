"""Shared generators for random valid specs."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import strategies as st

from eomnet import SystemSpec


def random_spec(rng: np.random.Generator, n_cav: int | None = None, n_mech: int | None = None,
                damping=(0.01, 20.0), strength=(0.0, 5.0), p_edge: float = 0.8) -> SystemSpec:
    n_cav = n_cav or int(rng.integers(1, 4))
    n_mech = n_mech or int(rng.integers(1, 3))
    modes = [(f"a{i + 1}", "cavity", float(rng.uniform(*damping))) for i in range(n_cav)]
    modes += [(f"b{j + 1}", "mechanical", float(rng.uniform(*damping))) for j in range(n_mech)]
    couplings = []
    for i in range(n_cav):
        for j in range(n_mech):
            if rng.random() < p_edge:
                couplings.append((f"a{i + 1}", f"b{j + 1}", float(rng.uniform(*strength)),
                                  float(rng.uniform(0, 2 * math.pi))))
    return SystemSpec.build(modes=modes, couplings=couplings)


@st.composite
def specs(draw, max_cav: int = 3, max_mech: int = 2, min_damping: float = 0.01):
    n_cav = draw(st.integers(1, max_cav))
    n_mech = draw(st.integers(1, max_mech))
    damp = st.floats(min_damping, 20.0)
    modes = [(f"a{i + 1}", "cavity", draw(damp)) for i in range(n_cav)]
    modes += [(f"b{j + 1}", "mechanical", draw(damp)) for j in range(n_mech)]
    couplings = []
    for i in range(n_cav):
        for j in range(n_mech):
            if draw(st.booleans()):
                couplings.append((f"a{i + 1}", f"b{j + 1}", draw(st.floats(0.0, 5.0)),
                                  draw(st.floats(0.0, 2 * math.pi, exclude_max=True))))
    return SystemSpec.build(modes=modes, couplings=couplings)


@st.composite
def loop_specs(draw):
    """Four-mode loop topology with every edge present."""
    damp = st.floats(0.05, 20.0)
    modes = [("a1", "cavity", draw(damp)), ("a2", "cavity", draw(damp)),
             ("b1", "mechanical", draw(damp)), ("b2", "mechanical", draw(damp))]
    g = st.floats(0.05, 5.0)
    ph = st.floats(0.0, 2 * math.pi, exclude_max=True)
    couplings = [(c, b, draw(g), draw(ph)) for c in ("a1", "a2") for b in ("b1", "b2")]
    return SystemSpec.build(modes=modes, couplings=couplings)
