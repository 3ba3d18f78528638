"""Independent reference computations for golden files.

Nothing here imports eomnet. Coefficient matrices are rebuilt from literal
parameters and inverted by cofactor expansion in plain complex arithmetic,
so a shared bug in the package's LU path cannot leak into the goldens.

Regenerate with ``python3 tests/oracles.py``.
"""

from __future__ import annotations

import cmath
import json
import math
from pathlib import Path

GOLDEN_DIR = Path(__file__).parent / "golden"
OMEGAS = [-4.0, -2.0, -1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 4.0]


def det(a):
    n = len(a)
    if n == 1:
        return a[0][0]
    total = 0j
    for j in range(n):
        if a[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1 :] for row in a[1:]]
        total += (-1) ** j * a[0][j] * det(minor)
    return total


def cofactor_inverse(a):
    n = len(a)
    d = det(a)
    inv = [[0j] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(a) if k != i]
            # adjugate is the transposed cofactor matrix
            inv[j][i] = (-1) ** (i + j) * det(minor) / d
    return inv


def drift(dampings, edges):
    """``edges`` holds (cavity, mech, G, phase) with zero-based indices."""
    n = len(dampings)
    m = [[0j] * n for _ in range(n)]
    for i, g in enumerate(dampings):
        m[i][i] = g / 2
    for c, b, g, ph in edges:
        m[c][b] = 1j * g * cmath.exp(1j * ph)
        m[b][c] = 1j * g * cmath.exp(-1j * ph)
    return m


def scattering(dampings, edges, omega):
    n = len(dampings)
    m = drift(dampings, edges)
    a = [[m[i][j] - (1j * omega if i == j else 0) for j in range(n)] for i in range(n)]
    inv = cofactor_inverse(a)
    s = [math.sqrt(g) for g in dampings]
    return [[s[i] * inv[i][j] * s[j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]


def fig2(theta):
    # a1 a2 b1 b2
    return [1.0, 1.0, 1e-3, 16.0], [(0, 2, 0.5, 0.0), (0, 3, 2.0, 0.0), (1, 2, 0.5, theta), (1, 3, 2.0, 0.0)]


def fig4(theta):
    # a1 a2 a3 b1 b2
    g32 = math.sqrt(40.0)
    return (
        [1.0, 1.0, 10.0, 1e-3, 1e-3],
        [(0, 3, 0.5, 0.0), (0, 4, 2.0, 0.0), (1, 3, 0.5, theta), (1, 4, 2.0, 0.0), (2, 4, g32, 0.0)],
    )


CASES = {
    "fig2_theta_half_pi": lambda: fig2(math.pi / 2),
    "fig2_theta_3half_pi": lambda: fig2(3 * math.pi / 2),
    "fig4_theta_half_pi": lambda: fig4(math.pi / 2),
    "fig4_theta_3half_pi": lambda: fig4(3 * math.pi / 2),
}


def reduced_fig2(theta, omega):
    """Three-mode (a1, a2, b1) model with b2 eliminated, written out by hand."""
    k1 = k2 = 1.0
    g1, g2 = 1e-3, 16.0
    g11 = g21 = 0.5
    g12 = g22 = 2.0
    j2 = 2 * g12 * g22 / g2
    gi2 = [4 * g12**2 / g2, 4 * g22**2 / g2]
    e = cmath.exp(1j * theta)
    m = [
        [k1 / 2 + gi2[0] / 2, j2, 1j * g11],
        [j2, k2 / 2 + gi2[1] / 2, 1j * g21 * e],
        [1j * g11, 1j * g21 / e, g1 / 2],
    ]
    a = [[m[i][j] - (1j * omega if i == j else 0) for j in range(3)] for i in range(3)]
    inv = cofactor_inverse(a)
    s = [math.sqrt(k1), math.sqrt(k2), math.sqrt(g1)]
    u = [[s[i] * inv[i][j] * s[j] - (1 if i == j else 0) for j in range(3)] for i in range(3)]
    noise = [-1j * math.sqrt(gi2[0]), -1j * math.sqrt(gi2[1]), 0]
    out = [s[i] * sum(inv[i][k] * noise[k] for k in range(3)) for i in range(3)]
    j1 = 2 * g11 * g21 * e / (g1 - 2j * omega)
    return u, out, j1


def reduced_table():
    rows = []
    for theta in (math.pi / 2, 3 * math.pi / 2):
        for w in OMEGAS:
            u, out, j1 = reduced_fig2(theta, w)
            rows.append({
                "theta": theta,
                "omega": w,
                "u_re": [[x.real for x in r] for r in u],
                "u_im": [[x.imag for x in r] for r in u],
                "noise_re": [x.real for x in out],
                "noise_im": [x.imag for x in out],
                "j1": [j1.real, j1.imag],
            })
    return {"model": "fig2_reduced", "points": rows}


def golden_table(name):
    dampings, edges = CASES[name]()
    rows = []
    for w in OMEGAS:
        u = scattering(dampings, edges, w)
        rows.append({"omega": w, "T": [[abs(x) ** 2 for x in row] for row in u]})
    return {"preset": name, "points": rows}


def main():
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name in CASES:
        path = GOLDEN_DIR / f"{name}.json"
        path.write_text(json.dumps(golden_table(name), indent=1) + "\n")
        print("wrote", path)
    path = GOLDEN_DIR / "fig2_reduced.json"
    path.write_text(json.dumps(reduced_table(), indent=1) + "\n")
    print("wrote", path)


if __name__ == "__main__":
    main()
