"""Writes elastic_bilayer.json and elastic_materials.json.

Two layers split at x = f1 in the unit square. Tangential strain and traction
are continuous across the interface, so the piecewise-linear displacement is an
exact solution. The interface sits on an element edge so the midpoint samples
integrate the boundary moments exactly.
"""
import json

k = {1: 1.0, 2: 2.5}
m = {1: 0.6, 2: 1.2}
f1 = 0.375
e, s, t = 0.002, 0.01, 0.004  # shared eps_yy, sigma_xx, sigma_xy

G = {}
for ph in (1, 2):
    exx = (s - (k[ph] - m[ph]) * e) / (k[ph] + m[ph])
    G[ph] = [[exx, 0.0], [t / m[ph], e]]


def stress(ph):
    g = G[ph]
    exx, eyy, exy = g[0][0], g[1][1], 0.5 * (g[0][1] + g[1][0])
    tr = exx + eyy
    return [[k[ph] * tr + m[ph] * (exx - eyy), 2 * m[ph] * exy],
            [2 * m[ph] * exy, k[ph] * tr - m[ph] * (exx - eyy)]]


def disp(x):
    g = G[1 if x[0] < f1 else 2]
    a = [x[0] - f1, x[1]]
    return [g[0][0] * a[0] + g[0][1] * a[1], g[1][0] * a[0] + g[1][1] * a[1]]


N = 1024
h = 1.0 / N
edges = [(lambda q: [q, 0.0], [0.0, -1.0], [1.0, 0.0]),
         (lambda q: [1.0, q], [1.0, 0.0], [0.0, 1.0]),
         (lambda q: [1.0 - q, 1.0], [0.0, 1.0], [-1.0, 0.0]),
         (lambda q: [0.0, 1.0 - q], [-1.0, 0.0], [0.0, -1.0])]
samples = []
for pos, n, tt in edges:
    for i in range(N):
        x = pos((i + 0.5) * h)
        ph = 1 if x[0] < f1 else 2
        S = stress(ph)
        samples.append({"x": x, "n": n, "t": tt, "ds": h, "phase": ph, "u": disp(x),
                        "traction": [S[0][0] * n[0] + S[0][1] * n[1], S[1][0] * n[0] + S[1][1] * n[1]]})

with open("elastic_bilayer.json", "w") as out:
    json.dump({"area": 1.0, "samples": samples}, out)
with open("elastic_materials.json", "w") as out:
    json.dump({"kappa1": k[1], "kappa2": k[2], "mu1": m[1], "mu2": m[2], "k1": 4e-5, "k2": 4e-5, "f1": f1}, out, indent=2)
    out.write("\n")
