"""
Hermite interpolation on infinitely many nodes
==============================================

Prescribe values and derivatives at the nodes and compare the result with a
dense polynomial solve when the node set is finite.
"""

import numpy as np

from brody_forge.interpolation import (
    InterpolationTargets,
    build_interpolant,
    eval_g,
    eval_g_deriv,
    residual_report,
)
from brody_forge.products import NodeSystem

rng = np.random.default_rng(0)
nodes = NodeSystem.explicit([1, -1, 2])
p = rng.normal(size=3) + 1j * rng.normal(size=3)
k = rng.normal(size=3) + 1j * rng.normal(size=3)
interp = build_interpolant(nodes, InterpolationTargets(p, k))

# degree-5 polynomial through the same jets, by a confluent Vandermonde solve
V = np.zeros((6, 6), dtype=complex)
rhs = np.zeros(6, dtype=complex)
for i, x in enumerate(nodes.alpha):
    V[2 * i] = x ** np.arange(6)
    V[2 * i + 1] = np.arange(6) * x ** np.maximum(np.arange(6) - 1, 0)
    rhs[2 * i], rhs[2 * i + 1] = p[i], k[i]
poly = np.polynomial.Polynomial(np.linalg.solve(V, rhs))

z = np.linspace(-3, 3, 7) + 0.5j
print("max |g - poly| =", np.max(np.abs(eval_g(interp, z) - poly(z))))

# geometric nodes: the same construction, now with twelve nodes
nodes = NodeSystem.geometric(4, 4, 12)
targets = InterpolationTargets(np.arange(1, 13), np.ones(12))
interp = build_interpolant(nodes, targets)
print(" j   rel value res   rel deriv res")
for r in residual_report(interp):
    print(f"{r.j:2d}   {r.rel_val_res:12.2e}   {r.rel_der_res:12.2e}")
print("g'(0) =", eval_g_deriv(interp, 0.0))
