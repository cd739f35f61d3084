"""
Rescaling limits and the witness
================================

Rescale the family ``f_n(z) = F(n z)`` around ``a_j = A/j`` with radii
``rho_j = |B|/j + delta/j^2`` and watch the rescaled maps approach
``G(xi) = F(A + |B| xi)``. The exact case converges identically; the
perturbed one at rate ``1/j``.
"""

import numpy as np

from brody_forge.curves import build_curve
from brody_forge.rescaling import (
    RescalingRun,
    check_not_compactly_divergent,
    contradiction_witness,
    limit_identification,
)

curve = build_curve("punctured")
print("f_n(0) is the same point for all n:",
      check_not_compactly_divergent(curve, range(1, 33))["passed"])

for delta in (0.0, 1.0):
    run = RescalingRun(curve, A=0.1 + 0.2j, B=1.0, delta=delta, j_list=(8, 16, 32, 64))
    print(f"\ndelta = {delta}")
    print(" j   first-coord dev    j*rho measured")
    for r in limit_identification(run):
        print(f"{r.j:3d}   {r.dev_first_coord:14.3e}   {r.jrho_measured.real:.15f}")

# the limit curve is as fast as F at the node preimages, so no bound c works
for w in contradiction_witness(RescalingRun(curve), [5, 10, 20, 100]):
    print(f"c = {w['c']:5g}: first j with |G'| > c is {w['j']}")
