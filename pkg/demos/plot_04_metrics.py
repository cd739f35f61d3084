"""
Euclidean and Fubini-Study lengths
==================================

Tangent lengths in the affine chart of the projective plane, compared with
the flat metric.
"""

import numpy as np

from brody_forge.geometry import EUCLIDEAN_C2, FS_P2, TangentAtPoint, triangle_gap

v = np.array([1.0, 0.0])
print(" |p|     Euclidean   Fubini-Study")
for s in (0.0, 0.5, 1.0, 10.0, 1e4):
    p = np.array([s, 0.0])
    print(f"{s:6g}   {EUCLIDEAN_C2.length(p, v):9.4f}   {FS_P2.length(p, v):.6g}")

# tangent lengths are subadditive
rng = np.random.default_rng(3)
p = rng.normal(size=2) + 1j * rng.normal(size=2)
t1 = TangentAtPoint(p, rng.normal(size=2) + 1j * rng.normal(size=2))
t2 = TangentAtPoint(p, rng.normal(size=2) + 1j * rng.normal(size=2))
print("triangle gap, FS:", triangle_gap(FS_P2, t1, t2))
