"""
Squared products with double zeros
==================================

Evaluate the squared product over geometric nodes, in both the direct and
the log-magnitude/phase forms, and check the truncation bound.
"""

import numpy as np

from brody_forge.products import (
    NodeSystem,
    eval_H_excl,
    eval_h,
    eval_h_deriv,
    eval_h_log,
    truncation_bound,
)

nodes = NodeSystem.geometric(r=4.0, rho=4.0, j_max=12)
print("nodes:", nodes.alpha[:4], "...")
print("tail bound on sum 1/|alpha_j|:", nodes.tail_bound)

# h and h' vanish exactly at every node
print("h(alpha)  =", eval_h(nodes.alpha, nodes)[:4])
print("h'(alpha) =", eval_h_deriv(nodes.alpha, nodes)[:4])

# far from the origin the log form keeps going after the direct one overflows
for z in (10.0, 1e6, 1e40):
    lc = eval_h_log(z, nodes)
    print(f"z = {z:8.0e}: log|h| = {lc.log_mag:10.3f}, arg h = {lc.phase:+.3f}")

# the factor-deleted product stays away from zero at its own node
for j in (1, 6, 12):
    print(f"log|H_{j}(alpha_{j})| = {eval_H_excl(j, nodes.alpha[j - 1], nodes).log_mag:.4f}")

for z in (1.0, 2.0, 5.0):
    print(f"truncation bound at |z| = {z}: {truncation_bound(z, nodes):.3e}")
