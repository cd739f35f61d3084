"""
Sums against products
=====================

Classify positive sequences by the joint behaviour of the series and the
products with factors ``1 + c_n`` and ``1 - c_n``.
"""

import numpy as np

from brody_forge.products import lemma1_classify

cases = {
    "1/n^2": (lambda n: 1.0 / n**2, 1),
    "1/n": (lambda n: 1.0 / n, 2),
    "exp(-sqrt n)": (lambda n: np.exp(-np.sqrt(n)), 1),
    # diverges like log log N, far too slowly to show by N = 10^4; expect a
    # (consistent) wrong verdict here
    "1/(n log n)": (lambda n: 1.0 / (n * np.log(n)), 2),
}

for name, (fn, start) in cases.items():
    rep = lemma1_classify(fn, 10_000, start=start)
    print(f"{name:>14}: {rep.verdict:14s} clause(c)={rep.clause_c:8s} "
          f"sum={rep.partial_sums[-1]:.6f} prod+={rep.partial_products_plus[-1]:.6g}")

# the harmonic product with factors 1 - 1/n telescopes to 1/N
rep = lemma1_classify(lambda n: 1.0 / n, 1000, start=2)
print("max |N * P-(N) - 1| =", np.max(np.abs(rep.n * rep.partial_products_minus - 1)))
