"""
A curve whose speed blows up along the nodes
============================================

Build ``F(z) = (w, f(g(w)))`` and compare its speed at the node preimages
with the certified lower bound, for the plane and punctured variants.
"""

from brody_forge.curves import blowup_table, build_curve, first_crossing

for variant in ("plane", "punctured"):
    spec = build_curve(variant)
    rows = blowup_table(spec)
    print(f"\n{variant}: {spec.metric.kind} metric, {spec.inner.kind}")
    print(" j     speed       bound      E1        E2")
    for r in rows:
        print(f"{r.j:2d} {r.length_E:10.4f} {r.lower_bound:10.4f} {r.e1:9.4f} {r.e2:9.4f}")
    for c in (5, 10, 15):
        print(f"bound first reaches {c} at j = {first_crossing(rows, c)}")
