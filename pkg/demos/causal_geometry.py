"""Causal geometry tour: classification, light rays, triples, and the diamond.

Run:  python3 demos/causal_geometry.py
"""

import numpy as np

from brokenray.minkowski import (
    ObservationSet,
    SpacetimePoint,
    causal_classify,
    in_diamond,
    is_in_S_plus,
    lightlike_connects,
    sample_triples,
)

P = SpacetimePoint.of

# -- causal classification ---------------------------------------------------
origin = P(0, 0, 0, 0)
for q, label in [
    (P(1, 0, 0, 0), "timelike future"),
    (P(0, 1, 0, 0), "equal-time, displaced"),
    (P(1, 1, 0, 0), "on the light cone"),
]:
    print(f"{label:>24}: {causal_classify(origin, q).value}")

# -- lightlike connectivity ---------------------------------------------------
seg = lightlike_connects(P(0.1, 0, 0, 0), P(0.4, 0.3, 0, 0))
print(f"\nlight ray: theta={seg.direction}, affine span={seg.s_len}")
print("timelike pair connects:", lightlike_connects(origin, P(1, 0, 0, 0)) is not None)

# -- broken-ray triples through a vertex outside the cylinder ----------------
U = ObservationSet(0.15)
vertex = P(0.4, 0.3, 0, 0)
triples = sample_triples(U, vertex, count=5, seed=42)
print(f"\nsampled {len(triples)} triples through y={vertex}:")
for tr in triples:
    ok = is_in_S_plus(tr.x, tr.y, tr.z, U)
    print(f"  x.t={tr.x.t:.3f} |x|={np.linalg.norm(tr.x.x):.3f}  "
          f"z.t={tr.z.t:.3f} |z|={np.linalg.norm(tr.z.x):.3f}  valid={ok}")

# -- the reachable diamond ----------------------------------------------------
probes = [P(0.4, 0.3, 0, 0), P(0.5, 2.0, 0, 0), P(-0.1, 0.2, 0, 0), P(1.2, 0.25, 0, 0)]
print("\ndiamond membership:")
for y in probes:
    print(f"  t={y.t:+.2f} |x|={np.linalg.norm(y.x):.2f}: {in_diamond(y, U)}")
