"""Geometry of the three-wave interaction: spans, cones, filament, flowout.

Run:  python3 demos/interaction_geometry.py
"""

import numpy as np

from brokenray.interaction import (
    ConeFamily,
    PhaseSpacePoint,
    cone_residual,
    eta_flow_components,
    filament_point,
    flowout_min_singular_value,
    lightlike_triplet,
    normalize_pair,
    span_determinant,
    symplectic_normal_form,
    symplectic_residual,
)

# -- two lightlike directions and the companions that span a third -------------
frame = normalize_pair([1, 1, 0, 0], [1, -0.8, 0.6, 0])
print(f"normal form: r0={frame.r0}, sign={frame.sign}, b={1 - frame.sign * np.sqrt(1 - frame.r0**2)}")
for r in (0.1, 0.05, 0.025):
    dec = lightlike_triplet(frame, r)
    lam = eta_flow_components(frame, r)
    print(f"  r={r:<6} r^2*alpha={np.round(r*r*dec.alpha, 5)}  "
          f"lambda={np.round(lam, 5)}  residual={dec.residual:.2e}")
print(f"span determinant at r=0.6: {span_determinant(0.6):.6f} (= 2r(1-a(r)) = 0.24)")

# -- filament of the triple cone intersection (paper figure parameters) --------
fam = ConeFamily(2.0, 0.8)
print("\nfilament t = T(z) on all three cones:")
for z in (0.0, 0.5, 1.0, 2.0):
    p = filament_point(2.0, z)
    res = max(cone_residual(fam, j, p) for j in (1, 2, 3))
    print(f"  z={z:<4} T={p.t:+.6f}  max cone residual {res:.1e}")

# -- the emitted front is an immersed surface ----------------------------------
sig = min(flowout_min_singular_value(2.0, t, a, z)
          for t in np.linspace(0.1, 2, 10)
          for a in np.linspace(0, 2 * np.pi, 7)
          for z in np.linspace(-0.4, 0.4, 9))
print(f"\nflowout Jacobian min singular value on the sweep: {sig:.5f}")

# -- symplectic normal form straightens the flowout pair ------------------------
rng = np.random.default_rng(0)
p = PhaseSpacePoint(rng.normal(size=4), rng.normal(size=4) + np.array([0, 2, 0, 0]))
print(f"symplectic residual at a random point: {symplectic_residual(+1, p):.2e}")
t, lam, th = 0.7, 1.3, np.array([0.6, 0.8, 0.0])
q = symplectic_normal_form(+1, PhaseSpacePoint(np.concatenate(([t], t * th)),
                                               np.concatenate(([-lam], lam * th))))
print(f"flowout point maps to model form: x={np.round(q.x, 12)}, xi={np.round(q.xi, 12)}")
