"""Non-abelian parallel transport along light rays: drift, oracles, covariance.

Run:  python3 demos/parallel_transport.py
"""

import numpy as np

from brokenray.minkowski import LightlikeSegment, ObservationSet, SpacetimePoint
from brokenray.transport import (
    ConnectionField,
    fundamental_solution,
    make_bump_gauge,
    parallel_transport,
    random_skew_hermitian,
    transport_gauge_covariance_check,
)

start = SpacetimePoint.of(0.0, 0.2, 0.1, 0.0)
theta = np.array([0.6, 0.8, 0.0])
seg = LightlikeSegment(start, SpacetimePoint(start.t + 1.2, start.x + 1.2 * theta), theta, 1.2)

# -- scalar constant connection has a closed-form transport -------------------
A1 = ConnectionField.constant(
    [np.array([[0.5j]]), np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1))]
)
res = parallel_transport(A1, seg)
print(f"scalar transport: {res.matrix[0,0]:.12f}  vs exp(-0.6j) = {np.exp(-0.6j):.12f}")

# -- unitarity drift of RK4 on a smooth random field --------------------------
A = ConnectionField.random_smooth(3, seed=7, scale=0.8)
for steps in (50, 200, 1200):
    r = parallel_transport(A, seg, steps=steps)
    print(f"steps={steps:5d}: unitarity defect {r.unitarity_defect:.3e}")

# -- the fundamental solution composes as a group ------------------------------
U10 = fundamental_solution(A, seg, 1.0, 0.0, steps=600)
U05 = fundamental_solution(A, seg, 0.5, 0.0, steps=300)
U10_via = fundamental_solution(A, seg, 1.0, 0.5, steps=300) @ U05
print(f"composition residual: {np.linalg.norm(U10 - U10_via):.3e}")

# -- gauge covariance of transport --------------------------------------------
obs = ObservationSet(0.1)
rng = np.random.default_rng(3)
u = make_bump_gauge(3, random_skew_hermitian(3, rng, 1.0),
                    SpacetimePoint.of(0.5, 0.7, 0.3, 0.0), 0.4, obs)
print(f"covariance residual: {transport_gauge_covariance_check(A, u, seg, steps=4000):.3e}")
