"""Numerical laboratory for light-ray geometry and gauge fields in Minkowski space.

The package is organized around five pillars:

* ``minkowski`` -- causal structure of R^{1+3}, lightlike connectivity, the
  cylindrical observation set, and sampling of broken-ray triples.
* ``transport`` -- Hermitian connections, gauge maps, and non-abelian parallel
  transport along lightlike segments (matrix ODE, classical RK4).
* ``broken_ray`` -- the forward broken light-ray transform, its constructive
  gauge inversion, and pointwise connection recovery from directional pairings.
* ``interaction`` -- the lightlike-span decomposition with its small-r
  asymptotics, three-cone intersection geometry (filament and flowout), light
  cone conormal fibers, and symplectic normal forms.
* ``wave`` -- a desk-scale explicit solver for the cubic connection wave
  equation with finite-difference verification of the multi-fold linearization
  identities.

``cli`` binds everything into reproducible, configuration-driven experiments.
"""

__version__ = "0.1.0"
