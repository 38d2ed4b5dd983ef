"""Geometry of the three-wave interaction: spans, cones, filament, flowout.

Everything here is exact linear algebra and closed-form differential geometry.
The central construction: given two lightlike (co)vectors xi1 and eta at a
common point, a rotation brings them to the normal form

    xi1 = (1, 1, 0, 0),    eta = (1, sign * a(r0), r0, 0),    a(r) = sqrt(1-r^2),

and for every 0 < r < 1 the two lightlike companions

    xi2 = (1, a(r), r, 0),    xi3 = (1, a(r), -r, 0)

complete xi1 to a basis whose span contains eta; the exact expansion
coefficients alpha solve a 3x3 system with determinant 2 r (1 - a(r)) and obey
the small-r asymptotics r^2 alpha -> (-2b, b, b) with b = 1 - sign * a(r0).
For configurations where the outgoing ray returns to the observation cylinder
the sign is negative, hence b >= 1 and eta avoids every two-vector span.

The second half covers the intersection K_1 ∩ K_2 ∩ K_3 of the three light
cones with apexes on the incoming rays: a curve ("filament") t = T(z) =
-s_in + sqrt(s_in^2 + z^2) on the axis x1 = x2 = 0, the flowout map sweeping
the wave front it emits, conormal fibers of a light cone, and the homogeneous
symplectic normal forms that straighten the flowout pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .minkowski import SpacetimePoint

LIGHTLIKE_TOL = 1e-10


class DegeneratePairError(ValueError):
    """eta is a positive multiple of xi1; the b = 0 case is excluded."""


def lorentz_sq(v) -> float:
    """Minkowski quadratic form -v0^2 + |v'|^2 (same for vectors and covectors)."""
    v = np.asarray(v, dtype=float).reshape(4)
    return float(-v[0] ** 2 + np.dot(v[1:], v[1:]))


def is_lightlike(v, tol: float = LIGHTLIKE_TOL) -> bool:
    v = np.asarray(v, dtype=float).reshape(4)
    scale = float(np.dot(v, v))
    return scale > 0 and abs(lorentz_sq(v)) <= tol * max(1.0, scale)


def a_of(r: float) -> float:
    return math.sqrt(1.0 - r * r)


@dataclass
class LightlikeFrame:
    """Pair (xi1, eta) in rotated normal form.

    rotation maps world spatial coordinates to frame coordinates in which
    xi1 = (1,1,0,0) and eta = (1, sign*a(r0), r0, 0); both inputs are stored
    rescaled to first component 1.
    """

    xi1: np.ndarray
    eta: np.ndarray
    rotation: np.ndarray
    r0: float
    sign: int

    def to_frame(self, v4) -> np.ndarray:
        v4 = np.asarray(v4, dtype=float).reshape(4)
        return np.concatenate(([v4[0]], self.rotation @ v4[1:]))

    def to_world(self, v4) -> np.ndarray:
        v4 = np.asarray(v4, dtype=float).reshape(4)
        return np.concatenate(([v4[0]], self.rotation.T @ v4[1:]))


@dataclass
class TripletDecomposition:
    """Companions xi2, xi3 and the exact expansion eta = sum alpha_j xi_j."""

    xi2: np.ndarray
    xi3: np.ndarray
    r: float
    alpha: np.ndarray
    b: float
    residual: float


@dataclass
class ConeFamily:
    """Apexes of the three light cones K_j, with the vertex at the origin.

    x_j = (-s_in, -s_in*a(r_j), -s_in*r_j, 0) for r_1 = 0, r_2 = r, r_3 = -r;
    the common point (0,0,0,0) sits on all three cones at affine distance s_in.
    """

    s_in: float
    r: float

    def __post_init__(self):
        if self.s_in <= 0:
            raise ValueError("s_in must be positive")
        if not 0 < self.r < 1:
            raise ValueError("r must lie in (0, 1)")

    @property
    def r_values(self):
        return (0.0, self.r, -self.r)

    def apex(self, j: int) -> SpacetimePoint:
        rj = self.r_values[j - 1]
        return SpacetimePoint(-self.s_in, np.array([-self.s_in * a_of(rj), -self.s_in * rj, 0.0]))


def normalize_pair(xi1, eta) -> LightlikeFrame:
    """Rotate a lightlike pair to the normal form of the span construction.

    Both vectors are rescaled to first component 1; the rotation sends the
    spatial part of xi1 to (1,0,0) and the pair's spatial plane to x3 = 0 with
    the eta-component along +x2, so r0 >= 0.  A pair with eta parallel to xi1
    and equal orientation is rejected (the excluded b = 0 configuration).
    """
    xi1 = np.asarray(xi1, dtype=float).reshape(4)
    eta = np.asarray(eta, dtype=float).reshape(4)
    for v in (xi1, eta):
        if not is_lightlike(v):
            raise ValueError("normalize_pair requires lightlike inputs")
        if abs(v[0]) < 1e-14:
            raise ValueError("cannot rescale a vector with vanishing time component")
    xi1 = xi1 / xi1[0]
    eta = eta / eta[0]
    e1 = xi1[1:]
    res = eta[1:] - np.dot(eta[1:], e1) * e1
    nres = np.linalg.norm(res)
    if nres > 1e-13:
        e2 = res / nres
    else:
        if np.dot(eta[1:], e1) > 0:
            raise DegeneratePairError("eta is a positive multiple of xi1 (b = 0 excluded)")
        # antiparallel pair: complete with the coordinate axis least aligned to e1
        k = int(np.argmin(np.abs(e1)))
        cand = np.zeros(3)
        cand[k] = 1.0
        cand -= np.dot(cand, e1) * e1
        e2 = cand / np.linalg.norm(cand)
    e3 = np.cross(e1, e2)
    rotation = np.vstack([e1, e2, e3])
    eta_f = rotation @ eta[1:]
    r0 = float(eta_f[1])
    c = float(eta_f[0])
    sign = 1 if c > 0 else -1
    return LightlikeFrame(xi1, eta, rotation, r0, sign)


def lightlike_triplet(frame: LightlikeFrame, r: float) -> TripletDecomposition:
    """Companions xi2, xi3 at aperture r and the exact expansion of eta.

    Solves the 3x3 system (the fourth coordinate vanishes identically in frame
    coordinates) and reports the world-coordinate reconstruction residual.
    """
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    ar = a_of(r)
    xi2_f = np.array([1.0, ar, r, 0.0])
    xi3_f = np.array([1.0, ar, -r, 0.0])
    eta_f = frame.to_frame(frame.eta)
    M = np.array(
        [
            [1.0, 1.0, 1.0],
            [1.0, ar, ar],
            [0.0, r, -r],
        ]
    )
    alpha = np.linalg.solve(M, eta_f[:3])
    xi2 = frame.to_world(xi2_f)
    xi3 = frame.to_world(xi3_f)
    recon = alpha[0] * frame.xi1 + alpha[1] * xi2 + alpha[2] * xi3
    residual = float(np.linalg.norm(frame.eta - recon))
    b = 1.0 - frame.sign * a_of(frame.r0)
    return TripletDecomposition(xi2, xi3, r, alpha, b, residual)


def span_determinant(r: float) -> float:
    """Determinant of the frame-coordinate system matrix: 2 r (1 - a(r))."""
    M = np.array([[1.0, 1.0, 1.0], [1.0, a_of(r), a_of(r)], [0.0, r, -r]])
    return float(np.linalg.det(M))


def check_sign_condition(frame: LightlikeFrame) -> float:
    """b = 1 - sign * a(r0); callers assert b >= 1 on cylinder-return frames."""
    return 1.0 - frame.sign * a_of(frame.r0)


def eta_flow_components(frame: LightlikeFrame, r: float):
    """(lambda_1, lambda_2, lambda_3) with eta^(1) = -r^{-2} lambda_1 xi_1 etc.

    lambda_j = -+ r^2 alpha_j per the decomposition sign convention; all three
    are positive for small r, with lambda_1 -> 2b and lambda_2,3 -> b.
    """
    dec = lightlike_triplet(frame, r)
    lam = np.array([-dec.alpha[0], dec.alpha[1], dec.alpha[2]]) * r * r
    return float(lam[0]), float(lam[1]), float(lam[2])


def frame_from_triple(triple) -> LightlikeFrame:
    """Frame of the incoming/outgoing tangent pair at the vertex of a triple."""
    return normalize_pair(triple.leg_in.tangent(), triple.leg_out.tangent())


def cone_contains(family: ConeFamily, j: int, p: SpacetimePoint, tol: float = 1e-12) -> bool:
    """Strict forward light cone membership |p.x - x_j'| = p.t - t_j > 0."""
    if j not in (1, 2, 3):
        raise ValueError("cone index must be 1, 2, or 3")
    apex = family.apex(j)
    dt = p.t - apex.t
    dr = float(np.linalg.norm(p.x - apex.x))
    return dt > tol and abs(dr - dt) <= tol * max(1.0, abs(dt))


def cone_residual(family: ConeFamily, j: int, p: SpacetimePoint) -> float:
    """| |p.x - x_j'| - (p.t - t_j) |, zero exactly on the cone."""
    apex = family.apex(j)
    return abs(float(np.linalg.norm(p.x - apex.x)) - (p.t - apex.t))


def filament_time(s_in: float, z: float) -> float:
    return -s_in + math.sqrt(s_in * s_in + z * z)


def filament_point(s_in: float, z: float) -> SpacetimePoint:
    """Point (T(z), 0, 0, z) of the triple cone intersection curve."""
    if s_in <= 0:
        raise ValueError("s_in must be positive")
    return SpacetimePoint(filament_time(s_in, z), np.array([0.0, 0.0, z]))


def flowout_map(s_in: float, t: float, theta_angle: float, z: float):
    """Point and 4x3 Jacobian of F(t, theta, z) = (T(z)+t, t*thetatilde, z+t*eps).

    eps = T'(z) and thetatilde = sqrt(1-eps^2) * (cos, sin) of the angle; the
    Jacobian columns are derivatives in (t, theta_angle, z) and have full rank
    3 throughout the validity region t > 0, |z| < s_in/2.
    """
    if s_in <= 0:
        raise ValueError("s_in must be positive")
    if t <= 0:
        raise ValueError("flowout requires t > 0")
    Z = math.sqrt(s_in * s_in + z * z)
    eps = z / Z
    root = math.sqrt(1.0 - eps * eps)
    c, s = math.cos(theta_angle), math.sin(theta_angle)
    point = np.array([filament_time(s_in, z) + t, t * root * c, t * root * s, z + t * eps])
    deps_dz = (1.0 - eps * eps) / Z
    droot_dz = -eps / root * deps_dz
    jac = np.zeros((4, 3))
    jac[:, 0] = [1.0, root * c, root * s, eps]
    jac[:, 1] = [0.0, -t * root * s, t * root * c, 0.0]
    jac[:, 2] = [eps, t * droot_dz * c, t * droot_dz * s, 1.0 + t * deps_dz]
    return point, jac


def flowout_min_singular_value(s_in: float, t: float, theta_angle: float, z: float) -> float:
    _, jac = flowout_map(s_in, t, theta_angle, z)
    return float(np.linalg.svd(jac, compute_uv=False)[-1])


def lightcone_conormal_fiber(t: float, theta) -> np.ndarray:
    """Generator (-1, theta) of the conormal fiber of the cone K at (t, t*theta)."""
    if t <= 0:
        raise ValueError("the cone chart requires t > 0")
    theta = np.asarray(theta, dtype=float).reshape(3)
    if abs(np.linalg.norm(theta) - 1.0) > 1e-12:
        raise ValueError("theta must be a unit vector")
    return np.concatenate(([-1.0], theta))


def lightcone_tangent_basis(t: float, theta) -> np.ndarray:
    """Three tangent vectors of K = {(s, s*w)} at (t, t*theta), rows of a (3,4)."""
    theta = np.asarray(theta, dtype=float).reshape(3)
    k = int(np.argmin(np.abs(theta)))
    aux = np.zeros(3)
    aux[k] = 1.0
    e1 = np.cross(theta, aux)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(theta, e1)
    rows = [np.concatenate(([1.0], theta))]
    for e in (e1, e2):
        rows.append(np.concatenate(([0.0], t * e)))
    return np.vstack(rows)


@dataclass
class PhaseSpacePoint:
    """Point (x, xi) of the cotangent bundle in Cartesian coordinates."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(4)
        self.xi = np.asarray(self.xi, dtype=float).reshape(4)


def symplectic_normal_form(sign: int, p: PhaseSpacePoint) -> PhaseSpacePoint:
    """Homogeneous symplectic map straightening the point/flowout pair.

    F^+(x0, x'; xi0, xi') = (x0, x' - x0 xi'/|xi'|; xi0 + |xi'|, xi') and the
    F^- analogue with both inner signs flipped; fixes the fiber over the
    origin and maps the corresponding flowout component onto the model
    Lagrangian {xi_1 = 0, x^1 >= 0, x' = 0}.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    x, xi = p.x, p.xi
    nrm = float(np.linalg.norm(xi[1:]))
    if nrm == 0.0:
        raise ValueError("xi' must be non-zero")
    eta = xi[1:] / nrm
    x_new = np.concatenate(([x[0]], x[1:] - sign * x[0] * eta))
    xi_new = np.concatenate(([xi[0] + sign * nrm], xi[1:]))
    return PhaseSpacePoint(x_new, xi_new)


def symplectic_normal_form_jacobian(sign: int, p: PhaseSpacePoint) -> np.ndarray:
    """Analytic 8x8 Jacobian of F^{sign} in coordinates (x0, x', xi0, xi')."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    xi = p.xi
    nrm = float(np.linalg.norm(xi[1:]))
    if nrm == 0.0:
        raise ValueError("xi' must be non-zero")
    eta = xi[1:] / nrm
    proj = (np.eye(3) - np.outer(eta, eta)) / nrm
    J = np.eye(8)
    J[1:4, 0] = -sign * eta
    J[1:4, 5:8] = -sign * p.x[0] * proj
    J[4, 5:8] = sign * eta
    return J


def symplectic_form_matrix() -> np.ndarray:
    """Canonical symplectic form on T*R^4 in (x, xi) block coordinates."""
    J = np.zeros((8, 8))
    J[:4, 4:] = np.eye(4)
    J[4:, :4] = -np.eye(4)
    return J


def symplectic_residual(sign: int, p: PhaseSpacePoint) -> float:
    """|| (dF)^T J dF - J ||_F with the analytic Jacobian."""
    dF = symplectic_normal_form_jacobian(sign, p)
    J = symplectic_form_matrix()
    return float(np.linalg.norm(dF.T @ J @ dF - J))
