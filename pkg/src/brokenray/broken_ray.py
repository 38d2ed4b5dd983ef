"""Forward broken light-ray transform and its constructive gauge inversion.

The measured quantity is the composition of the two leg transports of a
triple x < y < z,

    S_{z<-y<-x} = P_{z<-y} P_{y<-x},

a unitary matrix per triple.  When two connections A and B produce identical
S-data, the matrix

    u(y, x) = P^A_{y<-x} (P^B_{y<-x})^{-1}

does not depend on the base point x; evaluated over a spread of base points it
reconstructs the gauge u relating B to A at the vertex y.  Differentiating the
reconstructed field along coordinate stencils recovers the gauge-transformed
connection, and pairings against four spanning lightlike directions invert to
the connection components themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .minkowski import (
    LightlikeSegment,
    ObservationSet,
    SpacetimePoint,
    lightlike_connects,
    sample_triples,
)
from .transport import (
    ConnectionField,
    GaugeMap,
    frobenius,
    pairing,
    parallel_transport,
    polar_unitary,
    unitarity_defect,
)


class DegenerateSpanError(ValueError):
    """Direction set does not span R^4 well enough to invert pairings."""


@dataclass
class BrokenRayDatum:
    """A triple together with its transport matrix S (unitary up to drift)."""

    triple: object
    S: np.ndarray
    unitarity_defect: float


@dataclass
class ReconstructionReport:
    """Gauge value recovered at one vertex from several base points."""

    y: SpacetimePoint
    u_rec: np.ndarray
    x_independence_defect: float
    gauge_residual: float
    unitarity_defect: float


def broken_transform(A: ConnectionField, triple, steps: Optional[int] = None) -> BrokenRayDatum:
    """S = P_{z<-y} P_{y<-x} for a valid triple."""
    leg_in, leg_out = triple.leg_in, triple.leg_out
    if np.linalg.norm(leg_in.end.as_array() - leg_out.start.as_array()) > 1e-9:
        raise ValueError("triple legs do not meet at the vertex")
    P_in = parallel_transport(A, leg_in, steps)
    P_out = parallel_transport(A, leg_out, steps)
    S = P_out.matrix @ P_in.matrix
    return BrokenRayDatum(triple, S, unitarity_defect(S))


def transport_to_vertex(
    A: ConnectionField, x: SpacetimePoint, y: SpacetimePoint, steps: Optional[int] = None
) -> np.ndarray:
    """P^A_{y<-x} along the unique lightlike segment from x up to y."""
    seg = lightlike_connects(x, y)
    if seg is None or y.t <= x.t:
        raise ValueError("base point does not lightlike-connect into the vertex")
    return parallel_transport(A, seg, steps).matrix


def reconstruct_gauge_at(
    A: ConnectionField,
    B: ConnectionField,
    y: SpacetimePoint,
    base_points: Sequence[SpacetimePoint],
    steps: Optional[int] = None,
) -> ReconstructionReport:
    """Recover u(y) = P^A_{y<-x} (P^B_{y<-x})^{-1} from several base points.

    The individual matrices are averaged and projected to U(n); the maximal
    pairwise Frobenius deviation is reported before projection, as is the
    unitarity defect of the raw mean.
    """
    if not base_points:
        raise ValueError("at least one base point is required")
    candidates = []
    for x in base_points:
        PA = transport_to_vertex(A, x, y, steps)
        PB = transport_to_vertex(B, x, y, steps)
        candidates.append(PA @ np.linalg.inv(PB))
    defect = 0.0
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            defect = max(defect, frobenius(candidates[i] - candidates[j]))
    mean = np.mean(candidates, axis=0)
    return ReconstructionReport(
        y=y,
        u_rec=polar_unitary(mean),
        x_independence_defect=defect,
        gauge_residual=float("nan"),
        unitarity_defect=unitarity_defect(mean),
    )


def _base_points_for(
    U: ObservationSet, y: SpacetimePoint, n_base: int, seed: int
) -> list:
    triples = sample_triples(U, y, n_base, seed)
    return [tr.x for tr in triples]


def reconstruct_gauge_field(
    A: ConnectionField,
    B: ConnectionField,
    U: ObservationSet,
    steps: Optional[int] = None,
    n_base: int = 6,
    seed: int = 0,
) -> Callable[[np.ndarray], np.ndarray]:
    """Sampled gauge map: p -> u_rec(p), reconstructing at each request.

    Backs verify_pairing_match and the stencil differentiation of the
    reconstruction; every call draws its own base points (a fixed base point
    cannot lightlike-connect to more than one vertex).
    """

    def u_field(p) -> np.ndarray:
        yp = p if isinstance(p, SpacetimePoint) else SpacetimePoint.from_array(p)
        xs = _base_points_for(U, yp, n_base, seed)
        if not xs:
            raise ValueError(f"no base points reach {yp}")
        return reconstruct_gauge_at(A, B, yp, xs, steps).u_rec

    return u_field


def gauge_residual_at(
    A: ConnectionField,
    B: ConnectionField,
    U: ObservationSet,
    y: SpacetimePoint,
    steps: Optional[int] = None,
    n_base: int = 6,
    seed: int = 0,
    fd_step: float = 1e-4,
    u_center: Optional[np.ndarray] = None,
) -> float:
    """max_mu || B_mu(y) - (u^{-1} d_mu u + u^{-1} A_mu u)(y) || for reconstructed u.

    The differential of the reconstructed gauge uses central differences on a
    coordinate stencil of reconstructed values around y.
    """
    u_field = reconstruct_gauge_field(A, B, U, steps, n_base, seed)
    uy = u_center if u_center is not None else u_field(y)
    uinv = uy.conj().T
    Ay = A(y)
    By = B(y)
    worst = 0.0
    for mu in range(4):
        e = np.zeros(4)
        e[mu] = fd_step
        up = u_field(y.as_array() + e)
        um = u_field(y.as_array() - e)
        du = (up - um) / (2 * fd_step)
        tilde = uinv @ du + uinv @ Ay[mu] @ uy
        worst = max(worst, frobenius(By[mu] - tilde))
    return worst


def verify_pairing_match(
    A: ConnectionField,
    B: ConnectionField,
    u_field: Callable[[np.ndarray], np.ndarray],
    seg: LightlikeSegment,
    num_samples: int = 9,
    fd_step: float = 1e-4,
) -> float:
    """max_s || <A~ - B, gamma'(s)> ||_F with A~ the u_field-transform of A.

    The differential of u_field along the segment uses central differences at
    each sample; the pairing is taken against the common tangent (1, theta).
    """
    tangent = seg.tangent()
    worst = 0.0
    for s in np.linspace(0.0, seg.s_len, num_samples):
        p = seg.point_at(s).as_array()
        uy = u_field(p)
        uinv = uy.conj().T
        du_dir = np.zeros_like(uy)
        for mu in range(4):
            e = np.zeros(4)
            e[mu] = fd_step
            du_dir = du_dir + tangent[mu] * (u_field(p + e) - u_field(p - e)) / (2 * fd_step)
        tilde_pair = uinv @ du_dir + uinv @ pairing(A, p, tangent) @ uy
        worst = max(worst, frobenius(tilde_pair - pairing(B, p, tangent)))
    return worst


def tetrahedral_directions() -> np.ndarray:
    """Four unit 3-vectors at the vertices of a regular tetrahedron."""
    v = np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    )
    return v / np.sqrt(3.0)


def recover_connection_at(
    y: SpacetimePoint,
    pairings: Sequence[tuple],
    cond_limit: float = 1e3,
) -> tuple:
    """Solve sum_mu C_mu v_k^mu = value_k for the components (C_0..C_3).

    Each pairing is (direction 4-vector, n x n matrix).  Solved entrywise in
    least squares; raises DegenerateSpanError for fewer than four directions
    or an ill-conditioned direction matrix.
    """
    if len(pairings) < 4:
        raise DegenerateSpanError("need at least four directions to span R^4")
    dirs = np.array([np.asarray(v, dtype=float).reshape(4) for v, _ in pairings])
    vals = np.array([np.asarray(m, dtype=complex) for _, m in pairings])
    cond = np.linalg.cond(dirs)
    if not np.isfinite(cond) or cond > cond_limit:
        raise DegenerateSpanError(f"direction matrix condition number {cond:.3e} exceeds {cond_limit:g}")
    n = vals.shape[-1]
    sol, *_ = np.linalg.lstsq(dirs, vals.reshape(len(pairings), n * n), rcond=None)
    return tuple(sol.reshape(4, n, n))


def lightlike_frame_pairings(A: ConnectionField, y: SpacetimePoint) -> list:
    """Forward-generated pairings of A at y over the tetrahedral lightlike frame."""
    out = []
    for theta in tetrahedral_directions():
        v = np.concatenate(([1.0], theta))
        out.append((v, pairing(A, y, v)))
    return out


@dataclass
class EndToEndReport:
    """Synthetic-inversion results over a vertex grid."""

    reports: list
    u_errors: list
    s_equality_max: float
    s_unitarity_max: float
    triple_count: int

    def summary(self) -> dict:
        defects = [r.x_independence_defect for r in self.reports]
        residuals = [r.gauge_residual for r in self.reports]
        return {
            "count": len(self.reports),
            "triple_count": self.triple_count,
            "s_equality_max": self.s_equality_max,
            "s_unitarity_max": self.s_unitarity_max,
            "x_independence_defect": {"max": max(defects, default=0.0), "mean": float(np.mean(defects)) if defects else 0.0},
            "gauge_residual": {"max": max(residuals, default=0.0), "mean": float(np.mean(residuals)) if residuals else 0.0},
            "u_error": {"max": max(self.u_errors, default=0.0), "mean": float(np.mean(self.u_errors)) if self.u_errors else 0.0},
        }

    CSV_HEADER = ["y_t", "y_x1", "y_x2", "y_x3", "x_indep_defect", "gauge_residual", "unitarity_defect"]

    def csv_rows(self) -> list:
        rows = []
        for r in self.reports:
            rows.append(
                list(r.y.as_array())
                + [r.x_independence_defect, r.gauge_residual, r.unitarity_defect]
            )
        return rows


def end_to_end_synthetic(
    A: ConnectionField,
    u: GaugeMap,
    U: ObservationSet,
    y_grid: Sequence[SpacetimePoint],
    steps: Optional[int] = None,
    seed: int = 0,
    n_base: int = 6,
    s_check_triples: int = 20,
    with_gauge_residual: bool = True,
    fd_step: float = 1e-4,
) -> EndToEndReport:
    """Full synthetic pipeline: build B from (A, u), verify S-equality, invert.

    The gauge u must be trivial on the observation cylinder (the bump-gauge
    contract); then the transform of B equals that of A on every triple, and
    the reconstruction at each grid vertex must return u evaluated there.
    """
    from .transport import gauge_transform_connection

    B = gauge_transform_connection(A, u)
    s_eq_max = 0.0
    s_unit_max = 0.0
    triple_count = 0
    reports = []
    u_errors = []
    per_vertex = max(1, -(-s_check_triples // max(1, len(y_grid))))
    for k, y in enumerate(y_grid):
        triples = sample_triples(U, y, per_vertex, seed + 17 * k)
        for tr in triples:
            da = broken_transform(A, tr, steps)
            db = broken_transform(B, tr, steps)
            s_eq_max = max(s_eq_max, frobenius(da.S - db.S))
            s_unit_max = max(s_unit_max, da.unitarity_defect, db.unitarity_defect)
            triple_count += 1
        xs = _base_points_for(U, y, n_base, seed + 31 * k)
        if not xs:
            continue
        rep = reconstruct_gauge_at(A, B, y, xs, steps)
        if with_gauge_residual:
            rep.gauge_residual = gauge_residual_at(
                A, B, U, y, steps, n_base, seed + 31 * k, fd_step, u_center=rep.u_rec
            )
        u_errors.append(frobenius(rep.u_rec - u(y)))
        reports.append(rep)
    return EndToEndReport(reports, u_errors, s_eq_max, s_unit_max, triple_count)
