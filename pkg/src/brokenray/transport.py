"""Hermitian connections, gauge maps, and parallel transport along light rays.

A connection is a 1-form A = A_mu dx^mu whose coefficients are n x n
skew-Hermitian complex matrices; transport of a frame along a lightlike
segment gamma(s) = p + s*(1, theta) solves the matrix ODE

    dW/ds = -<A, gamma'(s)> W,    W(0) = I,

with <A, v> = sum_mu A_mu v^mu the duality pairing against the tangent.  The
solution at s = s_len is the transport matrix from the segment start to its
end; it is unitary because the pairing of a real tangent with skew-Hermitian
coefficients stays skew-Hermitian.

The integrator is classical fixed-step RK4.  Unitarity drift is measured and
reported, never silently repaired: polar projection is opt-in.  Connection
fields built from the serializable term vocabulary (constant / polynomial /
radial Gaussian bump coefficients) evaluate in vectorized batches, which is
what keeps transport sweeps over hundreds of segments fast.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .minkowski import LightlikeSegment, ObservationSet, SpacetimePoint

SKEW_TOL = 1e-12
GAUGE_UNITARY_TOL = 1e-8


class InvalidGaugeError(ValueError):
    """Gauge map failed the unitarity contract at an evaluated point."""


def _as_points_array(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, 4)
    return pts


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def skew_hermitian_defect(m: np.ndarray) -> float:
    return frobenius(m + m.conj().T)


def unitarity_defect(m: np.ndarray) -> float:
    n = m.shape[-1]
    return frobenius(m.conj().T @ m - np.eye(n))


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition (via SVD)."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def random_skew_hermitian(n: int, rng, scale: float = 1.0) -> np.ndarray:
    """Random skew-Hermitian matrix with spectral scale ~ ``scale``."""
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    s = (m - m.conj().T) / 2.0
    norm = np.linalg.norm(s)
    return scale * s / norm if norm > 0 else s


# ---------------------------------------------------------------------------
# Term vocabulary: scalar profile times a fixed skew-Hermitian matrix
# ---------------------------------------------------------------------------


@dataclass
class ConnectionTerm:
    """One summand amplitude(p) * X feeding component mu of the connection.

    kind is one of "constant", "poly", "bump":
      constant: profile = value
      poly:     profile = sum_k coeff_k * prod_mu p_mu^powers[k][mu], degree <= 3
      bump:     profile = amplitude * exp(-|p - center|^2 / (2 width^2))
    The profile is real and smooth, so the term keeps X skew-Hermitian.
    """

    kind: str
    component: int
    matrix: np.ndarray
    params: dict

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.component not in (0, 1, 2, 3):
            raise ValueError(f"component must be 0..3, got {self.component}")
        if skew_hermitian_defect(self.matrix) > SKEW_TOL * max(1.0, frobenius(self.matrix)):
            raise ValueError("term matrix is not skew-Hermitian")
        if self.kind == "poly":
            for powers in self.params["powers"]:
                if sum(powers) > 3:
                    raise ValueError("polynomial terms are limited to degree 3")
        elif self.kind == "bump":
            if self.params["width"] <= 0:
                raise ValueError("bump width must be positive")
        elif self.kind != "constant":
            raise ValueError(f"unknown term kind {self.kind!r}")

    def profile(self, pts: np.ndarray) -> np.ndarray:
        pts = _as_points_array(pts)
        if self.kind == "constant":
            return np.full(pts.shape[0], float(self.params["value"]))
        if self.kind == "poly":
            out = np.zeros(pts.shape[0])
            for powers, coeff in zip(self.params["powers"], self.params["coeffs"]):
                mono = np.ones(pts.shape[0])
                for mu, e in enumerate(powers):
                    if e:
                        mono = mono * pts[:, mu] ** e
                out += coeff * mono
            return out
        center = np.asarray(self.params["center"], dtype=float)
        w = float(self.params["width"])
        d2 = np.sum((pts - center) ** 2, axis=1)
        return float(self.params["amplitude"]) * np.exp(-d2 / (2.0 * w * w))

    def profile_gradient(self, pts: np.ndarray) -> np.ndarray:
        """d profile / d p_mu, shape (N, 4)."""
        pts = _as_points_array(pts)
        if self.kind == "constant":
            return np.zeros((pts.shape[0], 4))
        if self.kind == "poly":
            out = np.zeros((pts.shape[0], 4))
            for powers, coeff in zip(self.params["powers"], self.params["coeffs"]):
                for nu in range(4):
                    if powers[nu] == 0:
                        continue
                    mono = np.full(pts.shape[0], coeff * powers[nu])
                    for mu, e in enumerate(powers):
                        ee = e - 1 if mu == nu else e
                        if ee:
                            mono = mono * pts[:, mu] ** ee
                    out[:, nu] += mono
            return out
        center = np.asarray(self.params["center"], dtype=float)
        w = float(self.params["width"])
        diff = pts - center
        prof = self.profile(pts)
        return -(diff / (w * w)) * prof[:, None]

    def to_json_dict(self) -> dict:
        mat = [[float(v.real), float(v.imag)] for v in self.matrix.reshape(-1)]
        params = dict(self.params)
        params["component"] = self.component
        return {"kind": self.kind, "matrix": mat, "params": params}

    @classmethod
    def from_json_dict(cls, n: int, d: dict) -> "ConnectionTerm":
        flat = np.array([complex(re, im) for re, im in d["matrix"]])
        params = dict(d["params"])
        component = int(params.pop("component"))
        return cls(d["kind"], component, flat.reshape(n, n), params)


class ConnectionField:
    """Smooth map p -> (A_0, ..., A_3) of n x n skew-Hermitian matrices.

    Fields are either built from the serializable term vocabulary (then
    evaluation, derivatives, and batching are analytic and vectorized) or
    wrapped around arbitrary callables, e.g. the result of a gauge
    transformation.
    """

    def __init__(
        self,
        n: int,
        eval_fn: Callable[[np.ndarray], np.ndarray],
        batch_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        deriv_batch_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        terms: Optional[Sequence[ConnectionTerm]] = None,
        tag: str = "",
    ):
        self.n = int(n)
        self._eval = eval_fn
        self._batch = batch_fn
        self._deriv_batch = deriv_batch_fn
        self.terms = list(terms) if terms is not None else None
        self.tag = tag

    @property
    def is_static(self) -> bool:
        """True when the field provably does not depend on the time coordinate.

        Only vocabulary-built fields can be recognized as static (constants and
        polynomials without a time power); wrapped callables report False.
        """
        if self.terms is None:
            return False
        for t in self.terms:
            if t.kind == "bump":
                return False
            if t.kind == "poly" and any(p[0] != 0 for p in t.params["powers"]):
                return False
        return True

    def __call__(self, p) -> np.ndarray:
        """Coefficients (4, n, n) at a point (SpacetimePoint or 4-array)."""
        if isinstance(p, SpacetimePoint):
            p = p.as_array()
        return self._eval(np.asarray(p, dtype=float))

    def batch(self, pts: np.ndarray) -> np.ndarray:
        """Coefficients at N points, shape (N, 4, n, n)."""
        pts = _as_points_array(pts)
        if self._batch is not None:
            return self._batch(pts)
        return np.stack([self._eval(p) for p in pts])

    def derivative_batch(self, pts: np.ndarray, fd_step: float = 1e-5) -> np.ndarray:
        """[nu, mu] -> d_nu A_mu at N points, shape (N, 4, 4, n, n).

        Analytic for vocabulary-built fields, second-order central differences
        otherwise.
        """
        pts = _as_points_array(pts)
        if self._deriv_batch is not None:
            return self._deriv_batch(pts)
        out = np.zeros((pts.shape[0], 4, 4, self.n, self.n), dtype=complex)
        for nu in range(4):
            shift = np.zeros(4)
            shift[nu] = fd_step
            out[:, nu] = (self.batch(pts + shift) - self.batch(pts - shift)) / (2 * fd_step)
        return out

    def derivative(self, p, fd_step: float = 1e-5) -> np.ndarray:
        if isinstance(p, SpacetimePoint):
            p = p.as_array()
        return self.derivative_batch(np.asarray(p, dtype=float).reshape(1, 4), fd_step)[0]

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "ConnectionField":
        return cls.from_terms(n, [], tag="zero")

    @classmethod
    def from_terms(cls, n: int, terms: Sequence[ConnectionTerm], tag: str = "") -> "ConnectionField":
        terms = list(terms)
        for t in terms:
            if t.matrix.shape != (n, n):
                raise ValueError("term matrix shape does not match bundle rank")

        def batch(pts):
            out = np.zeros((pts.shape[0], 4, n, n), dtype=complex)
            for t in terms:
                out[:, t.component] += t.profile(pts)[:, None, None] * t.matrix
            return out

        def deriv_batch(pts):
            out = np.zeros((pts.shape[0], 4, 4, n, n), dtype=complex)
            for t in terms:
                grad = t.profile_gradient(pts)  # (N, 4)
                out[:, :, t.component] += grad[:, :, None, None] * t.matrix
            return out

        return cls(n, lambda p: batch(p.reshape(1, 4))[0], batch, deriv_batch, terms=terms, tag=tag)

    @classmethod
    def constant(cls, matrices: Sequence[np.ndarray], tag: str = "constant") -> "ConnectionField":
        mats = [np.asarray(m, dtype=complex) for m in matrices]
        n = mats[0].shape[0]
        terms = [
            ConnectionTerm("constant", mu, m, {"value": 1.0})
            for mu, m in enumerate(mats)
            if frobenius(m) > 0
        ]
        return cls.from_terms(n, terms, tag=tag)

    @classmethod
    def random_smooth(
        cls, n: int, seed: int, scale: float = 0.5, n_bumps: int = 3
    ) -> "ConnectionField":
        """Reproducible smooth bounded field: constants plus Gaussian bumps."""
        rng = np.random.default_rng(seed)
        terms = []
        for mu in range(4):
            terms.append(
                ConnectionTerm(
                    "constant", mu, random_skew_hermitian(n, rng, 0.3 * scale), {"value": 1.0}
                )
            )
        for _ in range(n_bumps):
            mu = int(rng.integers(0, 4))
            center = np.concatenate((rng.uniform(-0.2, 1.2, 1), rng.uniform(-1.0, 1.0, 3)))
            terms.append(
                ConnectionTerm(
                    "bump",
                    mu,
                    random_skew_hermitian(n, rng, scale),
                    {"center": list(center), "width": float(rng.uniform(0.3, 0.8)), "amplitude": 1.0},
                )
            )
        return cls.from_terms(n, terms, tag=f"random(seed={seed})")

    # -- serialization (vocabulary-built fields only) ------------------------

    def to_json_dict(self) -> dict:
        if self.terms is None:
            raise ValueError("only vocabulary-built connection fields serialize")
        return {"n": self.n, "terms": [t.to_json_dict() for t in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "ConnectionField":
        n = int(d["n"])
        return cls.from_terms(n, [ConnectionTerm.from_json_dict(n, t) for t in d["terms"]])

    @classmethod
    def from_json(cls, s: str) -> "ConnectionField":
        return cls.from_json_dict(json.loads(s))


def pairing(A: ConnectionField, p, v) -> np.ndarray:
    """Duality pairing <A, v> = sum_mu A_mu(p) v^mu; skew-Hermitian for real v."""
    coeffs = A(p)
    v = np.asarray(v, dtype=float).reshape(4)
    return np.einsum("m,mij->ij", v, coeffs)


def pairing_batch(A: ConnectionField, pts: np.ndarray, v) -> np.ndarray:
    """<A, v> at N points for a common tangent v, shape (N, n, n)."""
    coeffs = A.batch(pts)
    v = np.asarray(v, dtype=float).reshape(4)
    return np.einsum("m,nmij->nij", v, coeffs)


# ---------------------------------------------------------------------------
# Gauge maps
# ---------------------------------------------------------------------------


class GaugeMap:
    """Smooth U(n)-valued map with optional analytic differential d_mu u."""

    def __init__(
        self,
        n: int,
        eval_fn: Callable[[np.ndarray], np.ndarray],
        diff_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        batch_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        diff_batch_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        tag: str = "",
    ):
        self.n = int(n)
        self._eval = eval_fn
        self._diff = diff_fn
        self._batch = batch_fn
        self._diff_batch = diff_batch_fn
        self.tag = tag

    @property
    def has_analytic_differential(self) -> bool:
        return self._diff is not None or self._diff_batch is not None

    def __call__(self, p) -> np.ndarray:
        if isinstance(p, SpacetimePoint):
            p = p.as_array()
        return self._eval(np.asarray(p, dtype=float))

    def batch(self, pts: np.ndarray) -> np.ndarray:
        pts = _as_points_array(pts)
        if self._batch is not None:
            return self._batch(pts)
        return np.stack([self._eval(p) for p in pts])

    def differential_batch(self, pts: np.ndarray, fd_step: float = 1e-4) -> np.ndarray:
        """d_mu u at N points, shape (N, 4, n, n); central differences fallback."""
        pts = _as_points_array(pts)
        if self._diff_batch is not None:
            return self._diff_batch(pts)
        if self._diff is not None:
            return np.stack([self._diff(p) for p in pts])
        if fd_step <= 0:
            raise ValueError("fd_step must be positive for a gauge without analytic differential")
        out = np.zeros((pts.shape[0], 4, self.n, self.n), dtype=complex)
        for mu in range(4):
            shift = np.zeros(4)
            shift[mu] = fd_step
            out[:, mu] = (self.batch(pts + shift) - self.batch(pts - shift)) / (2 * fd_step)
        return out

    def differential(self, p, fd_step: float = 1e-4) -> np.ndarray:
        if isinstance(p, SpacetimePoint):
            p = p.as_array()
        return self.differential_batch(np.asarray(p, dtype=float).reshape(1, 4), fd_step)[0]

    @classmethod
    def identity(cls, n: int) -> "GaugeMap":
        eye = np.eye(n, dtype=complex)
        zero = np.zeros((4, n, n), dtype=complex)
        return cls(
            n,
            lambda p: eye.copy(),
            lambda p: zero.copy(),
            lambda pts: np.broadcast_to(eye, (pts.shape[0], n, n)).copy(),
            lambda pts: np.broadcast_to(zero, (pts.shape[0], 4, n, n)).copy(),
            tag="identity",
        )


def make_bump_gauge(
    n: int,
    X: np.ndarray,
    center: SpacetimePoint,
    radius: float,
    U: ObservationSet,
) -> GaugeMap:
    """Gauge u(p) = exp(chi(p) X) supported in a 4-ball disjoint from the cylinder.

    chi is the standard compactly supported bump, equal to 1 at the center and
    identically 0 outside the ball, so u = id on the observation set; the
    differential d_mu u = (d_mu chi) X u is analytic because the exponent
    direction X is fixed.  Raises when the ball touches the closed cylinder.
    """
    X = np.asarray(X, dtype=complex)
    if X.shape != (n, n):
        raise ValueError("generator shape does not match bundle rank")
    if skew_hermitian_defect(X) > SKEW_TOL * max(1.0, frobenius(X)):
        raise ValueError("bump gauge generator must be skew-Hermitian")
    c = center.as_array()
    # distance from the 4-ball center to the closed cylinder [0,1] x B(eps)
    dt_gap = max(0.0, -c[0], c[0] - 1.0)
    dr_gap = max(0.0, float(np.linalg.norm(c[1:])) - U.epsilon)
    if math.hypot(dt_gap, dr_gap) <= radius:
        raise ValueError("bump gauge support overlaps the observation cylinder")

    # exp(chi X) via the fixed eigendecomposition of the Hermitian matrix iX
    w, V = np.linalg.eigh(1j * X)
    Vh = V.conj().T

    def chi_and_grad(pts):
        diff = pts - c
        rho2 = np.sum(diff * diff, axis=1) / radius**2
        inside = rho2 < 1.0
        chi = np.zeros(pts.shape[0])
        grad = np.zeros((pts.shape[0], 4))
        r2 = np.minimum(rho2[inside], 1.0 - 1e-15)
        chi[inside] = np.exp(1.0 - 1.0 / (1.0 - r2))
        # d chi / d rho2 = -chi / (1 - rho2)^2, d rho2 / d p = 2 (p - c) / radius^2
        dchi = -chi[inside] / (1.0 - r2) ** 2
        grad[inside] = dchi[:, None] * 2.0 * diff[inside] / radius**2
        return chi, grad

    def batch(pts):
        chi, _ = chi_and_grad(pts)
        phases = np.exp(-1j * np.outer(chi, w))  # (N, n)
        return np.einsum("ik,nk,kj->nij", V, phases, Vh)

    def diff_batch(pts):
        chi, grad = chi_and_grad(pts)
        u = np.einsum("ik,nk,kj->nij", V, np.exp(-1j * np.outer(chi, w)), Vh)
        Xu = np.einsum("ij,njk->nik", X, u)
        return grad[:, :, None, None] * Xu[:, None, :, :]

    gauge = GaugeMap(
        n,
        lambda p: batch(p.reshape(1, 4))[0],
        lambda p: diff_batch(p.reshape(1, 4))[0],
        batch,
        diff_batch,
        tag="bump",
    )
    gauge.bump_description = {
        "kind": "bump",
        "matrix": [[float(v.real), float(v.imag)] for v in X.reshape(-1)],
        "params": {"center": [float(v) for v in c], "radius": float(radius)},
    }
    return gauge


def gauge_to_json_dict(u: GaugeMap) -> dict:
    """Serialize a gauge built from bump terms: {n, terms: [...]}."""
    if u.tag == "identity":
        return {"n": u.n, "terms": []}
    terms = getattr(u, "product_terms", None)
    if terms is None:
        desc = getattr(u, "bump_description", None)
        if desc is None:
            raise ValueError("only identity and bump-built gauge maps serialize")
        terms = [desc]
    return {"n": u.n, "terms": terms}


def gauge_from_json_dict(d: dict, U: ObservationSet) -> GaugeMap:
    """Gauge from {n, terms}: the ordered product of bump gauges.

    The product of maps with analytic differentials has the analytic
    differential d(u2 u1) = (du2) u1 + u2 (du1); an empty term list is the
    identity.
    """
    n = int(d["n"])
    terms = d.get("terms", [])
    if not terms:
        return GaugeMap.identity(n)
    factors = []
    for t in terms:
        if t.get("kind") != "bump":
            raise ValueError(f"unknown gauge term kind {t.get('kind')!r}")
        flat = np.array([complex(re, im) for re, im in t["matrix"]])
        p = t["params"]
        factors.append(
            make_bump_gauge(n, flat.reshape(n, n), SpacetimePoint.from_array(p["center"]), p["radius"], U)
        )
    if len(factors) == 1:
        return factors[0]

    def batch(pts):
        out = factors[0].batch(pts)
        for f in factors[1:]:
            out = np.einsum("nij,njk->nik", f.batch(pts), out)
        return out

    def diff_batch(pts):
        us = [f.batch(pts) for f in factors]
        dus = [f.differential_batch(pts) for f in factors]
        acc_u, acc_du = us[0], dus[0]
        for u_k, du_k in zip(us[1:], dus[1:]):
            acc_du = np.einsum("nmij,njk->nmik", du_k, acc_u) + np.einsum(
                "nij,nmjk->nmik", u_k, acc_du
            )
            acc_u = np.einsum("nij,njk->nik", u_k, acc_u)
        return acc_du

    gauge = GaugeMap(
        n,
        lambda p: batch(p.reshape(1, 4))[0],
        lambda p: diff_batch(p.reshape(1, 4))[0],
        batch,
        diff_batch,
        tag="bump-product",
    )
    gauge.product_terms = list(terms)
    return gauge


# ---------------------------------------------------------------------------
# Transport
# ---------------------------------------------------------------------------


@dataclass
class TransportResult:
    """Transport matrix with its measured unitarity drift.

    The defect is ||W^dagger W - I||_F of the raw integrator output; when
    projection was requested the matrix is the polar unitary factor but the
    reported defect is still the pre-projection one.
    """

    matrix: np.ndarray
    unitarity_defect: float
    steps_used: int


def default_steps(s_len: float) -> int:
    return max(100, int(math.ceil(s_len / 1e-3)))


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """Product mats[-1] @ ... @ mats[0] by pairwise reduction."""
    while mats.shape[0] > 1:
        k = mats.shape[0]
        paired = np.matmul(mats[1 : k - k % 2 : 2], mats[0 : k - k % 2 : 2])
        if k % 2:
            mats = np.concatenate([paired, mats[-1:]])
        else:
            mats = paired
    return mats[0]


def _propagator(A: ConnectionField, start4: np.ndarray, tangent: np.ndarray,
                s0: float, s1: float, steps: int) -> np.ndarray:
    """RK4 fundamental solution of W' = -<A, tangent> W from s0 to s1.

    The coefficient matrix is evaluated in one batched call on the refined
    grid (step endpoints and midpoints); the per-step RK4 propagators are then
    assembled with batched matrix products and multiplied in order.
    """
    n = A.n
    if steps < 1:
        raise ValueError("steps must be at least 1")
    span = s1 - s0
    if span == 0.0:
        return np.eye(n, dtype=complex)
    h = span / steps
    s_nodes = s0 + (span / (2 * steps)) * np.arange(2 * steps + 1)
    pts = start4[None, :] + s_nodes[:, None] * tangent[None, :]
    G = -pairing_batch(A, pts, tangent)  # (2*steps+1, n, n)
    G0 = G[0:-1:2]
    Gm = G[1::2]
    G1 = G[2::2]
    eye = np.eye(n, dtype=complex)
    k1 = G0
    k2 = np.matmul(Gm, eye + (h / 2) * k1)
    k3 = np.matmul(Gm, eye + (h / 2) * k2)
    k4 = np.matmul(G1, eye + h * k3)
    R = eye + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return _ordered_product(R)


def parallel_transport(
    A: ConnectionField,
    seg: LightlikeSegment,
    steps: Optional[int] = None,
    project: bool = False,
) -> TransportResult:
    """Transport matrix from the segment start to its end.

    Integrates dW/ds = -<A, (1,theta)> W over [0, s_len] with uniform-step
    RK4; ``steps`` defaults to max(100, ceil(s_len/1e-3)).
    """
    if steps is None:
        steps = default_steps(seg.s_len)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    W = _propagator(A, seg.start.as_array(), seg.tangent(), 0.0, seg.s_len, steps)
    defect = unitarity_defect(W)
    if project:
        W = polar_unitary(W)
    return TransportResult(W, defect, steps)


def fundamental_solution(
    A: ConnectionField,
    seg: LightlikeSegment,
    t_param: float,
    s_param: float,
    steps: Optional[int] = None,
) -> np.ndarray:
    """U^A(t, s) along the segment's affine line, with U^A(s, s) = I.

    Solves d_t U(t,s) = -<A, gamma'(t)> U(t,s) from s to t (backwards when
    t < s); parameters may lie outside [0, s_len] on the extended line.
    """
    if steps is None:
        steps = default_steps(max(abs(t_param - s_param), 1e-3))
    if steps < 1:
        raise ValueError("steps must be at least 1")
    return _propagator(A, seg.start.as_array(), seg.tangent(), s_param, t_param, steps)


def gauge_transform_connection(
    A: ConnectionField, u: GaugeMap, fd_step: float = 1e-4
) -> ConnectionField:
    """Transformed connection B_mu = u^{-1} d_mu u + u^{-1} A_mu u.

    Uses the analytic differential of u when available, second-order central
    differences with ``fd_step`` otherwise; u^{-1} is taken as the conjugate
    transpose after checking the unitarity defect.
    """
    if not u.has_analytic_differential and fd_step <= 0:
        raise ValueError("fd_step must be positive for a gauge without analytic differential")
    if A.n != u.n:
        raise ValueError("connection and gauge ranks differ")
    n = A.n
    eye = np.eye(n)

    def batch(pts):
        ub = u.batch(pts)
        defects = np.linalg.norm(
            np.einsum("nij,njk->nik", ub.conj().transpose(0, 2, 1), ub) - eye, axis=(1, 2)
        )
        worst = float(defects.max()) if defects.size else 0.0
        if worst > GAUGE_UNITARY_TOL:
            raise InvalidGaugeError(f"gauge map unitarity defect {worst:.3e} exceeds tolerance")
        uinv = ub.conj().transpose(0, 2, 1)
        du = u.differential_batch(pts, fd_step)  # (N, 4, n, n)
        Ab = A.batch(pts)  # (N, 4, n, n)
        Au = np.einsum("nmij,njk->nmik", Ab, ub)
        return np.einsum("nij,nmjk->nmik", uinv, du + Au)

    return ConnectionField(
        n,
        lambda p: batch(p.reshape(1, 4))[0],
        batch,
        tag=f"gauge({A.tag})",
    )


def transport_gauge_covariance_check(
    A: ConnectionField,
    u: GaugeMap,
    seg: LightlikeSegment,
    steps: Optional[int] = None,
    fd_step: float = 1e-4,
) -> float:
    """Residual || P^B - u(end)^{-1} P^A u(start) ||_F with B the transform of A."""
    B = gauge_transform_connection(A, u, fd_step)
    PA = parallel_transport(A, seg, steps).matrix
    PB = parallel_transport(B, seg, steps).matrix
    u0 = u(seg.start)
    u1 = u(seg.end)
    return frobenius(PB - u1.conj().T @ PA @ u0)
