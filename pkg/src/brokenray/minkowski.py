"""Causal geometry of 1+3 Minkowski space and broken-ray triple sampling.

Conventions used throughout the package:

* metric signature (-,+,+,+), light speed 1;
* events are written (t, x) with x in R^3;
* lightlike geodesics are affinely parametrized as gamma(s) = p + s*(1, theta)
  with theta a unit 3-vector, so the affine span of a segment equals its time
  span;
* the observation set is the open cylinder (0,1) x B(eps) around the observer
  worldline t -> (t, 0).

A point y outside the cylinder belongs to the reachable diamond exactly when
some past light ray from y meets the cylinder and some future light ray from y
meets it again; triples (x, y, z) realizing both legs are the inputs of the
broken-ray transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class CausalClass(Enum):
    STRICTLY_BEFORE = "strictly_before"
    STRICTLY_AFTER = "strictly_after"
    SPACELIKE_SEPARATED = "spacelike_separated"
    COINCIDENT = "coincident"


@dataclass
class SpacetimePoint:
    """Event (t, x) in R^{1+3}; all components must be finite."""

    t: float
    x: np.ndarray

    def __post_init__(self):
        self.t = float(self.t)
        self.x = np.asarray(self.x, dtype=float).reshape(3)
        if not (np.isfinite(self.t) and np.all(np.isfinite(self.x))):
            raise ValueError("spacetime point has non-finite components")

    @classmethod
    def of(cls, t, x1, x2=0.0, x3=0.0) -> "SpacetimePoint":
        return cls(t, np.array([x1, x2, x3], dtype=float))

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.t], self.x))

    @classmethod
    def from_array(cls, a) -> "SpacetimePoint":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(a[0], a[1:])

    def __repr__(self):
        return f"SpacetimePoint(t={self.t:.6g}, x=({self.x[0]:.6g}, {self.x[1]:.6g}, {self.x[2]:.6g}))"


@dataclass
class LightlikeSegment:
    """Future-pointing lightlike segment: end = start + s_len * (1, theta)."""

    start: SpacetimePoint
    end: SpacetimePoint
    direction: np.ndarray
    s_len: float

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=float).reshape(3)
        self.s_len = float(self.s_len)
        if self.s_len <= 0.0:
            raise ValueError(f"segment length must be positive, got {self.s_len}")
        if abs(np.linalg.norm(self.direction) - 1.0) > 1e-12:
            raise ValueError("segment direction is not a unit vector")
        residual = np.linalg.norm(
            self.end.as_array() - self.start.as_array() - self.s_len * self.tangent()
        )
        if residual > 1e-6 * max(1.0, self.s_len):
            raise ValueError(f"segment endpoints inconsistent with direction (residual {residual:.3e})")

    def tangent(self) -> np.ndarray:
        """Future-pointing tangent (1, theta) as a 4-vector."""
        return np.concatenate(([1.0], self.direction))

    def point_at(self, s: float) -> SpacetimePoint:
        """gamma(s) = start + s*(1, theta); s may lie outside [0, s_len]."""
        return SpacetimePoint(self.start.t + s, self.start.x + s * self.direction)


@dataclass
class ObservationSet:
    """Open cylinder (0,1) x B(epsilon)."""

    epsilon: float

    def __post_init__(self):
        self.epsilon = float(self.epsilon)
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


@dataclass
class TripleSample:
    """Triple x < y < z with lightlike legs meeting at the vertex y."""

    x: SpacetimePoint
    y: SpacetimePoint
    z: SpacetimePoint
    leg_in: LightlikeSegment
    leg_out: LightlikeSegment

    def to_json_dict(self) -> dict:
        return {
            "x": list(self.x.as_array()),
            "y": list(self.y.as_array()),
            "z": list(self.z.as_array()),
        }

    def csv_row(self) -> list:
        """Flat row (x_t, x_1..x_3, y_t, ..., z_3); field order fixed."""
        return list(self.x.as_array()) + list(self.y.as_array()) + list(self.z.as_array())

    CSV_HEADER = [
        "x_t", "x_1", "x_2", "x_3",
        "y_t", "y_1", "y_2", "y_3",
        "z_t", "z_1", "z_2", "z_3",
    ]


def causal_classify(x: SpacetimePoint, y: SpacetimePoint, tol: float = DEFAULT_TOL) -> CausalClass:
    """Causal relation of the ordered pair (x, y).

    x precedes y iff y.t - x.t >= |y.x - x.x|; the lightlike boundary counts
    as causal.  Equality is tested with slack tol * max(1, |dt|).
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    dt = y.t - x.t
    dr = float(np.linalg.norm(y.x - x.x))
    slack = tol * max(1.0, abs(dt))
    if max(abs(dt), dr) <= slack:
        return CausalClass.COINCIDENT
    if dt > 0 and dt >= dr - slack:
        return CausalClass.STRICTLY_BEFORE
    if dt < 0 and -dt >= dr - slack:
        return CausalClass.STRICTLY_AFTER
    return CausalClass.SPACELIKE_SEPARATED


def lightlike_connects(
    x: SpacetimePoint, y: SpacetimePoint, tol: float = DEFAULT_TOL
) -> Optional[LightlikeSegment]:
    """Lightlike segment joining x and y, future-oriented, or None.

    The pair connects iff |dt| = |dx| > 0 within slack tol * max(1, |dt|).
    The returned segment starts at the earlier event.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    dt = y.t - x.t
    dx = y.x - x.x
    dr = float(np.linalg.norm(dx))
    slack = tol * max(1.0, abs(dt))
    if abs(abs(dt) - dr) > slack or dr <= slack or abs(dt) <= slack:
        return None
    if dt > 0:
        return LightlikeSegment(x, y, dx / dr, dt)
    return LightlikeSegment(y, x, -dx / dr, -dt)


def in_observation_set(p: SpacetimePoint, U: ObservationSet) -> bool:
    """Strict membership in the open cylinder (0,1) x B(eps)."""
    return 0.0 < p.t < 1.0 and float(np.linalg.norm(p.x)) < U.epsilon


def is_in_S_plus(
    x: SpacetimePoint,
    y: SpacetimePoint,
    z: SpacetimePoint,
    U: ObservationSet,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Whether (x, y, z) is a valid broken-ray triple for the cylinder U.

    Requires lightlike legs x->y and y->z with x < y < z, endpoints x, z in
    the cylinder, and the vertex y outside it.
    """
    seg_in = lightlike_connects(x, y, tol)
    if seg_in is None or y.t <= x.t:
        return False
    seg_out = lightlike_connects(y, z, tol)
    if seg_out is None or z.t <= y.t:
        return False
    return (
        in_observation_set(x, U)
        and in_observation_set(z, U)
        and not in_observation_set(y, U)
    )


def make_triple(
    x: SpacetimePoint, y: SpacetimePoint, z: SpacetimePoint, tol: float = DEFAULT_TOL
) -> TripleSample:
    """Assemble a TripleSample, validating the two lightlike legs."""
    seg_in = lightlike_connects(x, y, tol)
    seg_out = lightlike_connects(y, z, tol)
    if seg_in is None or seg_out is None or not (x.t < y.t < z.t):
        raise ValueError("points do not form past-vertex-future lightlike legs")
    return TripleSample(x, y, z, seg_in, seg_out)


def _ray_cylinder_window(
    y: SpacetimePoint, U: ObservationSet, theta: np.ndarray, past: bool
) -> Optional[tuple]:
    """Affine parameter interval (lo, hi) along which the leg endpoint lies in U.

    For past=True the endpoint is y - s*(1, theta); for past=False it is
    y + s*(1, theta).  Returns None when the intersection is empty.
    """
    if past:
        # endpoint spatial position y.x - s*theta, endpoint time y.t - s
        p = float(np.dot(y.x, theta))
        t_lo, t_hi = max(0.0, y.t - 1.0), y.t
    else:
        p = -float(np.dot(y.x, theta))
        t_lo, t_hi = max(0.0, -y.t), 1.0 - y.t
    disc = p * p - float(np.dot(y.x, y.x)) + U.epsilon**2
    if disc <= 0.0:
        return None
    root = np.sqrt(disc)
    lo = max(t_lo, p - root)
    hi = min(t_hi, p + root)
    if hi <= lo:
        return None
    return lo, hi


def sample_triples(
    U: ObservationSet,
    y: SpacetimePoint,
    count: int,
    seed: int,
    max_batches: int = 400,
) -> list:
    """Draw up to ``count`` broken-ray triples with vertex y, reproducibly.

    Leg directions are drawn uniformly on the sphere and rejected unless the
    corresponding light ray meets the cylinder within the (0,1) time window;
    the affine length is then drawn uniformly in the admissible interval.
    Returns fewer than ``count`` (possibly none) when the past or future cone
    of y barely meets the cylinder.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0 or in_observation_set(y, U):
        return []
    rng = np.random.default_rng(seed)
    margin = 1e-9

    def draw_legs(past: bool, needed: int) -> list:
        hits = []
        for _ in range(max_batches):
            if len(hits) >= needed:
                break
            raw = rng.normal(size=(128, 3))
            raw /= np.linalg.norm(raw, axis=1, keepdims=True)
            for theta in raw:
                window = _ray_cylinder_window(y, U, theta, past)
                if window is None:
                    continue
                lo, hi = window
                span = hi - lo
                s = lo + span * (margin + (1 - 2 * margin) * rng.random())
                hits.append((theta, s))
                if len(hits) >= needed:
                    break
        return hits

    past_hits = draw_legs(True, count)
    future_hits = draw_legs(False, count)
    triples = []
    for (th_in, s_in), (th_out, s_out) in zip(past_hits, future_hits):
        x = SpacetimePoint(y.t - s_in, y.x - s_in * th_in)
        z = SpacetimePoint(y.t + s_out, y.x + s_out * th_out)
        if is_in_S_plus(x, y, z, U):
            triples.append(make_triple(x, y, z))
    return triples


def _diamond_windows(y: SpacetimePoint, U: ObservationSet):
    """Affine-length windows for the best-aimed past and future legs.

    The spatial distance from the ray endpoint to the axis is minimized by
    aiming along the spatial position of y, which gives | |y.x| - s |; the
    leg reaches the cylinder iff (|y.x|-eps, |y.x|+eps) meets the admissible
    time window.
    """
    r = float(np.linalg.norm(y.x))
    past = (max(0.0, y.t - 1.0, r - U.epsilon), min(y.t, r + U.epsilon))
    future = (max(0.0, -y.t, r - U.epsilon), min(1.0 - y.t, r + U.epsilon))
    return past, future


def in_diamond(y: SpacetimePoint, U: ObservationSet) -> bool:
    """Whether some broken-ray triple passes through y (direct geometric test).

    Uses the closed-form leg windows rather than sampling: y is reachable iff
    both the past and the future window are non-degenerate and y lies outside
    the cylinder.
    """
    if in_observation_set(y, U):
        return False
    past, future = _diamond_windows(y, U)
    return past[1] > past[0] and future[1] > future[0]


def diamond_grid(
    U: ObservationSet,
    count: int,
    seed: int,
    axis_clearance: float = 1e-2,
    window_margin: float = 0.02,
    focus: Optional[tuple] = None,
) -> list:
    """Reproducible list of points inside the diamond, away from the axis.

    Points within ``axis_clearance`` of the observer axis are excluded (the
    reconstruction degenerates there as base points collapse onto the vertex),
    and both leg windows must have width at least ``window_margin`` so that
    triple sampling at the returned points is well-conditioned.  With
    ``focus = (center4, radius)`` the candidates are drawn from that
    spacetime ball instead of the default bounding box.
    """
    rng = np.random.default_rng(seed)
    pts = []
    attempts = 0
    while len(pts) < count and attempts < 200000:
        attempts += 1
        if focus is not None:
            c, rad = np.asarray(focus[0], dtype=float), float(focus[1])
            d = rng.normal(size=4)
            d *= rad * rng.random() ** 0.25 / np.linalg.norm(d)
            t, x = c[0] + d[0], c[1:] + d[1:]
        else:
            t = rng.uniform(-0.4, 1.4)
            x = rng.uniform(-1.2, 1.2, size=3)
        y = SpacetimePoint(t, x)
        if float(np.linalg.norm(y.x)) < max(axis_clearance, U.epsilon):
            continue
        if not in_diamond(y, U):
            continue
        past, future = _diamond_windows(y, U)
        if past[1] - past[0] < window_margin or future[1] - future[0] < window_margin:
            continue
        pts.append(y)
    return pts
