"""Configuration-driven experiment runner.

Every experiment is described by a JSON file

    {"kind": "<experiment>", "seed": 0, "params": {...}, "tolerances": {...}}

with ``kind`` one of transport, broken-ray, reconstruct, span-lemma,
cone-geometry, symplectic, wave-converge, threefold.  Unknown keys anywhere
are rejected.  ``brokenray run config.json [--out DIR] [--seed N] [--quiet]``
executes the experiment and writes ``<kind>_<hash>.csv`` (the result table,
floats with 17 significant digits) and ``<kind>_<hash>.json`` (summary,
metadata, and the pass/fail gate); cone-geometry additionally writes
``<kind>_<hash>.mesh.json`` with the cone-surface triangulations consumed by
the figure scripts.  Exit codes: 0 success, 2 tolerance gate failed, 1
runtime error, 64 configuration/usage error.  With a fixed config and seed
the CSV output is byte-identical between runs (wall time lives only in the
JSON metadata).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .broken_ray import broken_transform, end_to_end_synthetic
from .interaction import (
    ConeFamily,
    PhaseSpacePoint,
    cone_residual,
    filament_point,
    filament_time,
    flowout_map,
    flowout_min_singular_value,
    lightlike_triplet,
    normalize_pair,
    span_determinant,
    symplectic_normal_form,
    symplectic_residual,
)
from .minkowski import ObservationSet, SpacetimePoint, diamond_grid, sample_triples
from .transport import (
    ConnectionField,
    fundamental_solution,
    make_bump_gauge,
    parallel_transport,
    random_skew_hermitian,
)
from .wave import (
    ManufacturedSolution,
    default_threefold_setup,
    direct_threefold_solve,
    verify_threefold,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TOLERANCE = 2
EXIT_USAGE = 64

KINDS = (
    "transport",
    "broken-ray",
    "reconstruct",
    "span-lemma",
    "cone-geometry",
    "symplectic",
    "wave-converge",
    "threefold",
)


@dataclass
class Field:
    types: tuple
    default: Any
    check: Optional[Callable[[Any], Optional[str]]] = None


def _positive(v):
    return None if v > 0 else "must be positive"


def _non_negative(v):
    return None if v >= 0 else "must be non-negative"


def _vec4(v):
    if not (isinstance(v, list) and len(v) == 4 and all(isinstance(x, (int, float)) for x in v)):
        return "must be a list of four numbers"
    return None


def _connection_spec(v):
    if isinstance(v, str):
        return None if v in ("zero", "random") else 'must be "zero", "random", or a terms object'
    if isinstance(v, dict):
        if "n" not in v or "terms" not in v:
            return 'object form must have keys "n" and "terms"'
        return None
    return 'must be "zero", "random", or a terms object'


def _num_list(v):
    if not (isinstance(v, list) and v and all(isinstance(x, (int, float)) for x in v)):
        return "must be a non-empty list of numbers"
    return None


def _int_list(v):
    if not (isinstance(v, list) and v and all(isinstance(x, int) for x in v)):
        return "must be a non-empty list of integers"
    return None


NUM = (int, float)

SCHEMAS = {
    "transport": {
        "params": {
            "n": Field((int,), 2, _positive),
            "connection": Field((str, dict), "random", _connection_spec),
            "cases": Field((int,), 20, _positive),
            "s_len_max": Field(NUM, 2.0, _positive),
            "step_size": Field(NUM, 1e-3, _positive),
        },
        "tolerances": {"unitarity_defect": Field(NUM, 1e-9, _positive)},
    },
    "broken-ray": {
        "params": {
            "n": Field((int,), 2, _positive),
            "connection": Field((str, dict), "random", _connection_spec),
            "epsilon": Field(NUM, 0.15, _positive),
            "vertex": Field((list,), [0.4, 0.3, 0.0, 0.0], _vec4),
            "count": Field((int,), 20, _positive),
        },
        "tolerances": {
            "unitarity_defect": Field(NUM, 1e-9, _positive),
            "inverse_residual": Field(NUM, 1e-7, _positive),
        },
    },
    "reconstruct": {
        "params": {
            "n": Field((int,), 2, _positive),
            "connection": Field((str, dict), "random", _connection_spec),
            "epsilon": Field(NUM, 0.15, _positive),
            "grid_points": Field((int,), 10, _positive),
            "n_base": Field((int,), 6, _positive),
            "gauge_scale": Field(NUM, 1.0, _positive),
            "gauge_center": Field((list,), [0.45, 0.42, 0.0, 0.0], _vec4),
            "gauge_radius": Field(NUM, 0.2, _positive),
            "fd_step": Field(NUM, 1e-4, _positive),
            "s_check_triples": Field((int,), 40, _non_negative),
            "with_gauge_residual": Field((bool,), True),
        },
        "tolerances": {
            "x_independence": Field(NUM, 1e-7, _positive),
            "u_error": Field(NUM, 1e-6, _positive),
            "gauge_residual": Field(NUM, 1e-4, _positive),
            "s_equality": Field(NUM, 1e-7, _positive),
        },
    },
    "span-lemma": {
        "params": {
            "xi1": Field((list,), [1.0, 1.0, 0.0, 0.0], _vec4),
            "eta": Field((list,), [1.0, -0.8, 0.6, 0.0], _vec4),
            "r_sweep": Field((list,), [0.1, 0.05, 0.025], _num_list),
        },
        "tolerances": {
            "residual": Field(NUM, 1e-12, _positive),
            "det_match": Field(NUM, 1e-12, _positive),
            "min_fitted_order": Field(NUM, 0.9, _positive),
        },
    },
    "cone-geometry": {
        "params": {
            "s_in": Field(NUM, 2.0, _positive),
            "r": Field(NUM, 0.8, _positive),
            "z_count": Field((int,), 41, _positive),
            "t_range": Field((list,), [0.1, 2.0], _num_list),
            "z_frac": Field(NUM, 0.2, _positive),
            "collision_pairs": Field((int,), 100000, _positive),
            "render_times": Field((list,), [1.2, 2.4], _num_list),
        },
        "tolerances": {
            # the exact infimum of the minimum singular value over the swept
            # box is 0.1*sqrt(25/26) ~ 0.09806 at (t, |z|) = (0.1, 0.2*s_in)
            "cone_residual": Field(NUM, 1e-12, _positive),
            "min_singular": Field(NUM, 0.098, _positive),
        },
    },
    "symplectic": {
        "params": {"cases": Field((int,), 100, _positive)},
        "tolerances": {
            "residual": Field(NUM, 1e-8, _positive),
            "mapping_identity": Field(NUM, 1e-12, _positive),
        },
    },
    "wave-converge": {
        "params": {
            "nodes": Field((list,), [101, 201, 401], _int_list),
            "t_max": Field(NUM, 0.4, _positive),
            "kappa": Field(NUM, -1.0),
        },
        "tolerances": {
            "order_min": Field(NUM, 1.8, _positive),
            "order_max": Field(NUM, 2.2, _positive),
        },
    },
    "threefold": {
        "params": {
            "nodes": Field((int,), 401, _positive),
            "kappa": Field(NUM, -1.0),
            "amp": Field(NUM, 1000.0, _positive),
            "eps_sweep": Field((list,), [4e-2, 2e-2, 1e-2], _num_list),
        },
        "tolerances": {
            "rel_err_final": Field(NUM, 0.05, _positive),
            "kappa_linearity": Field(NUM, 1e-10, _positive),
        },
    },
}

TOP_LEVEL_KEYS = {"kind", "seed", "params", "tolerances", "notes"}


def validate_config(cfg) -> list:
    """Schema diagnostics, empty when the configuration is valid."""
    diags = []
    if not isinstance(cfg, dict):
        return ["configuration root must be a JSON object"]
    for key in cfg:
        if key not in TOP_LEVEL_KEYS:
            diags.append(f"{key}: unknown top-level key (allowed: {sorted(TOP_LEVEL_KEYS)})")
    kind = cfg.get("kind")
    if kind is None:
        diags.append("kind: required")
        return diags
    if kind not in KINDS:
        diags.append(f"kind: unknown experiment {kind!r} (allowed: {list(KINDS)})")
        return diags
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        diags.append("seed: must be a non-negative integer")
    schema = SCHEMAS[kind]
    for section in ("params", "tolerances"):
        given = cfg.get(section, {})
        if not isinstance(given, dict):
            diags.append(f"{section}: must be an object")
            continue
        fields = schema[section]
        for key, value in given.items():
            if key not in fields:
                diags.append(f"{section}.{key}: unknown key (allowed: {sorted(fields)})")
                continue
            f = fields[key]
            if not isinstance(value, f.types) or isinstance(value, bool) and bool not in f.types:
                names = "/".join(t.__name__ for t in f.types)
                diags.append(f"{section}.{key}: expected {names}, got {type(value).__name__}")
                continue
            if f.check is not None:
                msg = f.check(value)
                if msg:
                    diags.append(f"{section}.{key}: {msg}")
    return diags


def resolve_config(cfg: dict):
    """(kind, seed, params, tolerances) with defaults filled in."""
    kind = cfg["kind"]
    schema = SCHEMAS[kind]
    params = {k: f.default for k, f in schema["params"].items()}
    params.update(cfg.get("params", {}))
    tols = {k: f.default for k, f in schema["tolerances"].items()}
    tols.update(cfg.get("tolerances", {}))
    return kind, int(cfg.get("seed", 0)), params, tols


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


@dataclass
class ResultTable:
    header: list
    rows: list
    summary: dict
    passed: bool
    extra_files: dict


def _build_connection(spec, n: int, seed: int) -> ConnectionField:
    if spec == "zero":
        return ConnectionField.zero(n)
    if spec == "random":
        return ConnectionField.random_smooth(n, seed=seed, scale=0.6)
    return ConnectionField.from_json_dict(spec)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _run_transport(params, tols, seed) -> ResultTable:
    rng = np.random.default_rng(seed)
    n = params["n"]
    A = _build_connection(params["connection"], n, seed)
    rows = []
    worst = 0.0
    for case in range(params["cases"]):
        s_len = float(rng.uniform(0.1, params["s_len_max"]))
        theta = rng.normal(size=3)
        theta /= np.linalg.norm(theta)
        start = SpacetimePoint(rng.uniform(0, 0.5), rng.uniform(-0.5, 0.5, 3))
        end = SpacetimePoint(start.t + s_len, start.x + s_len * theta)
        from .minkowski import LightlikeSegment

        seg = LightlikeSegment(start, end, theta, s_len)
        steps = max(100, int(np.ceil(s_len / params["step_size"])))
        res = parallel_transport(A, seg, steps)
        refined = parallel_transport(A, seg, 2 * steps)
        delta = float(np.linalg.norm(res.matrix - refined.matrix))
        worst = max(worst, res.unitarity_defect)
        rows.append([case, n, s_len, steps, res.unitarity_defect, delta])
    passed = worst < tols["unitarity_defect"]
    summary = {"max_unitarity_defect": worst, "cases": params["cases"], "passed": passed}
    return ResultTable(
        ["case", "n", "s_len", "steps", "unitarity_defect", "refine_delta"],
        rows, summary, passed, {},
    )


def _run_broken_ray(params, tols, seed) -> ResultTable:
    n = params["n"]
    A = _build_connection(params["connection"], n, seed)
    U = ObservationSet(params["epsilon"])
    y = SpacetimePoint.from_array(params["vertex"])
    triples = sample_triples(U, y, params["count"], seed)
    rows = []
    worst_defect, worst_inverse = 0.0, 0.0
    for tr in triples:
        datum = broken_transform(A, tr)
        rev_in = fundamental_solution(A, tr.leg_in, 0.0, tr.leg_in.s_len)
        rev_out = fundamental_solution(A, tr.leg_out, 0.0, tr.leg_out.s_len)
        inv_res = float(np.linalg.norm(rev_in @ rev_out @ datum.S - np.eye(n)))
        worst_defect = max(worst_defect, datum.unitarity_defect)
        worst_inverse = max(worst_inverse, inv_res)
        rows.append(tr.csv_row() + [datum.unitarity_defect, inv_res])
    passed = (
        len(triples) > 0
        and worst_defect < tols["unitarity_defect"]
        and worst_inverse < tols["inverse_residual"]
    )
    summary = {
        "triples": len(triples),
        "max_unitarity_defect": worst_defect,
        "max_inverse_residual": worst_inverse,
        "passed": passed,
    }
    from .minkowski import TripleSample

    return ResultTable(
        TripleSample.CSV_HEADER + ["unitarity_defect", "inverse_residual"],
        rows, summary, passed, {},
    )


def _run_reconstruct(params, tols, seed) -> ResultTable:
    n = params["n"]
    rng = np.random.default_rng(seed)
    A = _build_connection(params["connection"], n, seed)
    U = ObservationSet(params["epsilon"])
    u = make_bump_gauge(
        n,
        random_skew_hermitian(n, rng, params["gauge_scale"]),
        SpacetimePoint.from_array(params["gauge_center"]),
        params["gauge_radius"],
        U,
    )
    # half the vertices target the gauge bump's support (non-trivial recovery)
    half = params["grid_points"] // 2
    grid = diamond_grid(
        U, half, seed + 4, focus=(params["gauge_center"], 0.85 * params["gauge_radius"])
    )
    grid += diamond_grid(U, params["grid_points"] - half, seed + 1)
    report = end_to_end_synthetic(
        A, u, U, grid,
        seed=seed + 2,
        n_base=params["n_base"],
        s_check_triples=params["s_check_triples"],
        with_gauge_residual=params["with_gauge_residual"],
        fd_step=params["fd_step"],
    )
    summary = report.summary()
    passed = (
        summary["count"] > 0
        and summary["x_independence_defect"]["max"] < tols["x_independence"]
        and summary["u_error"]["max"] < tols["u_error"]
        and summary["s_equality_max"] < tols["s_equality"]
        and (
            not params["with_gauge_residual"]
            or summary["gauge_residual"]["max"] < tols["gauge_residual"]
        )
    )
    summary["passed"] = passed
    return ResultTable(report.CSV_HEADER, report.csv_rows(), summary, passed, {})


def _run_span_lemma(params, tols, seed) -> ResultTable:
    frame = normalize_pair(params["xi1"], params["eta"])
    rows = []
    devs = []
    worst_res = 0.0
    for r in params["r_sweep"]:
        dec = lightlike_triplet(frame, float(r))
        rows.append([r, dec.alpha[0], dec.alpha[1], dec.alpha[2], dec.b, dec.residual])
        r2a = r * r * dec.alpha
        devs.append(max(abs(r2a[0] + 2 * dec.b), abs(r2a[1] - dec.b), abs(r2a[2] - dec.b)))
        worst_res = max(worst_res, dec.residual)
    rs = np.asarray(params["r_sweep"], dtype=float)
    order = float(np.polyfit(np.log(rs), np.log(devs), 1)[0]) if len(rs) >= 2 else float("nan")
    det_gap = max(
        abs(span_determinant(r) - 2 * r * (1 - np.sqrt(1 - r * r))) for r in rs
    )
    passed = (
        worst_res < tols["residual"]
        and det_gap < tols["det_match"]
        and order >= tols["min_fitted_order"]
    )
    summary = {
        "b": 1.0 - frame.sign * float(np.sqrt(1 - frame.r0**2)),
        "r0": frame.r0,
        "sign": frame.sign,
        "max_residual": worst_res,
        "det_gap": det_gap,
        "fitted_order": order,
        "passed": passed,
    }
    return ResultTable(
        ["r", "alpha1", "alpha2", "alpha3", "b", "residual"], rows, summary, passed, {}
    )


def _sphere_triangles(center, radius, n_theta=14, n_phi=28) -> list:
    th = np.linspace(0, np.pi, n_theta)
    ph = np.linspace(0, 2 * np.pi, n_phi)
    tri = []
    for i in range(n_theta - 1):
        for j in range(n_phi - 1):
            quad = []
            for a, b in ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)):
                p = center + radius * np.array(
                    [np.sin(th[a]) * np.cos(ph[b]), np.sin(th[a]) * np.sin(ph[b]), np.cos(th[a])]
                )
                quad.append([float(v) for v in p])
            tri.append([quad[0], quad[1], quad[2]])
            tri.append([quad[0], quad[2], quad[3]])
    return tri


def _front_triangles(s_in, t_render, n_ang=40, n_z=24) -> list:
    z_max = np.sqrt(max((t_render + s_in) ** 2 - s_in**2, 0.0)) * 0.98
    if z_max <= 0:
        return []
    zs = np.linspace(-z_max, z_max, n_z)
    angles = np.linspace(0, 2 * np.pi, n_ang)
    pts = np.zeros((n_z, n_ang, 3))
    for i, z in enumerate(zs):
        t = t_render - filament_time(s_in, z)
        if t <= 0:
            continue
        for j, a in enumerate(angles):
            p, _ = flowout_map(s_in, t, a, z)
            pts[i, j] = p[1:]
    tri = []
    for i in range(n_z - 1):
        for j in range(n_ang - 1):
            q = [pts[i, j], pts[i + 1, j], pts[i + 1, j + 1], pts[i, j + 1]]
            q = [[float(v) for v in p] for p in q]
            tri.append([q[0], q[1], q[2]])
            tri.append([q[0], q[2], q[3]])
    return tri


def _run_cone_geometry(params, tols, seed) -> ResultTable:
    s_in, r = params["s_in"], params["r"]
    fam = ConeFamily(s_in, r)
    rng = np.random.default_rng(seed)
    t_lo, t_hi = params["t_range"]
    z_half = params["z_frac"] * s_in
    rows = []
    worst_cone = 0.0
    min_sigma = np.inf
    t_grid = np.linspace(t_lo, t_hi, 8)
    a_grid = np.linspace(0, 2 * np.pi, 7)
    for z in np.linspace(-s_in, s_in, params["z_count"]):
        p = filament_point(s_in, z)
        res = [cone_residual(fam, j, p) for j in (1, 2, 3)]
        worst_cone = max(worst_cone, *res)
        if abs(z) <= z_half:
            sig = min(
                flowout_min_singular_value(s_in, t, a, z) for t in t_grid for a in a_grid
            )
            min_sigma = min(min_sigma, sig)
        else:
            sig = float("nan")
        rows.append([z, p.t, res[0], res[1], res[2], sig])
    # stochastic injectivity falsification over the validity region
    N = params["collision_pairs"]
    t = rng.uniform(t_lo, t_hi, (2, N))
    ang = rng.uniform(0, 2 * np.pi, (2, N))
    z = rng.uniform(-z_half, z_half, (2, N))
    imgs = []
    for k in (0, 1):
        Z = np.sqrt(s_in**2 + z[k] ** 2)
        eps = z[k] / Z
        root = np.sqrt(1 - eps**2)
        imgs.append(
            np.stack(
                [
                    -s_in + Z + t[k],
                    t[k] * root * np.cos(ang[k]),
                    t[k] * root * np.sin(ang[k]),
                    z[k] + t[k] * eps,
                ],
                axis=1,
            )
        )
    img_dist = np.linalg.norm(imgs[0] - imgs[1], axis=1)
    ang_gap = np.mod(ang[0] - ang[1] + np.pi, 2 * np.pi) - np.pi
    par_dist = np.sqrt((t[0] - t[1]) ** 2 + ang_gap**2 + (z[0] - z[1]) ** 2)
    collisions = int(np.sum((img_dist < 1e-8) & (par_dist > 1e-6)))
    passed = (
        worst_cone < tols["cone_residual"]
        and min_sigma > tols["min_singular"]
        and collisions == 0
    )
    summary = {
        "max_cone_residual": worst_cone,
        "min_singular_value": float(min_sigma),
        "collision_pairs_tested": N,
        "collisions": collisions,
        "passed": passed,
    }
    mesh = {
        "s_in": s_in,
        "r": r,
        "apexes": [list(fam.apex(j).as_array()) for j in (1, 2, 3)],
        "filament": [list(filament_point(s_in, z).as_array()) for z in np.linspace(-s_in, s_in, 81)],
        "snapshots": [
            {
                "time": float(tr),
                "cones": [
                    {
                        "j": j,
                        "triangles": _sphere_triangles(fam.apex(j).x, tr + s_in),
                    }
                    for j in (1, 2, 3)
                ],
                "front": {"triangles": _front_triangles(s_in, tr)},
            }
            for tr in params["render_times"]
        ],
    }
    return ResultTable(
        ["z", "T", "cone_res_1", "cone_res_2", "cone_res_3", "min_singular_value"],
        rows, summary, passed, {"mesh": mesh},
    )


def _run_symplectic(params, tols, seed) -> ResultTable:
    rng = np.random.default_rng(seed)
    rows = []
    worst = 0.0
    for case in range(params["cases"]):
        x = rng.normal(size=4)
        xi = rng.normal(size=4)
        xi[1:] += np.array([1.5, 0, 0])
        for sign in (1, -1):
            res = symplectic_residual(sign, PhaseSpacePoint(x, xi))
            worst = max(worst, res)
            rows.append([case, sign, res])
    # normal-form mapping identities on the flowout and the origin fiber
    ident = 0.0
    for _ in range(20):
        lam = rng.uniform(0.1, 2.0)
        t = rng.uniform(0.1, 2.0)
        th = rng.normal(size=3)
        th /= np.linalg.norm(th)
        q = symplectic_normal_form(
            1, PhaseSpacePoint(np.concatenate(([t], t * th)), np.concatenate(([-lam], lam * th)))
        )
        ident = max(
            ident,
            float(np.abs(q.x - np.array([t, 0, 0, 0])).max()),
            float(np.abs(q.xi - np.concatenate(([0.0], lam * th))).max()),
        )
        xi0 = rng.normal(size=4)
        xi0[1:] += np.array([0, 1.2, 0])
        for sign in (1, -1):
            q0 = symplectic_normal_form(sign, PhaseSpacePoint(np.zeros(4), xi0))
            ident = max(ident, float(np.abs(q0.x).max()))
    passed = worst < tols["residual"] and ident < tols["mapping_identity"]
    summary = {
        "max_symplectic_residual": worst,
        "max_mapping_identity_residual": ident,
        "passed": passed,
    }
    return ResultTable(["case", "sign", "residual"], rows, summary, passed, {})


def _run_wave_converge(params, tols, seed) -> ResultTable:
    ms = ManufacturedSolution(kappa=params["kappa"])
    hs, errs, order = ms.convergence_study(params["nodes"], t_max=params["t_max"])
    rows = [[n, h, e] for n, h, e in zip(params["nodes"], hs, errs)]
    passed = tols["order_min"] <= order <= tols["order_max"]
    summary = {"fitted_order": order, "errors": errs, "passed": passed}
    return ResultTable(["nodes", "h", "err_inf"], rows, summary, passed, {})


def _run_threefold(params, tols, seed) -> ResultTable:
    grid, kappa, f1, f2, f3 = default_threefold_setup(
        nodes=params["nodes"], kappa=params["kappa"], amp=params["amp"]
    )
    report = verify_threefold(ConnectionField.zero(1), kappa, f1, f2, f3, params["eps_sweep"], grid)
    v_a, _ = direct_threefold_solve(ConnectionField.zero(1), kappa, f1, f2, f3, grid)
    v_b, _ = direct_threefold_solve(ConnectionField.zero(1), 2 * kappa, f1, f2, f3, grid)
    scale = max(float(np.abs(v_b.data).max()), 1e-300)
    kappa_lin = float(np.abs(v_b.data - 2.0 * v_a.data).max() / scale)
    rows = [
        [e, s, r] for e, s, r in zip(report.eps, report.second_norms, report.rel_errors)
    ]
    decreasing = all(a > b for a, b in zip(report.rel_errors, report.rel_errors[1:]))
    passed = (
        report.rel_errors[-1] < tols["rel_err_final"]
        and decreasing
        and kappa_lin < tols["kappa_linearity"]
    )
    summary = dict(report.to_json_dict())
    summary.update({"kappa_linearity_residual": kappa_lin, "passed": passed})
    return ResultTable(["eps", "second_cross_norm", "rel_err"], rows, summary, passed, {})


RUNNERS = {
    "transport": _run_transport,
    "broken-ray": _run_broken_ray,
    "reconstruct": _run_reconstruct,
    "span-lemma": _run_span_lemma,
    "cone-geometry": _run_cone_geometry,
    "symplectic": _run_symplectic,
    "wave-converge": _run_wave_converge,
    "threefold": _run_threefold,
}


def run_config(cfg: dict, out_dir: Path, quiet: bool = False) -> int:
    diags = validate_config(cfg)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_USAGE
    kind, seed, params, tols = resolve_config(cfg)
    h = config_hash(cfg)
    t0 = time.perf_counter()
    try:
        table = RUNNERS[kind](params, tols, seed)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    wall = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{kind}_{h}.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row])
    payload = {
        "kind": kind,
        "seed": seed,
        "params": params,
        "tolerances": tols,
        "summary": table.summary,
        "metadata": {"config_hash": h, "version": __version__, "wall_time_s": wall},
    }
    json_path = out_dir / f"{kind}_{h}.json"
    json_path.write_text(json.dumps(payload, indent=2))
    for name, content in table.extra_files.items():
        (out_dir / f"{kind}_{h}.{name}.json").write_text(json.dumps(content))
    if not quiet:
        gate = "pass" if table.passed else "TOLERANCE FAIL"
        print(f"{kind}: {gate}  ({csv_path})")
        for key, value in table.summary.items():
            print(f"  {key}: {value}")
    return EXIT_OK if table.passed else EXIT_TOLERANCE


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="brokenray", description="configuration-driven experiment runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute an experiment configuration")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", type=Path, default=Path("out"))
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--quiet", action="store_true")
    p_val = sub.add_parser("validate", help="schema-check a configuration without running")
    p_val.add_argument("config", type=Path)
    args = parser.parse_args(argv)

    try:
        cfg = json.loads(args.config.read_text())
    except FileNotFoundError:
        print(f"config error: {args.config}: no such file", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"config error: {args.config}: invalid JSON ({exc})", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "validate":
        diags = validate_config(cfg)
        for d in diags:
            print(d)
        if not diags:
            print("ok")
        return EXIT_OK if not diags else EXIT_USAGE

    if args.seed is not None:
        cfg["seed"] = args.seed
    return run_config(cfg, args.out, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
