import numpy as np
import pytest

from brokenray.minkowski import ObservationSet, SpacetimePoint
from brokenray.transport import ConnectionField, make_bump_gauge, gauge_transform_connection
from brokenray.wave import (
    FieldHistory,
    InvalidGridError,
    ManufacturedSolution,
    SolverDivergenceError,
    SourceSpec,
    StencilError,
    WaveGrid,
    apply_box_A,
    causally_disjoint,
    cross_derivative_probe,
    default_threefold_setup,
    direct_threefold_solve,
    interaction_source,
    linearized_solve,
    smooth_bump,
    solve_forward,
    source_to_solution,
    verify_threefold,
)


# ---------------------------------------------------------------------------
# manufactured case: the hand-derived pair lives in brokenray.wave; the test
# below cross-validates it against the discrete operator through apply_box_A
# before relying on it for the convergence study
# ---------------------------------------------------------------------------

MMS = ManufacturedSolution()
MMS_A, MMS_B, MMS_KAPPA = MMS.a, MMS.b, MMS.kappa


def mms_exact(t, x):
    return MMS.exact(t, x)


def mms_source(t, grid):
    return MMS.source(t, grid)


def mms_connection():
    return MMS.connection()


# ---------------------------------------------------------------------------
# basics
# ---------------------------------------------------------------------------


def test_zero_source_gives_identically_zero():
    grid = WaveGrid.make(1, 101, 1.0, 0.5)
    hist = solve_forward(ConnectionField.zero(2), -1.0, None, grid)
    assert hist.norm_inf() == 0.0


def test_cfl_violation_rejected():
    with pytest.raises(InvalidGridError):
        WaveGrid(1, 0.01, 0.02, (101,), 0.5)


def test_grid_containment_check():
    grid = WaveGrid.make(1, 101, 0.5, 0.6)
    src = SourceSpec(np.array([0.0]), 0.05, (0.1, 0.3), np.array([1.0]))
    with pytest.raises(InvalidGridError):
        solve_forward(ConnectionField.zero(1), 0.0, src, grid)


def test_blowup_guard_triggers_at_threshold():
    grid = WaveGrid.make(1, 201, 1.0, 0.8)
    src = SourceSpec(np.array([0.0]), 0.05, (0.05, 0.4), np.array([2000.0]))
    with pytest.raises(SolverDivergenceError):
        solve_forward(ConnectionField.zero(1), -1.0, src, grid, blowup_threshold=1.0)


def test_linearized_is_kappa_zero_bit_for_bit():
    grid = WaveGrid.make(1, 101, 1.0, 0.4)
    src = SourceSpec(np.array([0.0]), 0.04, (0.05, 0.2), np.array([1.0 + 0.5j]))
    a = solve_forward(ConnectionField.zero(1), 0.0, src, grid)
    b = linearized_solve(ConnectionField.zero(1), src, grid)
    np.testing.assert_array_equal(a.data, b.data)


def test_superposition_linearity():
    grid = WaveGrid.make(1, 151, 1.0, 0.4)
    A = mms_connection()
    s1 = SourceSpec(np.array([-0.06]), 0.03, (0.05, 0.2), np.array([1.0]))
    s2 = SourceSpec(np.array([0.06]), 0.03, (0.05, 0.2), np.array([0.5j]))
    u1 = linearized_solve(A, s1, grid)
    u2 = linearized_solve(A, s2, grid)
    u12 = linearized_solve(A, [s1, s2], grid)
    scale = max(u12.norm_inf(), 1e-30)
    assert np.abs(u12.data - u1.data - u2.data).max() / scale < 1e-12


def test_finite_propagation_speed_1d():
    grid = WaveGrid.make(1, 401, 1.0, 0.5)
    radius = 0.04
    src = SourceSpec(np.array([0.0]), radius, (0.05, 0.2), np.array([1.0]))
    hist = solve_forward(ConnectionField.zero(1), -1.0, src, grid)
    x = grid.axis(0)
    for m, t in enumerate(hist.times):
        outside = np.abs(x) > radius + t + 2 * grid.h
        if outside.any():
            assert np.abs(hist.data[m][outside]).max() < 1e-12 * max(1.0, hist.norm_inf())


def test_finite_propagation_speed_3d_smoke():
    grid = WaveGrid.make(3, 32, 0.5, 0.35)
    src = SourceSpec(np.zeros(3), 0.06, (0.05, 0.15), np.array([1.0]))
    A = ConnectionField.constant(
        [np.array([[0.3j]]), np.array([[0.2j]]), np.zeros((1, 1)), np.zeros((1, 1))]
    )
    hist = solve_forward(A, -1.0, src, grid)
    peak = hist.norm_inf()
    assert peak > 0
    r = np.linalg.norm(grid.mesh(), axis=-1)
    # numerical precursor beyond the cone decays within a few stencil widths
    for m in range(0, len(hist.times), 2):
        near = r > 0.06 + hist.times[m] + 2 * grid.h
        far = r > 0.06 + hist.times[m] + 4 * grid.h
        if near.any():
            assert np.abs(hist.data[m][near, :]).max() < 1e-7 * peak
        if far.any():
            assert np.abs(hist.data[m][far, :]).max() < 1e-12 * peak


# ---------------------------------------------------------------------------
# discrete operator
# ---------------------------------------------------------------------------


def test_apply_box_A_reduces_to_discrete_box_without_connection():
    grid = WaveGrid.make(1, 101, 1.0, 0.4)
    x = grid.axis(0)
    snaps = tuple(np.cos(3 * x + 0.1 * k)[:, None].astype(complex) for k in range(3))
    node = (50,)
    val = apply_box_A(ConnectionField.zero(1), snaps, grid, node, 0.2)
    um1, u0, up1 = snaps
    manual = (up1[node] - 2 * u0[node] + um1[node]) / grid.dt**2
    manual = manual - (u0[51] - 2 * u0[50] + u0[49]) / grid.h**2
    np.testing.assert_allclose(val, manual, atol=1e-15)


def test_apply_box_A_spatially_constant_field_keeps_only_time_terms():
    grid = WaveGrid.make(1, 101, 1.0, 0.4)
    A = mms_connection()
    g = [0.3 + 0.1j, 0.35 - 0.05j, 0.28 + 0.2j]
    snaps = tuple(np.full((101, 1), gk, dtype=complex) for gk in g)
    val = apply_box_A(A, snaps, grid, (40,), 0.2)
    a0 = 1j * MMS_A
    expected = (g[2] - 2 * g[1] + g[0]) / grid.dt**2
    expected += 2 * a0 * (g[2] - g[0]) / (2 * grid.dt)
    expected += (a0**2 - (1j * MMS_B) ** 2) * g[1]  # divA = 0 for constants
    assert val[0] == pytest.approx(expected, abs=1e-13)


def test_apply_box_A_matches_symbolic_operator_at_second_order():
    A = mms_connection()

    def residual(nodes):
        grid = WaveGrid.make(1, nodes, half_width=1.0, t_max=0.4)
        t = 0.2
        x = grid.axis(0)
        snaps = tuple(mms_exact(t + k * grid.dt, x)[:, None] for k in (-1, 0, 1))
        node = (int(np.argmin(np.abs(x - 0.05))),)
        got = apply_box_A(A, snaps, grid, node, t)
        # analytic box_A phi* = f - kappa |phi*|^2 phi* at (t, x_node)
        fx = mms_source(t, grid)[node]
        phi = mms_exact(t, x[node])
        exact = fx - MMS_KAPPA * (abs(phi) ** 2 * phi)
        return float(np.abs(got - exact).max())

    r1, r2 = residual(201), residual(401)
    assert 3.0 < r1 / r2 < 5.5


def test_apply_box_A_boundary_node_raises():
    grid = WaveGrid.make(1, 101, 1.0, 0.4)
    snaps = tuple(np.zeros((101, 1), dtype=complex) for _ in range(3))
    with pytest.raises(StencilError):
        apply_box_A(ConnectionField.zero(1), snaps, grid, (0,), 0.2)


# ---------------------------------------------------------------------------
# manufactured-solution convergence
# ---------------------------------------------------------------------------


def test_manufactured_solution_convergence_order():
    _, errs, order = MMS.convergence_study((101, 201, 401))
    assert errs[0] > errs[1] > errs[2]
    assert 1.8 <= order <= 2.2


def test_dalembert_oracle_1d():
    # kappa = 0, A = 0: u(t,x) = 1/2 int_0^t int_{x-(t-s)}^{x+(t-s)} f
    from scipy.integrate import cumulative_trapezoid

    grid = WaveGrid.make(1, 401, 1.0, 0.45)
    src = SourceSpec(np.array([0.0]), 0.05, (0.05, 0.25), np.array([1.0]))
    hist = solve_forward(ConnectionField.zero(1), 0.0, src, grid)

    s_fine = np.linspace(0, grid.t_max, 1201)
    xi_fine = np.linspace(-1, 1, 4001)
    f_vals = np.array([src.time_profile(s) for s in s_fine])[:, None] * smooth_bump(
        xi_fine / src.radius
    )[None, :]
    cum = cumulative_trapezoid(f_vals, xi_fine, axis=1, initial=0.0)

    def inner(s_idx, lo, hi):
        return np.interp(hi, xi_fine, cum[s_idx]) - np.interp(lo, xi_fine, cum[s_idx])

    x_nodes = grid.axis(0)
    t_final = hist.times[-1]
    for xq in (-0.2, 0.0, 0.15):
        vals = np.array([inner(i, xq - (t_final - s), xq + (t_final - s)) for i, s in enumerate(s_fine)])
        mask = s_fine <= t_final
        oracle = 0.5 * np.trapezoid(vals[mask], s_fine[mask])
        node = int(np.argmin(np.abs(x_nodes - xq)))
        assert hist.final()[node, 0].real == pytest.approx(oracle, abs=5e-4)
        assert abs(hist.final()[node, 0].imag) < 1e-12


# ---------------------------------------------------------------------------
# observation restriction and gauge covariance
# ---------------------------------------------------------------------------


def test_source_to_solution_zero_source():
    grid = WaveGrid.make(1, 101, 1.0, 0.4)
    trace = source_to_solution(ConnectionField.zero(1), -1.0, None, grid, ObservationSet(0.1))
    assert trace.data.shape[1] == int(np.sum(np.abs(grid.axis(0)) < 0.1))
    assert np.abs(trace.data).max() == 0.0


def test_gauge_covariance_of_restriction_second_order():
    # u trivial on the observation region: restrictions agree up to O(h^2)
    U = ObservationSet(0.1)
    A = mms_connection()
    rng = np.random.default_rng(3)
    X = np.array([[0.9j]])
    u = make_bump_gauge(1, X, SpacetimePoint.of(0.45, 0.5, 0, 0), 0.15, U)
    B = gauge_transform_connection(A, u)
    src = SourceSpec(np.array([0.0]), 0.04, (0.05, 0.2), np.array([1.0]))

    def restriction_gap(nodes):
        grid = WaveGrid.make(1, nodes, half_width=1.6, t_max=1.0)
        ta = source_to_solution(A, -1.0, src, grid, U)
        tb = source_to_solution(B, -1.0, src, grid, U)
        scale = max(np.abs(ta.data).max(), 1e-30)
        return float(np.abs(ta.data - tb.data).max() / scale)

    g1, g2 = restriction_gap(161), restriction_gap(321)
    assert g1 > 1e-8  # the gauge genuinely scatters the wave
    assert g1 / g2 > 3.0


# ---------------------------------------------------------------------------
# linearization identities
# ---------------------------------------------------------------------------


def test_sources_causally_disjoint():
    _, _, f1, f2, f3 = default_threefold_setup()
    assert causally_disjoint(f1, f2)
    assert causally_disjoint(f1, f3)
    assert causally_disjoint(f2, f3)
    overlapping = SourceSpec(np.array([-0.07]), 0.02, (0.05, 0.085), np.array([1.0]))
    assert not causally_disjoint(f1, overlapping)


def test_second_cross_derivative_vanishes():
    grid, kappa, f1, f2, f3 = default_threefold_setup(nodes=201)
    probe = cross_derivative_probe(ConnectionField.zero(1), kappa, f1, f2, f3, (2e-2,) * 3, 2, grid)
    v1 = linearized_solve(ConnectionField.zero(1), f1, grid)
    assert np.abs(probe.data).max() <= 1e-13 * v1.norm_inf()


def test_third_cross_derivative_zero_without_nonlinearity():
    grid, _, f1, f2, f3 = default_threefold_setup(nodes=201)
    probe = cross_derivative_probe(ConnectionField.zero(1), 0.0, f1, f2, f3, (2e-2,) * 3, 3, grid)
    v1 = linearized_solve(ConnectionField.zero(1), f1, grid)
    assert np.abs(probe.data).max() <= 1e-12 * v1.norm_inf()


def test_threefold_identity_d1():
    grid, kappa, f1, f2, f3 = default_threefold_setup(nodes=401)
    report = verify_threefold(ConnectionField.zero(1), kappa, f1, f2, f3, (4e-2, 2e-2, 1e-2), grid)
    assert report.rel_errors[0] > report.rel_errors[1] > report.rel_errors[2]
    assert report.rel_errors[-1] < 0.05
    assert 1.7 < report.fitted_order < 2.3
    assert max(report.second_norms) <= 1e-12 * report.direct_norm


def test_threefold_identity_with_connection_n2():
    # the identity holds with a non-trivial connection and bundle rank 2
    grid = WaveGrid.make(1, 201, 1.0, 0.4)
    X0 = np.array([[0.3j, 0.1 + 0.2j], [-0.1 + 0.2j, -0.4j]])
    X1 = np.array([[0.2j, -0.15 + 0.1j], [0.15 + 0.1j, 0.1j]])
    A = ConnectionField.constant([X0, X1, np.zeros((2, 2)), np.zeros((2, 2))])
    window = (0.05, 0.085)
    f1 = SourceSpec(np.array([-0.08]), 0.02, window, np.array([1.0, 0.2j]))
    f2 = SourceSpec(np.array([0.0]), 0.02, window, np.array([0.5j, 1.0]))
    f3 = SourceSpec(np.array([0.08]), 0.02, window, np.array([1.0, -0.3]))
    report = verify_threefold(A, -1.0, f1, f2, f3, (2e-2,), grid)
    assert report.rel_errors[0] < 0.05


def test_threefold_kappa_linearity():
    grid, _, f1, f2, f3 = default_threefold_setup(nodes=201)
    A = ConnectionField.zero(1)
    v_a, _ = direct_threefold_solve(A, -1.0, f1, f2, f3, grid)
    v_b, _ = direct_threefold_solve(A, -2.0, f1, f2, f3, grid)
    scale = max(np.abs(v_b.data).max(), 1e-30)
    assert np.abs(v_b.data - 2.0 * v_a.data).max() / scale < 1e-10


def test_interaction_source_symmetry():
    grid = WaveGrid.make(1, 101, 1.0, 0.3)
    rng = np.random.default_rng(0)
    hists = [
        FieldHistory(grid.times(), rng.normal(size=(len(grid.times()), 101, 2)) + 1j * rng.normal(size=(len(grid.times()), 101, 2)), grid)
        for _ in range(3)
    ]
    s123 = interaction_source(-1.0, *hists)
    s321 = interaction_source(-1.0, hists[2], hists[1], hists[0])
    np.testing.assert_allclose(s123, s321, atol=1e-14)


def test_verify_threefold_rejects_causally_linked_sources():
    grid, kappa, f1, f2, _ = default_threefold_setup(nodes=201)
    f_bad = SourceSpec(np.array([-0.075]), 0.02, (0.05, 0.085), np.array([1.0]))
    with pytest.raises(ValueError):
        verify_threefold(ConnectionField.zero(1), kappa, f1, f2, f_bad, (1e-2,), grid)


def test_field_snapshot_csv_dump(tmp_path):
    grid = WaveGrid.make(1, 101, 1.0, 0.3)
    src = SourceSpec(np.array([0.0]), 0.05, (0.05, 0.2), np.array([1.0 + 0.5j, -0.2j]))
    A = ConnectionField.zero(2)
    hist = solve_forward(A, 0.0, src, grid)
    header, rows = hist.snapshot_rows(len(hist.times) - 1)
    assert header == ["node", "re_0", "im_0", "re_1", "im_1"]
    assert len(rows) == 101
    path = tmp_path / "snap.csv"
    hist.dump_snapshot_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "node,re_0,im_0,re_1,im_1"
    assert len(lines) == 102
    mid = lines[51].split(",")
    assert float(mid[1]) == hist.final()[50, 0].real
