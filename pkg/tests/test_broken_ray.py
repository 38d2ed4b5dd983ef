import numpy as np
import pytest

from brokenray.broken_ray import (
    DegenerateSpanError,
    broken_transform,
    end_to_end_synthetic,
    gauge_residual_at,
    lightlike_frame_pairings,
    reconstruct_gauge_at,
    reconstruct_gauge_field,
    recover_connection_at,
    tetrahedral_directions,
    verify_pairing_match,
)
from brokenray.minkowski import (
    LightlikeSegment,
    ObservationSet,
    SpacetimePoint,
    diamond_grid,
    sample_triples,
)
from brokenray.transport import (
    ConnectionField,
    GaugeMap,
    fundamental_solution,
    gauge_transform_connection,
    make_bump_gauge,
    pairing,
    random_skew_hermitian,
)

P = SpacetimePoint.of

U_SET = ObservationSet(0.15)
VERTEX = P(0.4, 0.3, 0, 0)


def bump_gauge_example(n=2, seed=100, scale=1.0):
    rng = np.random.default_rng(seed)
    # support well away from the cylinder, near the sample vertex region
    return make_bump_gauge(n, random_skew_hermitian(n, rng, scale), P(0.45, 0.42, 0, 0), 0.2, U_SET)


def test_broken_transform_zero_connection():
    tr = sample_triples(U_SET, VERTEX, 1, seed=1)[0]
    datum = broken_transform(ConnectionField.zero(2), tr, steps=100)
    np.testing.assert_allclose(datum.S, np.eye(2), atol=1e-14)


def test_broken_transform_scalar_oracle():
    # n=1, A_0 = i*alpha constant: S = exp(-i alpha (L_in + L_out))
    alpha = 0.7
    A = ConnectionField.constant([np.array([[1j * alpha]])] + [np.zeros((1, 1))] * 3)
    tr = sample_triples(U_SET, VERTEX, 1, seed=2)[0]
    datum = broken_transform(A, tr, steps=400)
    expected = np.exp(-1j * alpha * (tr.leg_in.s_len + tr.leg_out.s_len))
    assert datum.S[0, 0] == pytest.approx(expected, abs=1e-10)


def test_broken_transform_inverse_relation():
    # S_{x<-y<-z} computed by backward integration inverts S_{z<-y<-x}
    A = ConnectionField.random_smooth(2, seed=3)
    for k, tr in enumerate(sample_triples(U_SET, VERTEX, 3, seed=4)):
        datum = broken_transform(A, tr, steps=800)
        P_yx_rev = fundamental_solution(A, tr.leg_in, 0.0, tr.leg_in.s_len, steps=800)
        P_zy_rev = fundamental_solution(A, tr.leg_out, 0.0, tr.leg_out.s_len, steps=800)
        S_rev = P_yx_rev @ P_zy_rev
        assert np.linalg.norm(S_rev @ datum.S - np.eye(2)) < 1e-7


def test_broken_transform_gauge_invariance():
    A = ConnectionField.random_smooth(2, seed=5, scale=0.6)
    u = bump_gauge_example()
    B = gauge_transform_connection(A, u)
    worst = 0.0
    for tr in sample_triples(U_SET, VERTEX, 10, seed=6):
        da = broken_transform(A, tr)
        db = broken_transform(B, tr)
        worst = max(worst, np.linalg.norm(da.S - db.S))
        assert da.unitarity_defect < 1e-9
    assert worst < 1e-7


def test_reconstruct_trivial_pair_gives_identity():
    A = ConnectionField.random_smooth(2, seed=7)
    xs = [tr.x for tr in sample_triples(U_SET, VERTEX, 4, seed=8)]
    rep = reconstruct_gauge_at(A, A, VERTEX, xs, steps=300)
    np.testing.assert_allclose(rep.u_rec, np.eye(2), atol=1e-12)
    assert rep.x_independence_defect < 1e-12


def test_reconstruct_synthetic_pair_recovers_gauge():
    A = ConnectionField.random_smooth(2, seed=9, scale=0.7)
    u = bump_gauge_example(seed=101)
    B = gauge_transform_connection(A, u)
    xs = [tr.x for tr in sample_triples(U_SET, VERTEX, 6, seed=10)]
    rep = reconstruct_gauge_at(A, B, VERTEX, xs)
    assert np.linalg.norm(rep.u_rec - u(VERTEX)) < 1e-6
    assert rep.x_independence_defect < 1e-7
    assert rep.unitarity_defect < 1e-6


def test_reconstruct_base_point_independence_two_points():
    A = ConnectionField.random_smooth(2, seed=11, scale=0.7)
    u = bump_gauge_example(seed=102)
    B = gauge_transform_connection(A, u)
    xs = [tr.x for tr in sample_triples(U_SET, VERTEX, 2, seed=12)]
    assert len(xs) == 2
    rep = reconstruct_gauge_at(A, B, VERTEX, xs)
    assert rep.x_independence_defect < 1e-7


def test_reconstruct_requires_base_points():
    A = ConnectionField.zero(2)
    with pytest.raises(ValueError):
        reconstruct_gauge_at(A, A, VERTEX, [])


def test_boundary_consistency_of_reconstruction():
    # base points with |x| close to the cylinder radius still reproduce u(y)
    A = ConnectionField.random_smooth(2, seed=13, scale=0.7)
    u = bump_gauge_example(seed=103)
    B = gauge_transform_connection(A, u)
    near_boundary = []
    for tr in sample_triples(U_SET, VERTEX, 60, seed=14):
        if np.linalg.norm(tr.x.x) > 0.9 * U_SET.epsilon:
            near_boundary.append(tr.x)
    assert len(near_boundary) >= 2
    rep = reconstruct_gauge_at(A, B, VERTEX, near_boundary[:4])
    assert np.linalg.norm(rep.u_rec - u(VERTEX)) < 1e-6


def test_gauge_residual_synthetic_pair():
    A = ConnectionField.random_smooth(2, seed=15, scale=0.6)
    u = bump_gauge_example(seed=104)
    B = gauge_transform_connection(A, u)
    res = gauge_residual_at(A, B, U_SET, VERTEX, steps=600, n_base=4, seed=16, fd_step=1e-4)
    assert res < 1e-4


def test_recover_connection_exactness():
    A = ConnectionField.random_smooth(3, seed=17)
    y = P(0.35, 0.4, -0.2, 0.1)
    comps = recover_connection_at(y, lightlike_frame_pairings(A, y))
    truth = A(y)
    for mu in range(4):
        assert np.linalg.norm(comps[mu] - truth[mu]) < 1e-10


def test_recover_connection_zero_values():
    vals = [(np.concatenate(([1.0], th)), np.zeros((2, 2))) for th in tetrahedral_directions()]
    comps = recover_connection_at(P(0, 0, 0, 0), vals)
    for c in comps:
        np.testing.assert_allclose(c, 0)


def test_recover_connection_needs_four_directions():
    A = ConnectionField.random_smooth(2, seed=18)
    y = P(0.3, 0.5, 0, 0)
    prs = lightlike_frame_pairings(A, y)[:3]
    with pytest.raises(DegenerateSpanError):
        recover_connection_at(y, prs)


def test_recover_connection_rejects_ill_conditioned_set():
    y = P(0, 0, 0, 0)
    th = tetrahedral_directions()[0]
    prs = [(np.concatenate(([1.0], th + 1e-9 * k)), np.zeros((1, 1))) for k in range(4)]
    with pytest.raises(DegenerateSpanError):
        recover_connection_at(y, prs)


def test_verify_pairing_match_trivial():
    A = ConnectionField.random_smooth(2, seed=19)
    seg = LightlikeSegment(P(0.45, 0.3, 0, 0), P(0.55, 0.4, 0, 0), np.array([1.0, 0, 0]), 0.1)
    eye = np.eye(2, dtype=complex)
    res = verify_pairing_match(A, A, lambda p: eye.copy(), seg, num_samples=5)
    assert res < 1e-12


def test_verify_pairing_match_synthetic():
    A = ConnectionField.random_smooth(2, seed=20, scale=0.6)
    u = bump_gauge_example(seed=105)
    B = gauge_transform_connection(A, u)
    seg = LightlikeSegment(P(0.42, 0.3, 0, 0), P(0.52, 0.4, 0, 0), np.array([1.0, 0, 0]), 0.1)
    u_field = reconstruct_gauge_field(A, B, U_SET, steps=400, n_base=4, seed=21)
    res = verify_pairing_match(A, B, u_field, seg, num_samples=4, fd_step=1e-4)
    assert res < 1e-4


def test_verify_pairing_match_fd_second_order():
    # the finite-difference differential dominates: halving the step ~ quarters it
    A = ConnectionField.random_smooth(2, seed=22, scale=0.6)
    u = bump_gauge_example(seed=106)
    B = gauge_transform_connection(A, u)
    seg = LightlikeSegment(P(0.42, 0.32, 0, 0), P(0.5, 0.4, 0, 0), np.array([1.0, 0, 0]), 0.08)
    # use the exact synthetic gauge as the sampled map so only FD error remains
    res_h = verify_pairing_match(A, B, lambda p: u(np.asarray(p)), seg, num_samples=3, fd_step=2e-3)
    res_h2 = verify_pairing_match(A, B, lambda p: u(np.asarray(p)), seg, num_samples=3, fd_step=1e-3)
    assert 3.0 < res_h / res_h2 < 5.5


def test_end_to_end_trivial_gauge():
    A = ConnectionField.random_smooth(2, seed=23, scale=0.5)
    grid = diamond_grid(U_SET, 3, seed=24)
    rep = end_to_end_synthetic(
        A, GaugeMap.identity(2), U_SET, grid, steps=300, seed=25, n_base=3,
        s_check_triples=3, with_gauge_residual=False,
    )
    s = rep.summary()
    assert s["u_error"]["max"] < 1e-9
    assert s["x_independence_defect"]["max"] < 1e-9
    assert s["s_equality_max"] < 1e-12


def test_end_to_end_synthetic_small_grid():
    A = ConnectionField.random_smooth(2, seed=26, scale=0.6)
    u = bump_gauge_example(seed=107)
    grid = [y for y in diamond_grid(U_SET, 6, seed=27)]
    rep = end_to_end_synthetic(
        A, u, U_SET, grid, steps=500, seed=28, n_base=4, s_check_triples=6,
        with_gauge_residual=False,
    )
    s = rep.summary()
    assert s["count"] >= 4
    assert s["s_equality_max"] < 1e-7
    assert s["u_error"]["max"] < 1e-6
    assert s["x_independence_defect"]["max"] < 1e-7
    rows = rep.csv_rows()
    assert len(rows[0]) == len(rep.CSV_HEADER)
